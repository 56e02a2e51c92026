#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "matchbox/analysis.hpp"
#include "matchbox/csv.hpp"
#include "matchbox/error.hpp"
#include "matchbox/merge.hpp"

using namespace matchbox;
using fixtures::bib_catalog;
using fixtures::bib_instance;
using fixtures::vrow;

namespace {

template <class Fn>
std::optional<ErrorCode> thrown_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

using Fired = std::vector<std::pair<std::string, std::vector<Tid>>>;

Fired fired(const std::vector<ChaseStep>& steps) {
    Fired out;
    for (const ChaseStep& s : steps) out.emplace_back(s.md, s.atom_tids);
    return out;
}

// Minimal single-attribute relation for transitivity and survivor tests.
Catalog names_catalog() {
    Catalog cat;
    cat.add(RelationSchema("Person", {
                                         {"pid", AttributeKind::ReferenceId, false, ""},
                                         {"name", AttributeKind::ShortString, false, ""},
                                     }));
    return cat;
}

Instance three_spellings() {
    Instance inst(names_catalog());
    inst.add_tuple("Person", vrow(1, {Value::atomic("Alice")}));
    inst.add_tuple("Person", vrow(2, {Value::atomic("Alicia")}));
    inst.add_tuple("Person", vrow(3, {Value::atomic("Alyce")}));
    return inst;
}

} // namespace

TEST_CASE("positive predictions become a symmetric duplicate-pair set", "[merge]") {
    SECTION("only label-one pairs are collected") {
        const DuplicatePairSet m = pairs_from_predictions(
            "Paper", {{123, 205, 1}, {195, 769, 1}, {123, 769, 0}});
        CHECK(m.relation == "Paper");
        CHECK(m.pairs == std::set<std::pair<Tid, Tid>>{{123, 205}, {195, 769}});
        CHECK(m.contains(123, 205));
        CHECK(m.contains(205, 123)); // symmetric closure
        CHECK_FALSE(m.contains(123, 769));
        CHECK(m.contains(123, 123)); // every record duplicates itself
    }
    SECTION("all-zero labels make an empty set") {
        CHECK(pairs_from_predictions("Paper", {{123, 205, 0}, {195, 769, 0}}).size() == 0);
    }
    SECTION("pair order, repeats, and self-pairs are normalized away") {
        const DuplicatePairSet m = pairs_from_predictions(
            "Paper", {{205, 123, 1}, {123, 205, 1}, {42, 42, 1}});
        CHECK(m.pairs == std::set<std::pair<Tid, Tid>>{{123, 205}});
    }
    SECTION("labels outside {0,1} are rejected") {
        CHECK(thrown_code([] { pairs_from_predictions("Paper", {{1, 2, 3}}); }) ==
              ErrorCode::DataError);
    }
}

TEST_CASE("key-wise union keeps every version of every field", "[merge]") {
    const Value address1 = Value::object_set(
        {{"number", {"250"}}, {"stName", {"Hamilton Str."}}, {"areaCode", {"K2J5G3"}}});
    const Value address2 =
        Value::object_set({{"stName", {"Hamilton Str."}}, {"city", {"Peterbook"}}});

    SECTION("two address versions union into one four-field object") {
        const Value merged = union_mf(address1, address2, "address");
        CHECK(merged == Value::object_set({{"number", {"250"}},
                                          {"stName", {"Hamilton Str."}},
                                          {"areaCode", {"K2J5G3"}},
                                          {"city", {"Peterbook"}}}));
        CHECK(merged.render() == "areaCode=K2J5G3;city=Peterbook;number=250;stName=Hamilton Str.");
    }
    SECTION("conflicting entries under one key are both retained") {
        const Value merged = union_mf(Value::object_set({{"price", {"10"}}}),
                                      Value::object_set({{"price", {"12"}}}), "price");
        CHECK(merged.render() == "price=10|12");
    }
    SECTION("union is idempotent and the empty object is its identity") {
        CHECK(union_mf(address1, address1, "address") == address1);
        CHECK(union_mf(Value::atomic("x"), Value::atomic("x"), "k") == Value::atomic("x"));
        CHECK(union_mf(Value::object_set({}), address1, "address") == address1);
        CHECK(union_mf(Value::null(), address1, "address") == address1);
    }
    SECTION("atomics lift to singletons under the given key") {
        CHECK(union_mf(Value::atomic("x"), Value::object_set({{"k", {"y"}}}), "k") ==
              Value::object_set({{"k", {"x", "y"}}}));
        CHECK(union_mf(Value::atomic("a"), Value::atomic("b"), "name") ==
              Value::object_set({{"name", {"a", "b"}}}));
    }
}

TEST_CASE("merge rules cover every attribute except ids and blocks", "[merge]") {
    const Catalog cat = bib_catalog();

    SECTION("one rule per mergeable attribute, reading only the record id") {
        const std::vector<MatchDependency> rules = merge_rules(cat, "Paper");
        REQUIRE(rules.size() == 5);
        CHECK(rules[0].name == "merge-Paper-title");
        CHECK(rules[1].name == "merge-Paper-year");
        CHECK(rules[2].name == "merge-Paper-cid");
        CHECK(rules[3].name == "merge-Paper-jid");
        CHECK(rules[4].name == "merge-Paper-keyword");
        const MDAnalysis a = analyze_md(rules[0], cat);
        CHECK(a.alhs == std::set<std::string>{"Paper.pid"});
        CHECK(a.arhs == std::array<std::string, 2>{"Paper.title", "Paper.title"});
    }
    SECTION("a relation without a block column merges everything but its id") {
        const std::vector<MatchDependency> rules = merge_rules(cat, "PaperAuthor");
        REQUIRE(rules.size() == 4);
        CHECK(rules.front().name == "merge-PaperAuthor-pid");
        CHECK(rules.back().name == "merge-PaperAuthor-aff");
    }
    SECTION("merge-rule sets are interaction-free, across relations too") {
        std::vector<MatchDependency> rules = merge_rules(cat, "Paper");
        for (const char* rel : {"Author", "PaperAuthor"})
            for (MatchDependency& md : merge_rules(cat, rel)) rules.push_back(std::move(md));
        CHECK(is_merge_set_interaction_free(rules, cat));
        CHECK(is_merge_set_interaction_free({}, cat));
    }
    SECTION("a rule that writes the record id is not interaction-free") {
        const MatchDependency bad = parse_md(
            "md bad-rid-write: Person(r1, n1), Person(r2, n2), sim(pid: r1, r2)"
            " -> ident(r1, r2)");
        CHECK_FALSE(is_merge_set_interaction_free({bad}, names_catalog()));
    }
}

TEST_CASE("merging a confirmed pair unions every differing attribute", "[merge]") {
    const Instance inst = bib_instance();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    const DuplicatePairSet m{"Paper", {{123, 205}}};
    const MergeResult result = merge(inst, m, mfs);

    SECTION("only the genuinely differing attributes fire") {
        CHECK(fired(result.trace) == Fired{{"merge-Paper-title", {123, 205}},
                                           {"merge-Paper-keyword", {123, 205}}});
    }
    SECTION("both records end with the same unioned values") {
        const Value title = Value::object_set(
            {{"title", {"Illness entities in Africa", "Illness entities in West Africa"}}});
        const Value keyword =
            Value::object_set({{"keyword", {"Africa, Illness", "West Africa, Illness"}}});
        for (Tid tid : {123, 205}) {
            const Tuple& t = result.merged.tuple_at("Paper", tid);
            CHECK(t.values[1] == title);
            CHECK(t.values[2] == Value::atomic("1998"));
            CHECK(t.values[3] == Value::atomic("179"));
            CHECK(t.values[4] == Value::null());
            CHECK(t.values[5] == keyword);
        }
        // block numbers play no role in merging
        CHECK(result.merged.tuple_at("Paper", 123).values[6] == Value::atomic("123"));
        CHECK(result.merged.tuple_at("Paper", 205).values[6] == Value::atomic("205"));
    }
    SECTION("the lower record id survives, everything else passes through") {
        CHECK(result.kept_rids ==
              std::map<std::string, std::vector<Tid>>{{"Author", {612, 659, 2546, 4994}},
                                                      {"Paper", {123, 195, 769}},
                                                      {"PaperAuthor", {9001, 9002, 9003, 9004}}});
        CHECK(result.merged.tuples("Paper").size() == 4);
        CHECK(result.resolved.tuples("Paper").size() == 3);
        CHECK(result.resolved.tuples("Author") == inst.tuples("Author"));
    }
    SECTION("the resolved relation exports as CSV with object-set cells") {
        std::ostringstream out;
        save_csv(out, inst.catalog().at("Paper"), result.resolved.tuples("Paper"));
        CHECK(out.str() ==
              "pid,title,year,cid,jid,keyword,pbl\n"
              "123,title=Illness entities in Africa|Illness entities in West Africa,"
              "1998,179,,\"keyword=Africa, Illness|West Africa, Illness\",123\n"
              "195,DLR Simulation Environment,2007,146,,Simulation,195\n"
              "769,DLR Simulation Environment m3,2007,146,,Simulation m3,769\n");
    }
}

TEST_CASE("transitive duplicate pairs converge to one record", "[merge]") {
    const Instance inst = three_spellings();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    const DuplicatePairSet m{"Person", {{1, 2}, {2, 3}}};
    const MergeResult result = merge(inst, m, mfs);

    SECTION("the recorded pairs re-fire as their records grow") {
        CHECK(fired(result.trace) == Fired{{"merge-Person-name", {1, 2}},
                                           {"merge-Person-name", {2, 3}},
                                           {"merge-Person-name", {1, 2}}});
    }
    SECTION("all three tails are identical and one record survives") {
        const Value all = Value::object_set({{"name", {"Alice", "Alicia", "Alyce"}}});
        for (Tid tid : {1, 2, 3}) CHECK(result.merged.tuple_at("Person", tid).values[1] == all);
        CHECK(result.kept_rids == std::map<std::string, std::vector<Tid>>{{"Person", {1}}});
        CHECK(result.resolved.tuples("Person").size() == 1);
    }
    SECTION("every enforcement order reaches the same fixpoint") {
        const AllOrdersResult orders = chase_all_orders(
            inst, merge_rules(inst.catalog(), "Person"), duplicate_facts(inst, m), mfs);
        CHECK(orders.stable_forms.size() == 1);
        CHECK(orders.stable_forms.count(result.merged.canonical_form()) == 1);
    }
}

TEST_CASE("an empty duplicate set changes nothing", "[merge]") {
    const Instance inst = bib_instance();
    const MergeResult result =
        merge(inst, DuplicatePairSet{"Paper", {}}, union_case_registry(inst.catalog()));
    CHECK(result.trace.empty());
    CHECK(result.merged.relations() == inst.relations());
    CHECK(result.resolved.relations() == inst.relations());
    CHECK(result.kept_rids.at("Paper") == std::vector<Tid>{123, 195, 205, 769});
}

TEST_CASE("merging is idempotent and only grows information", "[merge]") {
    const Instance inst = bib_instance();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    const DuplicatePairSet m{"Paper", {{123, 205}}};
    const MergeResult first = merge(inst, m, mfs);
    const MergeResult again = merge(first.merged, m, mfs);
    CHECK(again.trace.empty());
    CHECK(again.resolved.relations() == first.resolved.relations());
    CHECK(instance_leq(inst, first.merged, mfs));
}

TEST_CASE("survivors keep the smallest record id", "[merge]") {
    const Instance inst = three_spellings();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    const MergeResult result = merge(inst, DuplicatePairSet{"Person", {{2, 3}}}, mfs);
    CHECK(result.kept_rids == std::map<std::string, std::vector<Tid>>{{"Person", {1, 2}}});
    CHECK(result.resolved.tuple_at("Person", 1).values[1] == Value::atomic("Alice"));
    CHECK(result.resolved.tuple_at("Person", 2).values[1] ==
          Value::object_set({{"name", {"Alicia", "Alyce"}}}));
}

TEST_CASE("merge rejects pairs that name no record of the relation", "[merge]") {
    const Instance inst = bib_instance();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    CHECK(thrown_code([&] { merge(inst, DuplicatePairSet{"Paper", {{123, 9999}}}, mfs); }) ==
          ErrorCode::DataError);
    // 659 exists, but it is an Author record
    CHECK(thrown_code([&] { merge(inst, DuplicatePairSet{"Paper", {{123, 659}}}, mfs); }) ==
          ErrorCode::DataError);
}

TEST_CASE("merge propagates chase budget errors", "[merge]") {
    const Instance inst = bib_instance();
    const MfRegistry mfs = union_case_registry(inst.catalog());
    ChaseOptions opts;
    opts.budget = 1; // the 123/205 merge needs two enforcements
    CHECK(thrown_code([&] { merge(inst, DuplicatePairSet{"Paper", {{123, 205}}}, mfs, opts); }) ==
          ErrorCode::ChaseBudgetExceeded);
}
