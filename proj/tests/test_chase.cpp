#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "matchbox/chase.hpp"
#include "matchbox/error.hpp"
#include "matchbox/mf.hpp"

using namespace matchbox;
using fixtures::column;
using fixtures::row;

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

Fired fired(const ChaseResult& r) {
    Fired out;
    for (const ChaseStep& s : r.steps) out.emplace_back(s.md, s.atom_tids);
    return out;
}

// Authors join papers through the pid column; the rule blocks two authors
// together when their names are similar and their papers share a block.
Catalog cite_catalog() {
    Catalog cat;
    cat.add(RelationSchema("Author", {
                                         {"aid", AttributeKind::ReferenceId, false, ""},
                                         {"name", AttributeKind::ShortString, false, ""},
                                         {"pid", AttributeKind::NumericString, false, "pid"},
                                         {"abl", AttributeKind::BlockNumber, false, ""},
                                     }));
    cat.add(RelationSchema("Paper", {
                                        {"pid", AttributeKind::ReferenceId, false, "pid"},
                                        {"title", AttributeKind::LongText, false, ""},
                                        {"pbl", AttributeKind::BlockNumber, false, ""},
                                    }));
    return cat;
}

MatchDependency author_block_rule() {
    return parse_md(
        "md auth-block: Author(a1, n1, p1, bl1), Author(a2, n2, p2, bl2), "
        "Paper(p1, t1, bl4), Paper(p2, t2, bl4), sim(name: n1, n2) -> ident(bl1, bl2)");
}

} // namespace

TEST_CASE("applicability enumerates unordered leading pairs once", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();

    const ConjunctiveQuery q = applicability_query(rules[0]);
    REQUIRE(q.atoms.size() == 2);
    CHECK(q.distinct == std::vector<std::pair<std::string, std::string>>{{"t1", "t2"},
                                                                         {"y1", "y2"}});

    // Both orientations of each pair satisfy the query; one survives.
    CHECK(applicable(inst, sims, rules[0]) ==
          std::vector<std::vector<Tid>>{{1, 2}, {1, 3}});
    // No two B-values are similar yet, so the second rule is quiet.
    CHECK(applicable(inst, sims, rules[1]).empty());
    CHECK(!is_stable(inst, rules, sims));
}

TEST_CASE("one enforcement merges both identity cells", "[chase]") {
    const Instance inst = fixtures::three_records();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    const EnforceResult r1 = enforce_step(inst, rules[0], {1, 2}, mfs);
    CHECK(column(r1.next, "R", 2) == std::vector<std::string>{"b12", "b12", "b3"});
    CHECK(column(r1.next, "R", 3) == std::vector<std::string>{"c1", "c2", "c3"});
    CHECK(r1.next.version() == inst.version() + 1);
    CHECK(r1.step.md == "same-b");
    CHECK(r1.step.atom_tids == std::vector<Tid>{1, 2});
    CHECK(r1.step.attr1 == "R.B");
    CHECK(r1.step.attr2 == "R.B");
    CHECK(r1.step.before1 == Value::atomic("b1"));
    CHECK(r1.step.before2 == Value::atomic("b2"));
    CHECK(r1.step.merged == Value::atomic("b12"));

    // Records 1 and 2 now agree on B, which arms the cascade's second rule.
    const SimilarityFactStore sims = fixtures::chain_sims();
    CHECK(applicable(r1.next, sims, rules[1]) == std::vector<std::vector<Tid>>{{1, 2}});
    const EnforceResult r2 = enforce_step(r1.next, rules[1], {1, 2}, mfs);
    CHECK(column(r2.next, "R", 3) == std::vector<std::string>{"c12", "c12", "c3"});
}

TEST_CASE("enforcement refuses bad identity targets", "[chase]") {
    const Instance inst = fixtures::three_records();
    const MfRegistry mfs = fixtures::bc_registry();

    SECTION("record ids are immutable") {
        const MatchDependency md = parse_md(
            "md bad: R(t1, x1, y1, z1), R(t2, x2, y2, z2), sim(a: x1, x2) "
            "-> ident(t1, t2)");
        CHECK(thrown_code([&] { enforce_step(inst, md, {1, 2}, mfs); }) ==
              ErrorCode::SchemaError);
    }
    SECTION("identity attributes must share a domain") {
        const MatchDependency md = parse_md(
            "md skew: R(t1, x1, y1, z1), R(t2, x2, y2, z2), sim(a: x1, x2) "
            "-> ident(y1, z2)");
        CHECK(thrown_code([&] { enforce_step(inst, md, {1, 2}, mfs); }) ==
              ErrorCode::MissingMatchingFunction);
    }
    SECTION("the domain needs a registered function") {
        const MatchDependency md = fixtures::cascade_rules()[0];
        CHECK(thrown_code([&] { enforce_step(inst, md, {1, 2}, MfRegistry{}); }) ==
              ErrorCode::MissingMatchingFunction);
    }
}

TEST_CASE("every schedule reaches the same six-step fixpoint", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    ChaseOptions opts;
    opts.keep_snapshots = true;

    opts.schedule = ChaseSchedule::MdMajor;
    const ChaseResult by_rule = chase(inst, rules, sims, mfs, opts);
    opts.schedule = ChaseSchedule::TidMajor;
    const ChaseResult by_pair = chase(inst, rules, sims, mfs, opts);
    opts.schedule = ChaseSchedule::Descending;
    const ChaseResult descending = chase(inst, rules, sims, mfs, opts);

    for (const ChaseResult* r : {&by_rule, &by_pair, &descending}) {
        CHECK(r->steps.size() == 6);
        CHECK(column(r->final, "R", 2) == std::vector<std::string>{"b123", "b123", "b123"});
        CHECK(column(r->final, "R", 3) == std::vector<std::string>{"c123", "c123", "c123"});
        CHECK(is_stable(r->final, rules, sims));
        CHECK(r->snapshots.size() == 7);
        CHECK(r->final.canonical_form() == by_rule.final.canonical_form());
    }

    CHECK(fired(by_rule) == Fired{{"same-b", {1, 2}},
                                  {"same-b", {1, 3}},
                                  {"same-b", {1, 2}},
                                  {"same-c", {1, 2}},
                                  {"same-c", {1, 3}},
                                  {"same-c", {1, 2}}});
    CHECK(fired(by_pair) == Fired{{"same-b", {1, 2}},
                                  {"same-c", {1, 2}},
                                  {"same-b", {1, 3}},
                                  {"same-b", {1, 2}},
                                  {"same-c", {1, 3}},
                                  {"same-c", {1, 2}}});
    CHECK(fired(descending) == Fired{{"same-b", {1, 3}},
                                     {"same-c", {1, 3}},
                                     {"same-b", {1, 2}},
                                     {"same-b", {1, 3}},
                                     {"same-c", {2, 3}},
                                     {"same-c", {1, 3}}});
}

TEST_CASE("rewrites only grow cells in the induced order", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    ChaseOptions opts;
    opts.keep_snapshots = true;
    opts.schedule = ChaseSchedule::Descending;
    const ChaseResult r = chase(inst, rules, sims, mfs, opts);
    for (std::size_t i = 0; i + 1 < r.snapshots.size(); ++i)
        CHECK(instance_leq(r.snapshots[i], r.snapshots[i + 1], mfs));
    CHECK(instance_leq(inst, r.final, mfs));
    CHECK(!instance_leq(r.final, inst, mfs));
}

TEST_CASE("a scripted run replays a recorded enforcement sequence", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    SECTION("breadth-first order: merge B pairwise, then C") {
        const ChaseResult r = chase_scripted(inst, rules, sims, mfs,
                                             {{"same-b", 1, 2},
                                              {"same-c", 1, 2},
                                              {"same-b", 1, 3},
                                              {"same-b", 1, 2},
                                              {"same-c", 2, 3},
                                              {"same-c", 1, 2}});
        REQUIRE(r.snapshots.size() == 7);
        const std::vector<std::vector<std::string>> b_states = {
            {"b1", "b2", "b3"},      {"b12", "b12", "b3"},    {"b12", "b12", "b3"},
            {"b123", "b12", "b123"}, {"b123", "b123", "b123"}, {"b123", "b123", "b123"},
            {"b123", "b123", "b123"},
        };
        const std::vector<std::vector<std::string>> c_states = {
            {"c1", "c2", "c3"},      {"c1", "c2", "c3"},      {"c12", "c12", "c3"},
            {"c12", "c12", "c3"},    {"c12", "c12", "c3"},    {"c12", "c123", "c123"},
            {"c123", "c123", "c123"},
        };
        for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
            CHECK(column(r.snapshots[i], "R", 2) == b_states[i]);
            CHECK(column(r.snapshots[i], "R", 3) == c_states[i]);
        }
        CHECK(is_stable(r.final, rules, sims));
    }

    SECTION("depth-first order: finish B entirely before touching C") {
        const ChaseResult r = chase_scripted(inst, rules, sims, mfs,
                                             {{"same-b", 1, 3},
                                              {"same-b", 1, 2},
                                              {"same-b", 1, 3},
                                              {"same-c", 2, 3},
                                              {"same-c", 1, 3},
                                              {"same-c", 1, 2}});
        REQUIRE(r.snapshots.size() == 7);
        CHECK(column(r.snapshots[1], "R", 2) == std::vector<std::string>{"b13", "b2", "b13"});
        CHECK(column(r.snapshots[2], "R", 2) ==
              std::vector<std::string>{"b123", "b123", "b13"});
        CHECK(column(r.snapshots[3], "R", 2) ==
              std::vector<std::string>{"b123", "b123", "b123"});
        CHECK(column(r.snapshots[4], "R", 3) == std::vector<std::string>{"c1", "c23", "c23"});
        CHECK(column(r.snapshots[5], "R", 3) ==
              std::vector<std::string>{"c123", "c23", "c123"});
        CHECK(column(r.snapshots[6], "R", 3) ==
              std::vector<std::string>{"c123", "c123", "c123"});
        CHECK(r.final.canonical_form() ==
              chase(inst, rules, sims, mfs).final.canonical_form());
    }

    SECTION("scripts are validated step by step") {
        CHECK(thrown_code([&] {
                  chase_scripted(inst, rules, sims, mfs, {{"no-such-rule", 1, 2}});
              }) == ErrorCode::DataError);
        // The second rule has nothing to do before any B-values have merged.
        CHECK(thrown_code([&] {
                  chase_scripted(inst, rules, sims, mfs, {{"same-c", 1, 2}});
              }) == ErrorCode::DataError);
    }

    SECTION("pair orientation does not matter") {
        const ChaseResult r = chase_scripted(inst, rules, sims, mfs, {{"same-b", 2, 1}});
        CHECK(column(r.final, "R", 2) == std::vector<std::string>{"b12", "b12", "b3"});
    }
}

TEST_CASE("the step budget stops runaway runs", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    ChaseOptions tight;
    tight.budget = 3;
    CHECK(thrown_code([&] { chase(inst, rules, sims, mfs, tight); }) ==
          ErrorCode::ChaseBudgetExceeded);

    ChaseOptions exact;
    exact.budget = 6;
    CHECK(chase(inst, rules, sims, mfs, exact).steps.size() == 6);
}

TEST_CASE("exploring every order finds a single endpoint when rewrites commute",
          "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    const AllOrdersResult all = chase_all_orders(inst, rules, sims, mfs);
    REQUIRE(all.stable_instances.size() == 1);
    CHECK(all.stable_forms.count(chase(inst, rules, sims, mfs).final.canonical_form()) == 1);
    CHECK(all.nodes_explored > 6); // distinct interleavings pass through distinct states
}

TEST_CASE("order choice can split the endpoint", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::fork_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    const AllOrdersResult all = chase_all_orders(inst, rules, sims, mfs);
    REQUIRE(all.stable_instances.size() == 2);
    std::set<std::vector<std::string>> c_columns;
    for (const Instance& stable : all.stable_instances) {
        CHECK(column(stable, "R", 2) == std::vector<std::string>{"b12", "b12", "b3"});
        c_columns.insert(column(stable, "R", 3));
    }
    // Merging B first kills the b2 ~ b3 trigger; merging C first preserves it.
    CHECK(c_columns == std::set<std::vector<std::string>>{{"c12", "c12", "c3"},
                                                          {"c123", "c123", "c23"}});
}

TEST_CASE("the all-orders oracle rejects oversized inputs", "[chase]") {
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    SECTION("too many tuples") {
        Instance big(fixtures::abc_catalog());
        for (Tid t = 1; t <= 7; ++t)
            big.add_tuple("R", row(t, {"a", "b", "c"}));
        CHECK(thrown_code([&] { chase_all_orders(big, rules, sims, mfs); }) ==
              ErrorCode::OracleBudgetExceeded);
    }
    SECTION("too many rules") {
        std::vector<MatchDependency> many;
        for (int i = 0; i < 5; ++i) {
            many.push_back(rules[0]);
            many.back().name += std::to_string(i);
        }
        CHECK(thrown_code([&] {
                  chase_all_orders(fixtures::three_records(), many, sims, mfs);
              }) == ErrorCode::OracleBudgetExceeded);
    }
    SECTION("state budget") {
        AllOrdersLimits tiny;
        tiny.node_budget = 1;
        CHECK(thrown_code([&] {
                  chase_all_orders(fixtures::three_records(), rules, sims, mfs, tiny);
              }) == ErrorCode::OracleBudgetExceeded);
    }
}

TEST_CASE("trace rendering is line-oriented and exact", "[chase]") {
    const Instance inst = fixtures::three_records();
    const SimilarityFactStore sims = fixtures::chain_sims();
    const std::vector<MatchDependency> rules = fixtures::cascade_rules();
    const MfRegistry mfs = fixtures::bc_registry();

    const ChaseResult r = chase(inst, rules, sims, mfs);
    CHECK(render_trace(r.steps) ==
          "1 same-b [1,2] R.B@1=b1 R.B@2=b2 -> b12\n"
          "2 same-b [1,3] R.B@1=b12 R.B@3=b3 -> b123\n"
          "3 same-b [1,2] R.B@1=b123 R.B@2=b12 -> b123\n"
          "4 same-c [1,2] R.C@1=c1 R.C@2=c2 -> c12\n"
          "5 same-c [1,3] R.C@1=c12 R.C@3=c3 -> c123\n"
          "6 same-c [1,2] R.C@1=c123 R.C@2=c12 -> c123\n");
}

TEST_CASE("context atoms constrain where a rule fires", "[chase]") {
    Instance inst(cite_catalog());
    inst.add_tuple("Author", row(1, {"n1", "120", "250"}));
    inst.add_tuple("Author", row(2, {"n2", "121", "251"}));
    inst.add_tuple("Author", row(3, {"n3", "122", "252"}));
    inst.add_tuple("Paper", row(120, {"title1", "302"}));
    inst.add_tuple("Paper", row(121, {"title3", "300"}));
    inst.add_tuple("Paper", row(122, {"title2", "300"}));

    SimilarityFactStore sims;
    sims.insert("name", Value::atomic("n2"), Value::atomic("n3"));
    sims.insert("name", Value::atomic("n1"), Value::atomic("n2"));

    const std::vector<MatchDependency> rules = {author_block_rule()};
    MfRegistry mfs;
    mfs.add(MatchingFunctionDef::max_numeric("Author#bl"));

    // n1 ~ n2 as well, but their papers sit in different blocks: only the
    // pair whose papers share block 300 qualifies, with its two context
    // papers pinned by the join.
    CHECK(applicable(inst, sims, rules[0]) ==
          std::vector<std::vector<Tid>>{{2, 3, 121, 122}});

    const ChaseResult r = chase(inst, rules, sims, mfs);
    CHECK(r.steps.size() == 1);
    CHECK(column(r.final, "Author", 3) == std::vector<std::string>{"250", "252", "252"});
    CHECK(column(r.final, "Paper", 2) == std::vector<std::string>{"302", "300", "300"});
    CHECK(is_stable(r.final, rules, sims));
}
