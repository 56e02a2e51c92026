#pragma once

// Shared test fixtures: a three-record relation whose rules cascade (similar
// names force equal B-values, equal B-values force equal C-values), plus the
// subset-union table matching function the cascade merges under. Values are
// named after the set of original records they absorbed ("b12" = the merge of
// b1 and b2), which makes expected states readable in assertions.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/mf.hpp"
#include "matchbox/schema.hpp"
#include "matchbox/simstore.hpp"
#include "matchbox/value.hpp"

namespace fixtures {

using namespace matchbox;

inline Tuple row(Tid tid, std::vector<std::string> rest) {
    Tuple t;
    t.tid = tid;
    t.values.push_back(Value::atomic(std::to_string(tid)));
    for (auto& s : rest) t.values.push_back(Value::atomic(std::move(s)));
    return t;
}

// Three-attribute relation with a tuple id up front; similarity domains a/b/c.
inline Catalog abc_catalog() {
    Catalog cat;
    cat.add(RelationSchema("R", {
                                    {"rid", AttributeKind::ReferenceId, false, ""},
                                    {"A", AttributeKind::ShortString, false, "a"},
                                    {"B", AttributeKind::ShortString, false, "b"},
                                    {"C", AttributeKind::ShortString, false, "c"},
                                }));
    return cat;
}

// Table-driven merge over values named "<prefix><sorted indices>" for every
// non-empty subset of {1,2,3}; merging unions the index sets. This is the
// canonical finite semilattice: idempotent, commutative, associative, with
// m(a, b) an upper bound of both.
inline MatchingFunctionDef subset_union_mf(std::string domain, const std::string& prefix) {
    auto name = [&](unsigned mask) {
        std::string s = prefix;
        for (unsigned bit = 0; bit < 3; ++bit)
            if (mask & (1u << bit)) s += static_cast<char>('1' + bit);
        return Value::atomic(s);
    };
    std::map<std::pair<Value, Value>, Value> table;
    for (unsigned s = 1; s < 8; ++s)
        for (unsigned t = 1; t < 8; ++t) table[{name(s), name(t)}] = name(s | t);
    return MatchingFunctionDef::table_driven(std::move(domain), std::move(table));
}

inline MfRegistry bc_registry() {
    MfRegistry mfs;
    mfs.add(subset_union_mf("b", "b"));
    mfs.add(subset_union_mf("c", "c"));
    return mfs;
}

// The cascade: records with similar A-values must agree on B, and records
// with similar B-values must agree on C.
inline std::vector<MatchDependency> cascade_rules() {
    return parse_md_list(R"(
        md same-b:
            R(t1, x1, y1, z1), R(t2, x2, y2, z2), sim(a: x1, x2) -> ident(y1, y2)
        md same-c:
            R(t1, x1, y1, z1), R(t2, x2, y2, z2), sim(b: y1, y2) -> ident(z1, z2)
    )");
}

inline Instance three_records() {
    Instance inst(abc_catalog());
    inst.add_tuple("R", row(1, {"a1", "b1", "c1"}));
    inst.add_tuple("R", row(2, {"a2", "b2", "c2"}));
    inst.add_tuple("R", row(3, {"a3", "b3", "c3"}));
    return inst;
}

// Record 1 is A-similar to both others; the extra b-fact mentions a value
// that never occurs in the data and must be inert.
inline SimilarityFactStore chain_sims() {
    SimilarityFactStore sims;
    sims.insert("a", Value::atomic("a1"), Value::atomic("a2"));
    sims.insert("a", Value::atomic("a1"), Value::atomic("a3"));
    sims.insert("b", Value::atomic("b3"), Value::atomic("b4"));
    return sims;
}

// A-similarity between 1 and 2 but B-similarity between 2 and 3: whichever
// rule goes first erases or preserves the other's trigger, so enforcement
// order shows through in the endpoint.
inline SimilarityFactStore fork_sims() {
    SimilarityFactStore sims;
    sims.insert("a", Value::atomic("a1"), Value::atomic("a2"));
    sims.insert("b", Value::atomic("b2"), Value::atomic("b3"));
    return sims;
}

// One attribute column in tid order, rendered.
inline std::vector<std::string> column(const Instance& inst, const std::string& relation,
                                       std::size_t attr_index) {
    std::vector<std::string> out;
    for (const Tuple& t : inst.tuples(relation)) out.push_back(t.values[attr_index].render());
    return out;
}

// --- Bibliographic fixture -------------------------------------------------
//
// A small publications database: papers, authors, and the authorship table
// tying them together. The authorship rows repeat the author's name and
// affiliation, which lets blocking rules reach from a paper to its authors'
// attributes through plain joins. Both entity relations carry a block-number
// column initialized to the record's own id; the authorship table, which is
// never deduplicated, has none. Authorship rows get their own id column
// (9001..) because every row needs a leading record id distinct from the
// paper and author ids it references.

inline Tuple vrow(Tid tid, std::vector<Value> rest) {
    Tuple t;
    t.tid = tid;
    t.values.push_back(Value::atomic(std::to_string(tid)));
    for (auto& v : rest) t.values.push_back(std::move(v));
    return t;
}

inline Catalog bib_catalog() {
    Catalog cat;
    cat.add(RelationSchema("Paper", {
                                        {"pid", AttributeKind::ReferenceId, false, ""},
                                        {"title", AttributeKind::ShortString, false, "title"},
                                        {"year", AttributeKind::NumericString, false, "year"},
                                        {"cid", AttributeKind::NumericString, false, "cid"},
                                        {"jid", AttributeKind::NumericString, true, "jid"},
                                        {"keyword", AttributeKind::LongText, false, "keyword"},
                                        {"pbl", AttributeKind::BlockNumber, false, ""},
                                    }));
    cat.add(RelationSchema("Author", {
                                         {"aid", AttributeKind::ReferenceId, false, ""},
                                         {"name", AttributeKind::ShortString, false, "name"},
                                         {"aff", AttributeKind::LongText, false, "aff"},
                                         {"abl", AttributeKind::BlockNumber, false, ""},
                                     }));
    cat.add(RelationSchema("PaperAuthor",
                           {
                               {"paid", AttributeKind::ReferenceId, false, ""},
                               {"pid", AttributeKind::NumericString, false, "pid"},
                               {"aid", AttributeKind::NumericString, false, "aid"},
                               {"name", AttributeKind::ShortString, false, "name"},
                               {"aff", AttributeKind::LongText, false, "aff"},
                           }));
    return cat;
}

inline void add_author(Instance& inst, Tid aid, const std::string& name,
                       const std::string& aff) {
    inst.add_tuple("Author", row(aid, {name, aff, std::to_string(aid)}));
}

inline void add_paper(Instance& inst, Tid pid, const std::string& title,
                      const std::string& year, const std::string& cid,
                      const std::string& keyword) {
    inst.add_tuple("Paper", vrow(pid, {Value::atomic(title), Value::atomic(year),
                                       Value::atomic(cid), Value::null(),
                                       Value::atomic(keyword),
                                       Value::atomic(std::to_string(pid))}));
}

inline void add_authorship(Instance& inst, Tid paid, Tid pid, Tid aid,
                           const std::string& name, const std::string& aff) {
    inst.add_tuple("PaperAuthor",
                   row(paid, {std::to_string(pid), std::to_string(aid), name, aff}));
}

// Two pairs of near-duplicate papers (one West-Africa study, one simulation
// environment) whose authors are near-duplicates as well.
inline Instance bib_instance() {
    Instance inst(bib_catalog());
    add_author(inst, 659, "Jean-Pierre Olivier de", "Ecole des Hautes");
    add_author(inst, 2546, "Olivier de Sardan", "Recherche Scientifique");
    add_author(inst, 612, "Matthias Roeckl", "German Aerospace Center");
    add_author(inst, 4994, "Matthias Roeckl", "Institute of Communications");
    add_paper(inst, 123, "Illness entities in West Africa", "1998", "179",
              "West Africa, Illness");
    add_paper(inst, 205, "Illness entities in Africa", "1998", "179", "Africa, Illness");
    add_paper(inst, 769, "DLR Simulation Environment m3", "2007", "146", "Simulation m3");
    add_paper(inst, 195, "DLR Simulation Environment", "2007", "146", "Simulation");
    add_authorship(inst, 9001, 123, 659, "Jean-Pierre Olivier de", "Ecole des Hautes");
    add_authorship(inst, 9002, 205, 2546, "Olivier de Sardan", "Recherche Scientifique");
    add_authorship(inst, 9003, 769, 612, "Matthias Roeckl", "German Aerospace Center");
    add_authorship(inst, 9004, 195, 4994, "Matthias Roeckl", "Institute of Communications");
    return inst;
}

// The four block-rules. The key rules look only at one relation's own
// attributes; the cite rules walk through the authorship table and fire only
// once the records on the far side already share a block.
inline std::vector<MatchDependency> bib_blocking_rules() {
    return parse_md_list(R"(
md paper-key-block: Paper(p1, t1, y, c, _, _, bl1), Paper(p2, t2, y, c, _, _, bl2), sim(title: t1, t2) -> ident(bl1, bl2)
md author-key-block: Author(a1, n1, f1, bl1), Author(a2, n2, f2, bl2), sim(name: n1, n2), sim(aff: f1, f2) -> ident(bl1, bl2)
md paper-cite-block: Paper(p1, t1, _, _, _, _, bl1), Paper(p2, t2, _, _, _, _, bl2), PaperAuthor(pa1, p1, a1, n1, f1), PaperAuthor(pa2, p2, a2, n2, f2), Author(a1, n1, f1, bl3), Author(a2, n2, f2, bl3), sim(title: t1, t2) -> ident(bl1, bl2)
md author-cite-block: Author(a1, n1, f1, bl1), Author(a2, n2, f2, bl2), PaperAuthor(pa1, p1, a1, n1, f1), PaperAuthor(pa2, p2, a2, n2, f2), Paper(p1, _, _, _, _, _, bl3), Paper(p2, _, _, _, _, _, bl3), sim(name: n1, n2) -> ident(bl1, bl2)
)");
}

// The two near-duplicate titles are declared similar; everything else rests
// on equality.
inline SimilarityFactStore bib_title_sims() {
    SimilarityFactStore sims;
    sims.insert("title", Value::atomic("Illness entities in West Africa"),
                Value::atomic("Illness entities in Africa"));
    sims.insert("title", Value::atomic("DLR Simulation Environment m3"),
                Value::atomic("DLR Simulation Environment"));
    return sims;
}

// Title facts plus an affiliation fact for the simulation authors, enough to
// let the author key rule fire on its own.
inline SimilarityFactStore bib_title_aff_sims() {
    SimilarityFactStore sims = bib_title_sims();
    sims.insert("aff", Value::atomic("German Aerospace Center"),
                Value::atomic("Institute of Communications"));
    return sims;
}

// Six-record slice of the bibliographic fixture arranged so the rules can
// only fire in one order: the simulation papers disagree on the year, so the
// paper key rule is dead; the author key rule must merge the two authors
// first, and only then can the cite rule see same-blocked authors and merge
// the papers.
inline Instance bib_cascade_instance() {
    Instance inst(bib_catalog());
    add_author(inst, 612, "Matthias Roeckl", "German Aerospace Center");
    add_author(inst, 4994, "Matthias Roeckl", "Institute of Communications");
    add_paper(inst, 769, "DLR Simulation Environment m3", "2007", "146", "Simulation m3");
    add_paper(inst, 195, "DLR Simulation Environment", "2008", "146", "Simulation");
    add_authorship(inst, 9003, 769, 612, "Matthias Roeckl", "German Aerospace Center");
    add_authorship(inst, 9004, 195, 4994, "Matthias Roeckl", "Institute of Communications");
    return inst;
}

inline std::vector<MatchDependency> bib_cascade_rules() {
    std::vector<MatchDependency> mds = bib_blocking_rules();
    mds.pop_back(); // cascade needs only the key rules and the paper cite rule
    return mds;
}

} // namespace fixtures
