#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "matchbox/analysis.hpp"
#include "matchbox/cq.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/simstore.hpp"

namespace matchbox {

// One ordered way two rules can interfere: `writer` merges values at
// `attribute` while `reader` tests that attribute on its LHS. Each variant
// query pins one concrete pair of atoms — a leading atom of the writer and an
// atom of the reader carrying the attribute — to the same tuple; the case
// fires when any variant is satisfiable.
struct InteractionCase {
    std::string writer;
    std::string reader;
    std::string attribute;
    std::vector<ConjunctiveQuery> variants;
};

namespace detail {

// Union-find over variable names; merged classes keep a writer-side variable
// (one without the rename suffix) as representative when possible.
class VarUnifier {
public:
    std::string find(const std::string& v) {
        auto it = parent_.find(v);
        if (it == parent_.end()) return v;
        std::string root = find(it->second);
        parent_[v] = root;
        return root;
    }

    void unite(const std::string& a, const std::string& b) {
        std::string ra = find(a);
        std::string rb = find(b);
        if (ra == rb) return;
        const bool a_renamed = ra.find('~') != std::string::npos;
        const bool b_renamed = rb.find('~') != std::string::npos;
        if (a_renamed != b_renamed ? a_renamed : rb < ra) std::swap(ra, rb);
        parent_[rb] = ra;
    }

private:
    std::map<std::string, std::string> parent_;
};

inline std::string sfai_rename(const std::string& v) { return v + "~2"; }

// Assembles the body LHS(writer) ∧ LHS(reader) with the writer's leading atom
// `slot` and the reader's atom `shared_atom` identified variable-by-variable.
// Both rules' leading pairs must bind distinct tuples. Returns nullopt when
// the identification itself collapses a required-distinct pair.
inline std::optional<ConjunctiveQuery> build_sfai_variant(const MatchDependency& writer,
                                                          std::size_t slot,
                                                          const MatchDependency& reader,
                                                          std::size_t shared_atom,
                                                          const std::string& name) {
    const std::vector<const MdAtom*> writer_atoms = writer.all_atoms();
    const std::vector<const MdAtom*> reader_atoms = reader.all_atoms();

    VarUnifier uf;
    const MdAtom& wa = *writer_atoms[slot];
    const MdAtom& ra = *reader_atoms[shared_atom];
    for (std::size_t i = 0; i < wa.vars.size(); ++i)
        uf.unite(wa.vars[i], sfai_rename(ra.vars[i]));

    ConjunctiveQuery q;
    q.name = name;
    for (std::size_t i = 0; i < writer_atoms.size(); ++i) {
        CqAtom atom;
        atom.relation = writer_atoms[i]->relation;
        atom.side = i == slot ? 2 : 0;
        for (const auto& v : writer_atoms[i]->vars) atom.vars.push_back(uf.find(v));
        q.atoms.push_back(std::move(atom));
    }
    for (std::size_t i = 0; i < reader_atoms.size(); ++i) {
        if (i == shared_atom) continue;
        CqAtom atom;
        atom.relation = reader_atoms[i]->relation;
        atom.side = 1;
        for (const auto& v : reader_atoms[i]->vars)
            atom.vars.push_back(uf.find(sfai_rename(v)));
        q.atoms.push_back(std::move(atom));
    }

    for (const SimAtom& sim : writer.sims)
        q.sims.push_back(CqSim{sim.tag, uf.find(sim.x), uf.find(sim.y)});
    for (const SimAtom& sim : reader.sims)
        q.sims.push_back(
            CqSim{sim.tag, uf.find(sfai_rename(sim.x)), uf.find(sfai_rename(sim.y))});
    std::sort(q.sims.begin(), q.sims.end(), [](const CqSim& a, const CqSim& b) {
        return std::tie(a.tag, a.x, a.y) < std::tie(b.tag, b.x, b.y);
    });
    q.sims.erase(std::unique(q.sims.begin(), q.sims.end()), q.sims.end());

    bool satisfiable = true;
    auto add_distinct = [&](const std::string& a, const std::string& b) {
        std::string fa = uf.find(a);
        std::string fb = uf.find(b);
        if (fa == fb) {
            satisfiable = false;
            return;
        }
        if (fb < fa) std::swap(fa, fb);
        q.distinct.emplace_back(fa, fb);
    };
    add_distinct(writer.leading[0].vars[0], writer.leading[1].vars[0]);
    add_distinct(sfai_rename(reader.leading[0].vars[0]),
                 sfai_rename(reader.leading[1].vars[0]));
    if (!satisfiable) return std::nullopt;
    std::sort(q.distinct.begin(), q.distinct.end());
    q.distinct.erase(std::unique(q.distinct.begin(), q.distinct.end()), q.distinct.end());
    return q;
}

inline InteractionCase build_interaction_case(const MatchDependency& writer,
                                              const MDAnalysis& writer_analysis,
                                              const MatchDependency& reader,
                                              const std::string& attribute,
                                              const Catalog& catalog) {
    InteractionCase c;
    c.writer = writer.name;
    c.reader = reader.name;
    c.attribute = attribute;

    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < 2; ++s)
        if (writer_analysis.arhs[s] == attribute) slots.push_back(s);

    const std::vector<const MdAtom*> reader_atoms = reader.all_atoms();
    std::set<std::size_t> shared_atoms;
    for (const SimAtom& sim : reader.sims) {
        for (const std::string* v : {&sim.x, &sim.y}) {
            for (const auto& [atom, index] : positions_of(reader, *v)) {
                const RelationSchema& schema = catalog.at(atom->relation);
                if (attribute_ref(atom->relation, schema.attributes()[index].name) !=
                    attribute)
                    continue;
                for (std::size_t i = 0; i < reader_atoms.size(); ++i)
                    if (reader_atoms[i] == atom) shared_atoms.insert(i);
            }
        }
    }

    for (std::size_t slot : slots) {
        for (std::size_t atom : shared_atoms) {
            const std::string name = "Q(" + writer.name + "," + reader.name + ")@" +
                                     attribute + "#" +
                                     std::to_string(c.variants.size() + 1);
            if (auto q = build_sfai_variant(writer, slot, reader, atom, name))
                c.variants.push_back(std::move(*q));
        }
    }
    return c;
}

} // namespace detail

// One interaction case per ordered rule pair (writer, reader) and attribute
// the writer's identity atom shares with the reader's similarity-tested
// attributes. An empty result certifies interaction freedom.
inline std::vector<InteractionCase> build_sfai_queries(const std::vector<MatchDependency>& mds,
                                                       const Catalog& catalog) {
    const std::vector<MDAnalysis> analyses = analyze_all(mds, catalog);
    std::vector<InteractionCase> cases;
    for (std::size_t w = 0; w < mds.size(); ++w) {
        for (std::size_t r = 0; r < mds.size(); ++r) {
            std::set<std::string> shared;
            for (const std::string& ref : analyses[w].arhs)
                if (analyses[r].alhs.count(ref)) shared.insert(ref);
            for (const std::string& attribute : shared)
                cases.push_back(detail::build_interaction_case(mds[w], analyses[w], mds[r],
                                                               attribute, catalog));
        }
    }
    return cases;
}

// A violated interaction case: the two sub-instances S1 (satisfying the
// writer's LHS) and S2 (satisfying the reader's) overlap on the tuple whose
// attribute the writer rewrites and the reader reads.
struct SfaiWitness {
    std::string writer;
    std::string reader;
    std::string attribute;
    std::string query;
    std::vector<Tid> writer_side;
    std::vector<Tid> reader_side;
    CqWitness assignment;
};

struct SfaiVerdict {
    bool is_sfai = true;
    std::vector<SfaiWitness> witnesses; // one per violated case
};

// Semantic order-independence check: similarity-free-attribute interaction.
// Holds when no interaction-case query is satisfiable over the instance and
// its initial similarity facts.
inline SfaiVerdict is_sfai(const std::vector<MatchDependency>& mds, const Instance& inst,
                           const SimilarityFactStore& sims) {
    SfaiVerdict verdict;
    for (const InteractionCase& c : build_sfai_queries(mds, inst.catalog())) {
        for (const ConjunctiveQuery& q : c.variants) {
            auto hit = evaluate_cq(q, inst, sims);
            if (!hit) continue;
            SfaiWitness w;
            w.writer = c.writer;
            w.reader = c.reader;
            w.attribute = c.attribute;
            w.query = q.name;
            for (std::size_t i = 0; i < q.atoms.size(); ++i) {
                if (q.atoms[i].side != 1) w.writer_side.push_back(hit->atom_tids[i]);
                if (q.atoms[i].side != 0) w.reader_side.push_back(hit->atom_tids[i]);
            }
            for (auto* side : {&w.writer_side, &w.reader_side}) {
                std::sort(side->begin(), side->end());
                side->erase(std::unique(side->begin(), side->end()), side->end());
            }
            w.assignment = std::move(*hit);
            verdict.is_sfai = false;
            verdict.witnesses.push_back(std::move(w));
            break;
        }
    }
    return verdict;
}

} // namespace matchbox
