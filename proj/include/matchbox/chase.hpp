#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/analysis.hpp"
#include "matchbox/cq.hpp"
#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/mf.hpp"
#include "matchbox/simstore.hpp"

namespace matchbox {

// The applicability condition of one rule as a query: all atoms satisfied,
// similarity built-ins from the fixed fact store, the two leading tuples
// distinct, and the two identity values not yet identical.
inline ConjunctiveQuery applicability_query(const MatchDependency& md) {
    ConjunctiveQuery q;
    q.name = md.name;
    for (const MdAtom* atom : md.all_atoms())
        q.atoms.push_back(CqAtom{atom->relation, atom->vars, 0});
    for (const SimAtom& sim : md.sims) q.sims.push_back(CqSim{sim.tag, sim.x, sim.y});
    q.distinct = {{md.leading[0].vars[0], md.leading[1].vars[0]},
                  {md.identity.first, md.identity.second}};
    if (q.distinct[0].first == q.distinct[1].first &&
        q.distinct[0].second == q.distinct[1].second)
        q.distinct.pop_back();
    return q;
}

// All places a rule currently fires, as tuple-id assignments in atom order
// (leading pair first, then context). The two leading-tuple orientations of
// one pair are the same enforcement, so only the smaller assignment is kept.
inline std::vector<std::vector<Tid>> applicable(const Instance& inst,
                                                const SimilarityFactStore& sims,
                                                const MatchDependency& md) {
    const ConjunctiveQuery q = applicability_query(md);
    std::vector<std::vector<Tid>> out;
    std::set<std::pair<Tid, Tid>> seen;
    std::vector<CqWitness> hits = evaluate_cq_all(q, inst, sims);
    std::sort(hits.begin(), hits.end(),
              [](const CqWitness& a, const CqWitness& b) { return a.atom_tids < b.atom_tids; });
    for (const CqWitness& hit : hits) {
        std::pair<Tid, Tid> pair{hit.atom_tids[0], hit.atom_tids[1]};
        if (pair.first > pair.second) std::swap(pair.first, pair.second);
        if (seen.insert(pair).second) out.push_back(hit.atom_tids);
    }
    return out;
}

// One enforcement, for the trace: which rule fired where, what the two
// identity cells held, and what they were merged into.
struct ChaseStep {
    std::string md;
    std::vector<Tid> atom_tids;
    std::string attr1;
    std::string attr2;
    Value before1;
    Value before2;
    Value merged;
};

struct EnforceResult {
    Instance next;
    ChaseStep step;
};

namespace detail {

inline std::size_t identity_index(const MdAtom& atom, const std::string& var,
                                  const std::string& rule) {
    for (std::size_t i = 0; i < atom.vars.size(); ++i)
        if (atom.vars[i] == var) return i;
    fail(ErrorCode::UnboundVariable,
         "rule '" + rule + "': identity variable '" + var + "' not in leading atom");
}

} // namespace detail

// Applies one rule to one assignment: both identity cells become the merge of
// their current values. Everything else is untouched; the result is a new
// instance version.
inline EnforceResult enforce_step(const Instance& inst, const MatchDependency& md,
                                  const std::vector<Tid>& assignment,
                                  const MfRegistry& mfs) {
    if (assignment.size() < 2)
        fail(ErrorCode::TidMismatch, "rule '" + md.name + "': assignment needs two tuples");
    const std::string& rel1 = md.leading[0].relation;
    const std::string& rel2 = md.leading[1].relation;
    const std::size_t pos1 = detail::identity_index(md.leading[0], md.identity.first, md.name);
    const std::size_t pos2 = detail::identity_index(md.leading[1], md.identity.second, md.name);
    if (pos1 == 0 || pos2 == 0)
        fail(ErrorCode::SchemaError,
             "rule '" + md.name + "' would rewrite a record id; record ids are immutable");

    const AttributeSpec& spec1 = inst.catalog().at(rel1).attributes()[pos1];
    const AttributeSpec& spec2 = inst.catalog().at(rel2).attributes()[pos2];
    if (spec1.domain != spec2.domain)
        fail(ErrorCode::MissingMatchingFunction,
             "rule '" + md.name + "': identity attributes span domains '" + spec1.domain +
                 "' and '" + spec2.domain + "'");
    const MatchingFunctionDef& mf = mfs.at(spec1.domain);

    const Tuple& t1 = inst.tuple_at(rel1, assignment[0]);
    const Tuple& t2 = inst.tuple_at(rel2, assignment[1]);
    const Value merged = apply_mf(mf, t1.values[pos1], t2.values[pos2]);

    EnforceResult result{inst.with_value(rel1, t1.tid, pos1, merged),
                         ChaseStep{md.name, assignment, attribute_ref(rel1, spec1.name),
                                   attribute_ref(rel2, spec2.name), t1.values[pos1],
                                   t2.values[pos2], merged}};
    result.next.set_value_in_place(rel2, t2.tid, pos2, merged);
    return result;
}

// Next-step selection policies. All of them are deterministic; on an
// order-independent input they reach the same fixpoint by different routes.
enum class ChaseSchedule {
    MdMajor,    // exhaust rules in declaration order, smallest assignment first
    TidMajor,   // globally smallest assignment, rule order breaking ties
    Descending, // globally largest assignment, reversing the exploration
};

struct ChaseOptions {
    std::size_t budget = 10000;
    ChaseSchedule schedule = ChaseSchedule::MdMajor;
    bool keep_snapshots = false; // record the instance after every step
};

struct ChaseResult {
    Instance final;
    std::vector<ChaseStep> steps;
    std::vector<Instance> snapshots; // when requested: initial state, then one per step
};

namespace detail {

struct Candidate {
    std::size_t md_index;
    std::vector<Tid> assignment;
};

inline std::vector<Candidate> all_candidates(const Instance& inst,
                                             const std::vector<MatchDependency>& mds,
                                             const SimilarityFactStore& sims) {
    std::vector<Candidate> all;
    for (std::size_t i = 0; i < mds.size(); ++i)
        for (auto& assignment : applicable(inst, sims, mds[i]))
            all.push_back(Candidate{i, std::move(assignment)});
    return all;
}

inline const Candidate& pick(const std::vector<Candidate>& all, ChaseSchedule schedule) {
    switch (schedule) {
        case ChaseSchedule::MdMajor:
            return all.front(); // grouped by rule, assignments pre-sorted
        case ChaseSchedule::TidMajor:
            return *std::min_element(all.begin(), all.end(),
                                     [](const Candidate& a, const Candidate& b) {
                                         return std::tie(a.assignment, a.md_index) <
                                                std::tie(b.assignment, b.md_index);
                                     });
        case ChaseSchedule::Descending:
            return *std::max_element(all.begin(), all.end(),
                                     [](const Candidate& a, const Candidate& b) {
                                         return std::tie(a.assignment, a.md_index) <
                                                std::tie(b.assignment, b.md_index);
                                     });
    }
    return all.front();
}

} // namespace detail

// Runs rules to a fixpoint under the chosen schedule. Similarity facts are
// the initial ones throughout: rewritten values meet them only through value
// equality.
inline ChaseResult chase(const Instance& inst, const std::vector<MatchDependency>& mds,
                         const SimilarityFactStore& sims, const MfRegistry& mfs,
                         const ChaseOptions& opts = {}) {
    ChaseResult result{inst, {}, {}};
    if (opts.keep_snapshots) result.snapshots.push_back(inst);
    for (;;) {
        const std::vector<detail::Candidate> all =
            detail::all_candidates(result.final, mds, sims);
        if (all.empty()) return result;
        if (result.steps.size() >= opts.budget)
            fail(ErrorCode::ChaseBudgetExceeded,
                 "no fixpoint after " + std::to_string(opts.budget) + " steps");
        const detail::Candidate& chosen = detail::pick(all, opts.schedule);
        EnforceResult enforced =
            enforce_step(result.final, mds[chosen.md_index], chosen.assignment, mfs);
        result.final = std::move(enforced.next);
        result.steps.push_back(std::move(enforced.step));
        if (opts.keep_snapshots) result.snapshots.push_back(result.final);
    }
}

// One entry of a hand-written enforcement schedule: which rule to fire on
// which leading pair (orientation-insensitive).
struct ScriptEntry {
    std::string md;
    Tid first;
    Tid second;
};

// Replays an explicit sequence of enforcements, with snapshots. Fails loudly
// when a scripted step is not applicable at that point.
inline ChaseResult chase_scripted(const Instance& inst,
                                  const std::vector<MatchDependency>& mds,
                                  const SimilarityFactStore& sims, const MfRegistry& mfs,
                                  const std::vector<ScriptEntry>& script) {
    ChaseResult result{inst, {}, {inst}};
    for (std::size_t k = 0; k < script.size(); ++k) {
        const ScriptEntry& entry = script[k];
        const MatchDependency* md = nullptr;
        for (const auto& m : mds)
            if (m.name == entry.md) md = &m;
        if (!md)
            fail(ErrorCode::DataError,
                 "script step " + std::to_string(k + 1) + ": unknown rule '" + entry.md + "'");
        std::optional<std::vector<Tid>> assignment;
        for (auto& a : applicable(result.final, sims, *md)) {
            const bool straight = a[0] == entry.first && a[1] == entry.second;
            const bool flipped = a[0] == entry.second && a[1] == entry.first;
            if (straight || flipped) assignment = std::move(a);
        }
        if (!assignment)
            fail(ErrorCode::DataError, "script step " + std::to_string(k + 1) + ": rule '" +
                                           entry.md + "' is not applicable to (" +
                                           std::to_string(entry.first) + ", " +
                                           std::to_string(entry.second) + ")");
        EnforceResult enforced = enforce_step(result.final, *md, *assignment, mfs);
        result.final = std::move(enforced.next);
        result.steps.push_back(std::move(enforced.step));
        result.snapshots.push_back(result.final);
    }
    return result;
}

inline bool is_stable(const Instance& inst, const std::vector<MatchDependency>& mds,
                      const SimilarityFactStore& sims) {
    for (const MatchDependency& md : mds)
        if (!applicable(inst, sims, md).empty()) return false;
    return true;
}

// Exhaustive exploration of every enforcement order, for small inputs only:
// the oracle behind order-independence claims.
struct AllOrdersLimits {
    std::size_t max_tuples = 6;
    std::size_t max_mds = 4;
    std::size_t node_budget = 100000;
};

struct AllOrdersResult {
    std::vector<Instance> stable_instances; // one per distinct stable endpoint
    std::set<std::string> stable_forms;
    std::size_t nodes_explored = 0;
};

namespace detail {

inline void explore_orders(const Instance& inst, const std::vector<MatchDependency>& mds,
                           const SimilarityFactStore& sims, const MfRegistry& mfs,
                           const AllOrdersLimits& limits, std::set<std::string>& visited,
                           AllOrdersResult& result) {
    if (!visited.insert(inst.canonical_form()).second) return;
    if (++result.nodes_explored > limits.node_budget)
        fail(ErrorCode::OracleBudgetExceeded,
             "order exploration exceeded " + std::to_string(limits.node_budget) + " states");
    const std::vector<Candidate> all = all_candidates(inst, mds, sims);
    if (all.empty()) {
        if (result.stable_forms.insert(inst.canonical_form()).second)
            result.stable_instances.push_back(inst);
        return;
    }
    for (const Candidate& c : all) {
        EnforceResult enforced = enforce_step(inst, mds[c.md_index], c.assignment, mfs);
        explore_orders(enforced.next, mds, sims, mfs, limits, visited, result);
    }
}

} // namespace detail

inline AllOrdersResult chase_all_orders(const Instance& inst,
                                        const std::vector<MatchDependency>& mds,
                                        const SimilarityFactStore& sims,
                                        const MfRegistry& mfs,
                                        const AllOrdersLimits& limits = {}) {
    std::size_t tuples = 0;
    for (const auto& [rel, rows] : inst.relations()) tuples += rows.size();
    if (tuples > limits.max_tuples)
        fail(ErrorCode::OracleBudgetExceeded,
             "instance has " + std::to_string(tuples) + " tuples; the all-orders oracle is " +
                 "capped at " + std::to_string(limits.max_tuples));
    if (mds.size() > limits.max_mds)
        fail(ErrorCode::OracleBudgetExceeded,
             "rule set has " + std::to_string(mds.size()) + " rules; the all-orders oracle " +
                 "is capped at " + std::to_string(limits.max_mds));
    AllOrdersResult result;
    std::set<std::string> visited;
    detail::explore_orders(inst, mds, sims, mfs, limits, visited, result);
    return result;
}

// Line-oriented trace: one enforcement per line, fully determined by the run.
inline std::string render_chase_step(std::size_t index, const ChaseStep& s) {
    std::string line = std::to_string(index) + " " + s.md + " [";
    for (std::size_t i = 0; i < s.atom_tids.size(); ++i) {
        if (i) line += ",";
        line += std::to_string(s.atom_tids[i]);
    }
    line += "] " + s.attr1 + "@" + std::to_string(s.atom_tids[0]) + "=" + s.before1.render() +
            " " + s.attr2 + "@" + std::to_string(s.atom_tids[1]) + "=" + s.before2.render() +
            " -> " + s.merged.render();
    return line;
}

inline std::string render_trace(const std::vector<ChaseStep>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i)
        out += render_chase_step(i + 1, steps[i]) + "\n";
    return out;
}

} // namespace matchbox
