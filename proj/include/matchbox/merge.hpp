#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/analysis.hpp"
#include "matchbox/chase.hpp"
#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/mf.hpp"
#include "matchbox/schema.hpp"
#include "matchbox/simstore.hpp"
#include "matchbox/value.hpp"

namespace matchbox {

// The set M of confirmed duplicate record pairs for one relation. M is
// computed before merging starts and never modified by it — that is what
// makes transitive duplicates (a~b, b~c but no recorded a~c) converge: the
// recorded pairs keep re-firing as their records grow.
struct DuplicatePairSet {
    std::string relation;
    std::set<std::pair<Tid, Tid>> pairs; // normalized smaller-tid-first

    bool contains(Tid a, Tid b) const {
        if (a == b) return true;
        return pairs.count(a < b ? std::pair<Tid, Tid>{a, b} : std::pair<Tid, Tid>{b, a}) > 0;
    }
    std::size_t size() const { return pairs.size(); }

    bool operator==(const DuplicatePairSet&) const = default;
};

// One classifier verdict on a record pair.
struct LabeledPair {
    Tid first = 0;
    Tid second = 0;
    int label = 0;

    bool operator==(const LabeledPair&) const = default;
};

// Collects the positive verdicts into a duplicate-pair set. Pair order does
// not matter and self-pairs add nothing, so both are normalized away.
inline DuplicatePairSet pairs_from_predictions(std::string relation,
                                               const std::vector<LabeledPair>& predictions) {
    DuplicatePairSet m{std::move(relation), {}};
    for (const LabeledPair& p : predictions) {
        if (p.label != 0 && p.label != 1)
            fail(ErrorCode::DataError,
                 "prediction label must be 0 or 1, got " + std::to_string(p.label));
        if (p.label == 1 && p.first != p.second)
            m.pairs.insert(p.first < p.second ? std::pair<Tid, Tid>{p.first, p.second}
                                              : std::pair<Tid, Tid>{p.second, p.first});
    }
    return m;
}

// Key-wise union of two cell values, the default way to reconcile conflicting
// attribute versions: atomics lift to singleton object-sets under `lift_key`,
// and distinct entries under one key are both retained rather than one
// overwriting the other.
inline Value union_mf(const Value& a, const Value& b, const std::string& lift_key) {
    return apply_mf(MatchingFunctionDef::union_object_set("", lift_key), a, b);
}

// Union-case matching functions for every mergeable attribute in the catalog,
// each lifting atomics under its own attribute name. Record ids and block
// numbers are never merged, so they get no function.
inline MfRegistry union_case_registry(const Catalog& catalog) {
    MfRegistry mfs;
    for (const auto& [name, schema] : catalog.all()) {
        const std::optional<std::size_t> block = schema.block_index();
        const auto& attrs = schema.attributes();
        for (std::size_t i = 1; i < attrs.size(); ++i) {
            if (block && i == *block) continue;
            mfs.add(MatchingFunctionDef::union_object_set(attrs[i].domain, attrs[i].name));
        }
    }
    return mfs;
}

// One rule per mergeable attribute: two records whose ids are confirmed
// duplicates must agree on that attribute. The record-id similarity is
// exactly membership in M (materialized as facts over the rid domain), and
// block numbers play no role in merging.
inline std::vector<MatchDependency> merge_rules(const Catalog& catalog,
                                                const std::string& relation) {
    const RelationSchema& schema = catalog.at(relation);
    const auto& attrs = schema.attributes();
    const std::optional<std::size_t> block = schema.block_index();

    const auto atom = [&](const std::string& suffix, std::size_t target) {
        std::string out = relation + "(r" + suffix;
        for (std::size_t j = 1; j < attrs.size(); ++j)
            out += j == target ? ", " + attrs[j].name + suffix : ", _";
        return out + ")";
    };

    std::vector<MatchDependency> rules;
    for (std::size_t i = 1; i < attrs.size(); ++i) {
        if (block && i == *block) continue;
        rules.push_back(parse_md("md merge-" + relation + "-" + attrs[i].name + ": " +
                                 atom("1", i) + ", " + atom("2", i) + ", sim(" +
                                 attrs[0].domain + ": r1, r2) -> ident(" + attrs[i].name +
                                 "1, " + attrs[i].name + "2)"));
    }
    return rules;
}

// Record-id similarity facts encoding membership in M.
inline SimilarityFactStore duplicate_facts(const Instance& inst, const DuplicatePairSet& m) {
    const RelationSchema& schema = inst.catalog().at(m.relation);
    const std::string& domain = schema.attributes()[0].domain;
    SimilarityFactStore sims;
    for (const auto& [a, b] : m.pairs)
        sims.insert(domain, Value::atomic(std::to_string(a)), Value::atomic(std::to_string(b)));
    return sims;
}

// Merge-rule sets read record ids and never write them, so their read set
// and write set cannot overlap; the generic interaction-freeness analysis
// verifies that rather than assuming it.
inline bool is_merge_set_interaction_free(const std::vector<MatchDependency>& merge_mds,
                                          const Catalog& catalog) {
    return is_interaction_free(merge_mds, catalog);
}

struct MergeResult {
    Instance merged;   // the enforcement fixpoint; every record still present
    Instance resolved; // duplicate-free: one survivor per distinct tail
    std::map<std::string, std::vector<Tid>> kept_rids;
    std::vector<ChaseStep> trace;
};

namespace detail {

// A tuple's tail: every value except the record id and the block number.
inline std::vector<Value> tail_of(const Tuple& t, std::optional<std::size_t> block) {
    std::vector<Value> tail;
    for (std::size_t i = 1; i < t.values.size(); ++i)
        if (!(block && i == *block)) tail.push_back(t.values[i]);
    return tail;
}

} // namespace detail

// Enforces the merge rules for M's relation to their fixpoint, then keeps,
// among tuples whose tails came out identical, only the one with the smallest
// record id. Other relations pass through untouched.
inline MergeResult merge(const Instance& inst, const DuplicatePairSet& m,
                         const MfRegistry& mfs, const ChaseOptions& opts = {}) {
    for (const auto& [a, b] : m.pairs)
        for (Tid t : {a, b})
            if (inst.relation_of(t) != m.relation)
                fail(ErrorCode::DataError, "duplicate pair (" + std::to_string(a) + "," +
                                               std::to_string(b) + "): no " + m.relation +
                                               " record with id " + std::to_string(t));

    const std::vector<MatchDependency> rules = merge_rules(inst.catalog(), m.relation);
    const SimilarityFactStore sims = duplicate_facts(inst, m);
    ChaseResult chased = chase(inst, rules, sims, mfs, opts);

    MergeResult result{std::move(chased.final), Instance(inst.catalog()), {},
                       std::move(chased.steps)};
    const std::optional<std::size_t> block = inst.catalog().at(m.relation).block_index();
    for (const auto& [rel, rows] : result.merged.relations()) {
        std::vector<Tid>& kept = result.kept_rids[rel];
        if (rel != m.relation) {
            for (const Tuple& t : rows) {
                result.resolved.add_tuple(rel, t);
                kept.push_back(t.tid);
            }
            continue;
        }
        std::set<Tid> survivors;
        std::map<std::vector<Value>, Tid> by_tail;
        for (const Tuple& t : rows) // rows ascend by tid: first claim wins
            if (by_tail.emplace(detail::tail_of(t, block), t.tid).second)
                survivors.insert(t.tid);
        for (const Tuple& t : rows) {
            if (!survivors.count(t.tid)) continue;
            result.resolved.add_tuple(rel, t);
            kept.push_back(t.tid);
        }
    }
    return result;
}

} // namespace matchbox
