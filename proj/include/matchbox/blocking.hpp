#pragma once

#include <algorithm>
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

// Block-number merge: the larger number wins. Together with distinct initial
// block numbers this keeps block enforcement order-independent.
inline Tid block_mf(Tid i, Tid j) { return std::max(i, j); }

// Per relation: tid -> block number, total over every relation that carries a
// block column. Block numbers are always drawn from the initial rids.
struct BlockAssignment {
    std::map<std::string, std::map<Tid, Tid>> blocks;

    Tid block_of(const std::string& relation, Tid tid) const {
        auto rel = blocks.find(relation);
        if (rel != blocks.end()) {
            auto it = rel->second.find(tid);
            if (it != rel->second.end()) return it->second;
        }
        fail(ErrorCode::DataError,
             "no block recorded for " + relation + " tid " + std::to_string(tid));
    }

    bool operator==(const BlockAssignment&) const = default;
};

namespace detail {

inline Tid parse_block_number(const Value& v, const std::string& relation, Tid tid) {
    if (v.is_atomic()) {
        const std::string& s = v.text();
        if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
            Tid parsed = 0;
            for (char c : s) parsed = parsed * 10 + (c - '0');
            if (parsed > 0) return parsed;
        }
    }
    fail(ErrorCode::DataError, relation + " tid " + std::to_string(tid) +
                                   ": block number '" + v.render() +
                                   "' is not a positive integer");
}

} // namespace detail

// Reads the block column of every relation that has one.
inline BlockAssignment read_blocks(const Instance& inst) {
    BlockAssignment out;
    for (const auto& [rel, rows] : inst.relations()) {
        const std::optional<std::size_t> bl = inst.catalog().at(rel).block_index();
        if (!bl) continue;
        auto& assignment = out.blocks[rel];
        for (const Tuple& t : rows)
            assignment[t.tid] = detail::parse_block_number(t.values[*bl], rel, t.tid);
    }
    return out;
}

// Resets every block column to the record's own id — the state blocking
// starts from, where each record sits alone in its own block.
inline Instance assign_initial_blocks(const Instance& inst) {
    Instance next = inst;
    for (const auto& [rel, rows] : inst.relations()) {
        const std::optional<std::size_t> bl = inst.catalog().at(rel).block_index();
        if (!bl) continue;
        for (const Tuple& t : rows)
            next.set_value_in_place(rel, t.tid, *bl, Value::atomic(std::to_string(t.tid)));
    }
    next.bump_version();
    return next;
}

// A block-rule must rewrite only block numbers, and must never ask for
// similarity (as opposed to equality) between block numbers.
inline void validate_blocking_mds(const std::vector<MatchDependency>& mds,
                                  const Catalog& catalog) {
    for (const MatchDependency& md : mds) {
        for (const std::string& var : {md.identity.first, md.identity.second})
            for (const auto& [atom, index] : detail::positions_of(md, var)) {
                const RelationSchema& schema = catalog.at(atom->relation);
                if (schema.attributes()[index].kind != AttributeKind::BlockNumber)
                    fail(ErrorCode::NonBlockRhs,
                         "rule '" + md.name + "' identifies " +
                             attribute_ref(schema.name(),
                                           schema.attributes()[index].name) +
                             ", which is not a block number");
            }
        for (const SimAtom& sim : md.sims) {
            if (sim.is_equality()) continue; // equal block numbers are a legal join
            for (const std::string& var : {sim.x, sim.y})
                for (const auto& [atom, index] : detail::positions_of(md, var)) {
                    const RelationSchema& schema = catalog.at(atom->relation);
                    if (schema.attributes()[index].kind == AttributeKind::BlockNumber)
                        fail(ErrorCode::BlockSimilarityAtom,
                             "rule '" + md.name + "' asks for similarity on " +
                                 attribute_ref(schema.name(),
                                               schema.attributes()[index].name) +
                                 "; block numbers only support equality");
                }
        }
    }
}

// The larger-number-wins merge, registered for every block domain in the
// catalog.
inline MfRegistry blocking_registry(const Catalog& catalog) {
    MfRegistry mfs;
    for (const auto& [name, schema] : catalog.all())
        if (const auto bl = schema.block_index())
            mfs.add(MatchingFunctionDef::max_numeric(schema.attributes()[*bl].domain));
    return mfs;
}

struct BlockingResult {
    Instance blocked;
    BlockAssignment assignment;
    std::vector<ChaseStep> steps;
};

// Enforces the block-rules to their (unique) fixpoint and reads the blocks
// off the stable instance.
inline BlockingResult apply_blocking(const Instance& inst,
                                     const std::vector<MatchDependency>& mds,
                                     const SimilarityFactStore& sims) {
    validate_blocking_mds(mds, inst.catalog());
    ChaseResult chased = chase(inst, mds, sims, blocking_registry(inst.catalog()));
    BlockAssignment assignment = read_blocks(chased.final);
    return BlockingResult{std::move(chased.final), std::move(assignment),
                          std::move(chased.steps)};
}

// The unordered distinct-record pairs sharing a block within one relation —
// exactly the comparisons the classifier will be asked to make.
struct CandidatePairSet {
    std::string relation;
    std::vector<std::pair<Tid, Tid>> pairs; // first < second, sorted

    std::size_t count() const { return pairs.size(); }

    bool operator==(const CandidatePairSet&) const = default;
};

inline std::vector<CandidatePairSet> candidate_pairs(const BlockAssignment& assignment) {
    std::vector<CandidatePairSet> out;
    for (const auto& [rel, tids] : assignment.blocks) {
        std::map<Tid, std::vector<Tid>> groups;
        for (const auto& [tid, block] : tids) groups[block].push_back(tid);
        CandidatePairSet set{rel, {}};
        for (const auto& [block, members] : groups)
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j)
                    set.pairs.emplace_back(members[i], members[j]);
        std::sort(set.pairs.begin(), set.pairs.end());
        out.push_back(std::move(set));
    }
    return out;
}

// Share of the n*n comparison space that blocking eliminated.
inline double reduction_ratio(std::size_t candidate_count, std::size_t record_count) {
    if (record_count == 0)
        fail(ErrorCode::DataError, "reduction ratio needs at least one record");
    return 1.0 - static_cast<double>(candidate_count) /
                     (static_cast<double>(record_count) * static_cast<double>(record_count));
}

// Key-equality blocking: records of one relation fall into the same block
// exactly when they agree on every key attribute. Null never matches, so a
// record with a missing key value always ends up alone. The group's smallest
// rid names the block.
inline BlockAssignment sb_blocking(const Instance& inst, const std::string& relation,
                                   const std::vector<std::string>& key_attrs) {
    if (key_attrs.empty())
        fail(ErrorCode::SchemaError, "key blocking needs at least one key attribute");
    const RelationSchema& schema = inst.catalog().at(relation);
    std::vector<std::size_t> key_indexes;
    for (const std::string& attr : key_attrs) {
        const std::size_t index = schema.index_of(attr);
        if (schema.attributes()[index].kind == AttributeKind::BlockNumber)
            fail(ErrorCode::SchemaError,
                 "block column '" + attr + "' cannot be a blocking key");
        key_indexes.push_back(index);
    }

    BlockAssignment out;
    auto& assignment = out.blocks[relation];
    std::map<std::vector<Value>, Tid> representative; // key tuple -> smallest rid seen
    for (const Tuple& t : inst.tuples(relation)) {    // ascending tid order
        std::vector<Value> key;
        bool has_null = false;
        for (std::size_t index : key_indexes) {
            if (t.values[index].is_null()) has_null = true;
            key.push_back(t.values[index]);
        }
        if (has_null) {
            assignment[t.tid] = t.tid;
            continue;
        }
        auto [it, inserted] = representative.emplace(std::move(key), t.tid);
        assignment[t.tid] = it->second;
    }
    return out;
}

// Rewrites a key-equality scheme into a single-relation block-rule: keys
// named in `similar` compare by similarity on their attribute domain, the
// remaining keys keep exact equality, and everything else is ignored.
inline MatchDependency keyed_similarity_rule(const Catalog& catalog,
                                             const std::string& relation,
                                             const std::vector<std::string>& key_attrs,
                                             const std::set<std::string>& similar) {
    const RelationSchema& schema = catalog.at(relation);
    if (!schema.block_index())
        fail(ErrorCode::SchemaError,
             "relation '" + relation + "' has no block column to identify");
    const std::set<std::string> keys(key_attrs.begin(), key_attrs.end());
    for (const std::string& attr : similar)
        if (!keys.count(attr))
            fail(ErrorCode::SchemaError,
                 "similarity key '" + attr + "' is not among the blocking keys");

    std::vector<std::string> left{"r1"}, right{"r2"}, sims;
    for (std::size_t i = 1; i < schema.arity(); ++i) {
        const AttributeSpec& attr = schema.attributes()[i];
        if (i == *schema.block_index()) {
            left.push_back("bl1");
            right.push_back("bl2");
        } else if (similar.count(attr.name)) {
            left.push_back(attr.name + "1");
            right.push_back(attr.name + "2");
            sims.push_back("sim(" + attr.domain + ": " + attr.name + "1, " + attr.name +
                           "2)");
        } else if (keys.count(attr.name)) {
            left.push_back(attr.name);
            right.push_back(attr.name);
        } else {
            left.push_back("_");
            right.push_back("_");
        }
    }
    auto atom = [&](const std::vector<std::string>& vars) {
        std::string s = relation + "(";
        for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? ", " : "") + vars[i];
        return s + ")";
    };
    std::string text = "md keyed-" + relation + ": " + atom(left) + ", " + atom(right);
    for (const std::string& s : sims) text += ", " + s;
    text += " -> ident(bl1, bl2)";
    return parse_md(text);
}

// CSV report of a block assignment, sorted by (relation, block, tid).
inline std::string render_blocks_report(const BlockAssignment& assignment) {
    std::string out = "relation,tid,block\n";
    for (const auto& [rel, tids] : assignment.blocks) {
        std::vector<std::pair<Tid, Tid>> rows; // (block, tid)
        for (const auto& [tid, block] : tids) rows.emplace_back(block, tid);
        std::sort(rows.begin(), rows.end());
        for (const auto& [block, tid] : rows)
            out += rel + "," + std::to_string(tid) + "," + std::to_string(block) + "\n";
    }
    return out;
}

} // namespace matchbox
