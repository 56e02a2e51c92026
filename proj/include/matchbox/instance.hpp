#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/schema.hpp"
#include "matchbox/value.hpp"

namespace matchbox {

using Tid = std::int64_t;

// One identified row. values[0] mirrors the tid as an atomic value so that
// positional variable binding (rule atoms put the tid variable first) works
// uniformly.
struct Tuple {
    Tid tid = 0;
    std::vector<Value> values;

    bool operator==(const Tuple&) const = default;
};

// A database snapshot: relation name → tuples (kept sorted by tid). Instances
// are immutable in spirit — enforcement steps copy and bump `version` — which
// is what makes the all-orders oracle and trace replay possible.
class Instance {
public:
    Instance() = default;
    explicit Instance(Catalog catalog) : catalog_(std::move(catalog)) {}

    const Catalog& catalog() const { return catalog_; }
    std::uint64_t version() const { return version_; }

    void add_tuple(const std::string& relation, Tuple tuple) {
        const RelationSchema& schema = catalog_.at(relation);
        if (tuple.values.size() != schema.arity())
            fail(ErrorCode::MalformedRow,
                 relation + ": tuple arity " + std::to_string(tuple.values.size()) +
                     " vs schema arity " + std::to_string(schema.arity()));
        if (tuple.tid <= 0)
            fail(ErrorCode::MalformedRow, relation + ": tid must be positive");
        if (tid_index_.count(tuple.tid))
            fail(ErrorCode::DuplicateTid,
                 relation + ": tid " + std::to_string(tuple.tid) + " already present");
        for (std::size_t i = 0; i < schema.arity(); ++i)
            if (tuple.values[i].is_null() && !schema.attributes()[i].nullable)
                fail(ErrorCode::NonNullableNull,
                     relation + "." + schema.attributes()[i].name + " is not nullable (tid " +
                         std::to_string(tuple.tid) + ")");
        tid_index_.emplace(tuple.tid, relation);
        auto& rows = relations_[relation];
        auto it = rows.begin();
        while (it != rows.end() && it->tid < tuple.tid) ++it;
        rows.insert(it, std::move(tuple));
    }

    bool has_relation(const std::string& relation) const {
        return relations_.count(relation) > 0;
    }

    const std::vector<Tuple>& tuples(const std::string& relation) const {
        static const std::vector<Tuple> empty;
        auto it = relations_.find(relation);
        return it == relations_.end() ? empty : it->second;
    }

    const std::map<std::string, std::vector<Tuple>>& relations() const { return relations_; }

    const Tuple& tuple_at(const std::string& relation, Tid tid) const {
        for (const auto& t : tuples(relation))
            if (t.tid == tid) return t;
        fail(ErrorCode::TidMismatch,
             relation + " has no tuple with tid " + std::to_string(tid));
    }

    // Relation a tid belongs to, or empty if unknown.
    std::string relation_of(Tid tid) const {
        auto it = tid_index_.find(tid);
        return it == tid_index_.end() ? std::string() : it->second;
    }

    // Returns a copy with one cell replaced and the version bumped.
    Instance with_value(const std::string& relation, Tid tid, std::size_t attr_index,
                        Value v) const {
        Instance next = *this;
        next.set_value_in_place(relation, tid, attr_index, std::move(v));
        next.version_ = version_ + 1;
        return next;
    }

    // In-place cell update for builders that batch several updates into one
    // new version (the chase uses this on a fresh copy).
    void set_value_in_place(const std::string& relation, Tid tid, std::size_t attr_index,
                            Value v) {
        auto it = relations_.find(relation);
        if (it == relations_.end())
            fail(ErrorCode::TidMismatch, "no relation '" + relation + "'");
        for (auto& t : it->second) {
            if (t.tid == tid) {
                if (attr_index >= t.values.size())
                    fail(ErrorCode::SchemaError, "attribute index out of range");
                t.values[attr_index] = std::move(v);
                return;
            }
        }
        fail(ErrorCode::TidMismatch,
             relation + " has no tuple with tid " + std::to_string(tid));
    }

    void bump_version() { ++version_; }

    // Structural equality of the data (version is bookkeeping, not data).
    bool same_data(const Instance& other) const { return relations_ == other.relations_; }

    // Canonical one-line-per-tuple serialization; used for instance-set
    // deduplication in the all-orders oracle and for test comparisons.
    std::string canonical_form() const {
        std::string out;
        for (const auto& [rel, rows] : relations_) {
            for (const auto& t : rows) {
                out += rel;
                out += '(';
                out += std::to_string(t.tid);
                for (std::size_t i = 1; i < t.values.size(); ++i) {
                    out += ',';
                    out += t.values[i].is_null() ? "\x01" : t.values[i].render();
                }
                out += ")\n";
            }
        }
        return out;
    }

private:
    Catalog catalog_;
    std::map<std::string, std::vector<Tuple>> relations_;
    std::map<Tid, std::string> tid_index_;
    std::uint64_t version_ = 0;
};

// Active domain: every non-null value appearing in the instance, grouped by
// attribute-domain tag.
inline std::map<std::string, std::set<Value>> active_domain(const Instance& inst) {
    std::map<std::string, std::set<Value>> domains;
    for (const auto& [rel, rows] : inst.relations()) {
        const RelationSchema& schema = inst.catalog().at(rel);
        for (const auto& t : rows) {
            for (std::size_t i = 0; i < t.values.size(); ++i) {
                if (t.values[i].is_null()) continue;
                domains[schema.attributes()[i].domain].insert(t.values[i]);
            }
        }
    }
    return domains;
}

} // namespace matchbox
