#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/simstore.hpp"
#include "matchbox/value.hpp"

namespace matchbox {

enum class MfKind { MaxNumeric, UnionObjectSet, TableDriven };

// An idempotent/commutative/associative binary merge on one attribute domain.
// The induced order a <= a' iff m(a,a') = a' is what makes chase sequences
// grow monotonically.
struct MatchingFunctionDef {
    std::string domain_tag;
    MfKind kind = MfKind::MaxNumeric;
    // TableDriven: explicit pair -> value mapping. Lookups try both argument
    // orders; the diagonal is implicit (m(a,a) = a).
    std::map<std::pair<Value, Value>, Value> table;
    // UnionObjectSet: key used to lift an Atomic operand into a singleton
    // object-set. Call sites dealing with record attributes set this to the
    // attribute's own name.
    std::string lift_key;

    static MatchingFunctionDef max_numeric(std::string domain) {
        MatchingFunctionDef mf;
        mf.domain_tag = std::move(domain);
        mf.kind = MfKind::MaxNumeric;
        return mf;
    }
    static MatchingFunctionDef union_object_set(std::string domain, std::string lift) {
        MatchingFunctionDef mf;
        mf.domain_tag = std::move(domain);
        mf.kind = MfKind::UnionObjectSet;
        mf.lift_key = std::move(lift);
        return mf;
    }
    static MatchingFunctionDef table_driven(
        std::string domain, std::map<std::pair<Value, Value>, Value> table) {
        MatchingFunctionDef mf;
        mf.domain_tag = std::move(domain);
        mf.kind = MfKind::TableDriven;
        mf.table = std::move(table);
        return mf;
    }
};

namespace detail {

// Total order behind the max-numeric merge: numeric text compares by value,
// non-numeric text compares lexicographically, and every numeric value sorts
// below every non-numeric one. Consistency of this order is what makes the
// selection associative on mixed domains.
inline bool numeric_less(const Value& a, const Value& b) {
    auto parse = [](const Value& v) -> std::optional<long long> {
        if (!v.is_atomic()) return std::nullopt;
        const std::string& s = v.text();
        if (s.empty() || s.size() > 18) return std::nullopt;
        std::size_t i = s[0] == '-' ? 1 : 0;
        if (i == s.size()) return std::nullopt;
        long long value = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            value = value * 10 + (s[i] - '0');
        }
        return s[0] == '-' ? -value : value;
    };
    const auto na = parse(a), nb = parse(b);
    if (na && nb) {
        if (*na != *nb) return *na < *nb;
        return a < b; // equal numbers, distinct spellings: break ties stably
    }
    if (na != nb) return na.has_value(); // numerics below non-numerics
    return a < b;
}

inline ObjectSet lift_to_object_set(const Value& v, const std::string& key) {
    if (v.is_object_set()) return v.entries();
    ObjectSet o;
    if (v.is_atomic()) o[key.empty() ? "value" : key].insert(v.text());
    return o; // Null lifts to the empty object-set
}

} // namespace detail

// Applies a matching function; returns nullopt when a table-driven function
// has no entry for the pair. Null is the bottom element for every kind.
inline std::optional<Value> try_apply_mf(const MatchingFunctionDef& mf, const Value& a,
                                         const Value& b) {
    if (a == b) return a;
    if (a.is_null()) return b;
    if (b.is_null()) return a;
    switch (mf.kind) {
        case MfKind::MaxNumeric:
            return detail::numeric_less(a, b) ? b : a;
        case MfKind::UnionObjectSet: {
            ObjectSet merged = detail::lift_to_object_set(a, mf.lift_key);
            for (const auto& [key, vals] : detail::lift_to_object_set(b, mf.lift_key))
                merged[key].insert(vals.begin(), vals.end());
            return Value::object_set(std::move(merged));
        }
        case MfKind::TableDriven: {
            auto it = mf.table.find({a, b});
            if (it == mf.table.end()) it = mf.table.find({b, a});
            if (it == mf.table.end()) return std::nullopt;
            return it->second;
        }
    }
    return std::nullopt;
}

inline Value apply_mf(const MatchingFunctionDef& mf, const Value& a, const Value& b) {
    auto merged = try_apply_mf(mf, a, b);
    if (!merged)
        fail(ErrorCode::MissingMatchingFunction,
             "table for domain '" + mf.domain_tag + "' has no entry for (" + a.render() +
                 ", " + b.render() + ")");
    return *merged;
}

// a <= a' in the induced order iff m(a,a') = a'. Null is below everything.
inline bool value_leq(const MatchingFunctionDef& mf, const Value& a, const Value& b) {
    if (a == b) return true;
    if (a.is_null()) return true;
    auto merged = try_apply_mf(mf, a, b);
    return merged && *merged == b;
}

// Matching functions by attribute-domain tag.
class MfRegistry {
public:
    void add(MatchingFunctionDef mf) {
        const std::string key = mf.domain_tag;
        registry_[key] = std::move(mf);
    }

    const MatchingFunctionDef* find(const std::string& domain) const {
        auto it = registry_.find(domain);
        return it == registry_.end() ? nullptr : &it->second;
    }

    const MatchingFunctionDef& at(const std::string& domain) const {
        const MatchingFunctionDef* mf = find(domain);
        if (!mf)
            fail(ErrorCode::MissingMatchingFunction,
                 "no matching function registered for domain '" + domain + "'");
        return *mf;
    }

    const std::map<std::string, MatchingFunctionDef>& all() const { return registry_; }

private:
    std::map<std::string, MatchingFunctionDef> registry_;
};

// Closure of a sample domain under one matching function. Grows until stable;
// errors out when the closure (or the law-check work implied by it) exceeds
// the budget, which guards against runaway user-supplied tables.
inline std::set<Value> mf_closure(const MatchingFunctionDef& mf,
                                  const std::set<Value>& sample,
                                  std::size_t budget = 10000) {
    std::set<Value> closure;
    for (const auto& v : sample)
        if (!v.is_null()) closure.insert(v);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Value> snapshot(closure.begin(), closure.end());
        for (std::size_t i = 0; i < snapshot.size(); ++i) {
            for (std::size_t j = i; j < snapshot.size(); ++j) {
                auto merged = try_apply_mf(mf, snapshot[i], snapshot[j]);
                if (merged && closure.insert(*merged).second) {
                    grew = true;
                    if (closure.size() > budget)
                        fail(ErrorCode::ClosureBudgetExceeded,
                             "closure of domain '" + mf.domain_tag + "' exceeded " +
                                 std::to_string(budget) + " values");
                }
            }
        }
    }
    return closure;
}

// Verifies the semilattice laws pointwise on the closure of sample_domain:
// idempotence, commutativity, associativity, and a <= m(a,a') for all pairs.
// A table that is not total on its own closure fails the check.
inline bool check_mf_laws(const MatchingFunctionDef& mf, const std::set<Value>& sample_domain,
                          std::size_t budget = 10000) {
    const std::set<Value> closure_set = mf_closure(mf, sample_domain, budget);
    const std::vector<Value> closure(closure_set.begin(), closure_set.end());
    const std::size_t n = closure.size();
    if (n * n * n > 50'000'000ULL)
        fail(ErrorCode::ClosureBudgetExceeded,
             "associativity check over " + std::to_string(n) + " values is out of budget");
    for (const auto& a : closure) {
        auto aa = try_apply_mf(mf, a, a);
        if (!aa || *aa != a) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto ab = try_apply_mf(mf, closure[i], closure[j]);
            auto ba = try_apply_mf(mf, closure[j], closure[i]);
            if (!ab || !ba || *ab != *ba) return false;
            // upper bound: a <= m(a, b)
            auto bound = try_apply_mf(mf, closure[i], *ab);
            if (!bound || *bound != *ab) return false;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                auto ab = try_apply_mf(mf, closure[i], closure[j]);
                if (!ab) return false;
                auto ab_c = try_apply_mf(mf, *ab, closure[k]);
                auto bc = try_apply_mf(mf, closure[j], closure[k]);
                if (!bc) return false;
                auto a_bc = try_apply_mf(mf, closure[i], *bc);
                if (!ab_c || !a_bc || *ab_c != *a_bc) return false;
            }
    return true;
}

// Similarity preservation: a ~ a' implies a ~ m(a', a'') for every a'' in the
// closure, with ~ read from the fact store over the function's domain tag.
inline bool is_similarity_preserving(const MatchingFunctionDef& mf,
                                     const SimilarityFactStore& sims,
                                     const std::set<Value>& sample_domain,
                                     std::size_t budget = 10000) {
    const std::set<Value> closure_set = mf_closure(mf, sample_domain, budget);
    const std::vector<Value> closure(closure_set.begin(), closure_set.end());
    for (const auto& a : closure)
        for (const auto& a1 : closure) {
            if (!sims.similar(mf.domain_tag, a, a1)) continue;
            for (const auto& a2 : closure) {
                auto merged = try_apply_mf(mf, a1, a2);
                if (!merged) return false;
                if (!sims.similar(mf.domain_tag, a, *merged)) return false;
            }
        }
    return true;
}

// Instance order: d1 <= d2 iff every cell of d1 is <= the matching cell of d2
// under that attribute domain's matching function. Attributes without a
// registered function must be equal (or Null in d1).
inline bool instance_leq(const Instance& d1, const Instance& d2, const MfRegistry& mfs) {
    if (d1.relations().size() != d2.relations().size())
        fail(ErrorCode::TidMismatch, "instances have different relations");
    for (const auto& [rel, rows1] : d1.relations()) {
        const auto& rows2 = d2.tuples(rel);
        if (rows1.size() != rows2.size())
            fail(ErrorCode::TidMismatch, "relation '" + rel + "' differs in tuple count");
        const RelationSchema& schema = d1.catalog().at(rel);
        for (std::size_t r = 0; r < rows1.size(); ++r) {
            if (rows1[r].tid != rows2[r].tid)
                fail(ErrorCode::TidMismatch,
                     "relation '" + rel + "' tids disagree at row " + std::to_string(r));
            for (std::size_t i = 0; i < rows1[r].values.size(); ++i) {
                const Value& a = rows1[r].values[i];
                const Value& b = rows2[r].values[i];
                if (a == b) continue;
                const MatchingFunctionDef* mf = mfs.find(schema.attributes()[i].domain);
                if (!mf) {
                    if (!a.is_null()) return false;
                    continue;
                }
                if (!value_leq(*mf, a, b)) return false;
            }
        }
    }
    return true;
}

} // namespace matchbox
