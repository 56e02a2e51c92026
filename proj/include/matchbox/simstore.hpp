#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "matchbox/value.hpp"

namespace matchbox {

// Materialized similarity facts, keyed by attribute-domain tag. The store
// keeps its own reflexive/symmetric closure: inserting (d,a,b) records
// (d,b,a), (d,a,a) and (d,b,b) as well. Null is never similar to anything
// and is rejected at the door.
class SimilarityFactStore {
public:
    void insert(const std::string& domain, const Value& a, const Value& b) {
        if (a.is_null() || b.is_null()) return;
        auto& facts = facts_[domain];
        facts.insert({a, b});
        facts.insert({b, a});
        facts.insert({a, a});
        facts.insert({b, b});
    }

    // Two values are similar when they are equal (reflexivity of ~ extends to
    // every value, recorded or not) or when a fact was materialized.
    bool similar(const std::string& domain, const Value& a, const Value& b) const {
        if (a.is_null() || b.is_null()) return false;
        if (a == b) return true;
        auto it = facts_.find(domain);
        return it != facts_.end() && it->second.count({a, b}) > 0;
    }

    // Whether a non-reflexive fact was explicitly recorded for the pair.
    bool has_fact(const std::string& domain, const Value& a, const Value& b) const {
        auto it = facts_.find(domain);
        return it != facts_.end() && it->second.count({a, b}) > 0;
    }

    const std::map<std::string, std::set<std::pair<Value, Value>>>& facts() const {
        return facts_;
    }

    std::size_t fact_count() const {
        std::size_t n = 0;
        for (const auto& [d, f] : facts_) n += f.size();
        return n;
    }

private:
    std::map<std::string, std::set<std::pair<Value, Value>>> facts_;
};

} // namespace matchbox
