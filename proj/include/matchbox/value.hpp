#pragma once

#include <compare>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>

namespace matchbox {

// An object-set value: keys map to one or more plain-text entries. A key with
// more than one entry is a multi-valued field produced by a conflicting merge;
// both versions are retained.
using ObjectSet = std::map<std::string, std::set<std::string>>;

// A cell value. Atomic carries plain text (numbers included — the pipeline
// works on textual records), ObjectSet carries structured merged values, and
// Null marks an absent cell of a nullable attribute.
class Value {
public:
    Value() : rep_(NullRep{}) {}

    static Value atomic(std::string text) { return Value(AtomicRep{std::move(text)}); }
    static Value object_set(ObjectSet entries) { return Value(std::move(entries)); }
    static Value null() { return Value(); }

    bool is_atomic() const { return std::holds_alternative<AtomicRep>(rep_); }
    bool is_object_set() const { return std::holds_alternative<ObjectSet>(rep_); }
    bool is_null() const { return std::holds_alternative<NullRep>(rep_); }

    const std::string& text() const { return std::get<AtomicRep>(rep_).text; }
    const ObjectSet& entries() const { return std::get<ObjectSet>(rep_); }

    bool operator==(const Value& other) const = default;
    auto operator<=>(const Value& other) const = default;

    // Canonical single-line rendering; also the CSV cell form for object-sets
    // (`key=v;key=v`, multi-valued entries as `key=v1|v2`, sorted by key).
    std::string render() const {
        if (is_null()) return "";
        if (is_atomic()) return text();
        std::ostringstream out;
        bool first_key = true;
        for (const auto& [key, vals] : entries()) {
            if (!first_key) out << ';';
            first_key = false;
            out << key << '=';
            bool first_val = true;
            for (const auto& v : vals) {
                if (!first_val) out << '|';
                first_val = false;
                out << v;
            }
        }
        return out.str();
    }

private:
    struct AtomicRep {
        std::string text;
        bool operator==(const AtomicRep&) const = default;
        auto operator<=>(const AtomicRep&) const = default;
    };
    struct NullRep {
        bool operator==(const NullRep&) const = default;
        auto operator<=>(const NullRep&) const = default;
    };

    explicit Value(AtomicRep a) : rep_(std::move(a)) {}
    explicit Value(ObjectSet o) : rep_(std::move(o)) {}

    std::variant<NullRep, AtomicRep, ObjectSet> rep_;
};

inline Value atomic(std::string text) { return Value::atomic(std::move(text)); }

} // namespace matchbox
