#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matchbox/error.hpp"

namespace matchbox {

enum class AttributeKind {
    ShortString,   // short free text (names, titles) — jaro-winkler territory
    LongText,      // long free text (affiliations, keywords) — tf-idf territory
    NumericString, // digit-like text (years, foreign ids) — levenshtein/equality
    ReferenceId,   // the tuple id; exactly one, in position 0
    BlockNumber,   // blocking column; at most one, in the last position
};

inline const char* attribute_kind_name(AttributeKind k) {
    switch (k) {
        case AttributeKind::ShortString: return "short-string";
        case AttributeKind::LongText: return "long-text";
        case AttributeKind::NumericString: return "numeric-string";
        case AttributeKind::ReferenceId: return "reference-id";
        case AttributeKind::BlockNumber: return "block-number";
    }
    return "?";
}

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::ShortString;
    bool nullable = false;
    // Attribute-domain tag: values of attributes sharing a tag are comparable
    // (one similarity configuration, one matching function, one sim-fact
    // family). Defaults to the attribute name; block-number attributes get a
    // per-relation tag so blocks never mix across relations.
    std::string domain;
};

class RelationSchema {
public:
    RelationSchema() = default;

    RelationSchema(std::string name, std::vector<AttributeSpec> attributes)
        : name_(std::move(name)), attributes_(std::move(attributes)) {
        validate();
        for (auto& attr : attributes_) {
            if (attr.domain.empty()) {
                attr.domain = attr.kind == AttributeKind::BlockNumber
                                  ? name_ + "#bl"
                                  : attr.name;
            }
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<AttributeSpec>& attributes() const { return attributes_; }
    std::size_t arity() const { return attributes_.size(); }

    std::size_t index_of(const std::string& attr_name) const {
        for (std::size_t i = 0; i < attributes_.size(); ++i)
            if (attributes_[i].name == attr_name) return i;
        fail(ErrorCode::SchemaError,
             "relation '" + name_ + "' has no attribute '" + attr_name + "'");
    }

    bool has_attribute(const std::string& attr_name) const {
        for (const auto& a : attributes_)
            if (a.name == attr_name) return true;
        return false;
    }

    // Index of the block-number column, if the relation has one.
    std::optional<std::size_t> block_index() const {
        if (!attributes_.empty() &&
            attributes_.back().kind == AttributeKind::BlockNumber)
            return attributes_.size() - 1;
        return std::nullopt;
    }

private:
    void validate() const {
        if (attributes_.empty())
            fail(ErrorCode::SchemaError, "relation '" + name_ + "' has no attributes");
        std::size_t ref_count = 0, block_count = 0;
        for (std::size_t i = 0; i < attributes_.size(); ++i) {
            const auto& a = attributes_[i];
            for (std::size_t j = i + 1; j < attributes_.size(); ++j)
                if (attributes_[j].name == a.name)
                    fail(ErrorCode::SchemaError,
                         "duplicate attribute '" + a.name + "' in relation '" + name_ + "'");
            if (a.kind == AttributeKind::ReferenceId) {
                ++ref_count;
                if (i != 0)
                    fail(ErrorCode::SchemaError,
                         "reference-id attribute '" + a.name + "' must be in position 0");
            }
            if (a.kind == AttributeKind::BlockNumber) {
                ++block_count;
                if (i + 1 != attributes_.size())
                    fail(ErrorCode::SchemaError,
                         "block-number attribute '" + a.name + "' must be last");
            }
        }
        if (ref_count != 1)
            fail(ErrorCode::SchemaError,
                 "relation '" + name_ + "' needs exactly one reference-id attribute");
        if (block_count > 1)
            fail(ErrorCode::SchemaError,
                 "relation '" + name_ + "' has more than one block-number attribute");
    }

    std::string name_;
    std::vector<AttributeSpec> attributes_;
};

// All relation schemas of one pipeline, by relation name.
class Catalog {
public:
    Catalog() = default;

    void add(RelationSchema schema) {
        const std::string key = schema.name();
        if (schemas_.count(key))
            fail(ErrorCode::SchemaError, "duplicate relation '" + key + "'");
        schemas_.emplace(key, std::move(schema));
    }

    bool has(const std::string& relation) const { return schemas_.count(relation) > 0; }

    const RelationSchema& at(const std::string& relation) const {
        auto it = schemas_.find(relation);
        if (it == schemas_.end())
            fail(ErrorCode::SchemaError, "unknown relation '" + relation + "'");
        return it->second;
    }

    const std::map<std::string, RelationSchema>& all() const { return schemas_; }

private:
    std::map<std::string, RelationSchema> schemas_;
};

} // namespace matchbox
