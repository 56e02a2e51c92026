#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/md.hpp"
#include "matchbox/schema.hpp"

namespace matchbox {

// Attribute footprint of one rule: which relation.attribute positions its
// condition side reads (alhs) and which pair its identity side writes (arhs).
// Equality joins count into alhs alongside explicit similarity atoms, since
// a value overwrite can break an equality just as it can break a similarity.
struct MDAnalysis {
    std::string name;
    std::set<std::string> alhs;
    std::array<std::string, 2> arhs;

    bool operator==(const MDAnalysis&) const = default;
};

inline std::string attribute_ref(const std::string& relation, const std::string& attr) {
    return relation + "." + attr;
}

namespace detail {

// Every (relation, attribute-index) position at which `var` occurs across the
// rule's relational atoms.
inline std::vector<std::pair<const MdAtom*, std::size_t>> positions_of(
    const MatchDependency& md, const std::string& var) {
    std::vector<std::pair<const MdAtom*, std::size_t>> hits;
    for (const MdAtom* atom : md.all_atoms())
        for (std::size_t i = 0; i < atom->vars.size(); ++i)
            if (atom->vars[i] == var) hits.emplace_back(atom, i);
    return hits;
}

inline const RelationSchema& schema_for(const Catalog& catalog, const MdAtom& atom,
                                        const std::string& rule) {
    if (!catalog.has(atom.relation))
        fail(ErrorCode::SchemaError,
             "rule '" + rule + "' references unknown relation '" + atom.relation + "'");
    const RelationSchema& schema = catalog.at(atom.relation);
    if (schema.arity() != atom.vars.size())
        fail(ErrorCode::SchemaError, "rule '" + rule + "' uses " + atom.relation + "/" +
                                         std::to_string(atom.vars.size()) +
                                         " but the schema has arity " +
                                         std::to_string(schema.arity()));
    return schema;
}

} // namespace detail

// Computes the attribute footprint, validating the rule against the catalog:
// relations must exist, atom arities must match, and explicit similarity
// atoms must range over positions of their tag's domain.
inline MDAnalysis analyze_md(const MatchDependency& md, const Catalog& catalog) {
    for (const MdAtom* atom : md.all_atoms()) detail::schema_for(catalog, *atom, md.name);

    MDAnalysis analysis;
    analysis.name = md.name;

    auto add_positions = [&](const std::string& var, const std::string& required_domain) {
        for (const auto& [atom, index] : detail::positions_of(md, var)) {
            const RelationSchema& schema = catalog.at(atom->relation);
            const AttributeSpec& attr = schema.attributes()[index];
            if (!required_domain.empty() && attr.domain != required_domain)
                fail(ErrorCode::SchemaError,
                     "rule '" + md.name + "': variable '" + var + "' sits at " +
                         attribute_ref(atom->relation, attr.name) + " of domain '" +
                         attr.domain + "', not '" + required_domain + "'");
            analysis.alhs.insert(attribute_ref(atom->relation, attr.name));
        }
    };
    for (const SimAtom& sim : md.sims) {
        if (sim.is_equality()) {
            add_positions(sim.x, "");
        } else {
            add_positions(sim.x, sim.tag);
            add_positions(sim.y, sim.tag);
        }
    }

    for (int side = 0; side < 2; ++side) {
        const std::string& var = side == 0 ? md.identity.first : md.identity.second;
        const MdAtom& lead = md.leading[side];
        const RelationSchema& schema = catalog.at(lead.relation);
        int found = -1;
        for (std::size_t i = 0; i < lead.vars.size(); ++i) {
            if (lead.vars[i] != var) continue;
            if (found >= 0)
                fail(ErrorCode::SchemaError, "rule '" + md.name + "': identity variable '" +
                                                 var + "' occurs at two positions of " +
                                                 lead.relation);
            found = static_cast<int>(i);
        }
        if (found < 0)
            fail(ErrorCode::IdentityOutsideLeadingAtoms,
                 "rule '" + md.name + "': identity variable '" + var +
                     "' is not bound by its leading atom");
        analysis.arhs[side] =
            attribute_ref(lead.relation, schema.attributes()[found].name);
    }
    return analysis;
}

inline std::vector<MDAnalysis> analyze_all(const std::vector<MatchDependency>& mds,
                                           const Catalog& catalog) {
    std::vector<MDAnalysis> out;
    out.reserve(mds.size());
    for (const auto& md : mds) out.push_back(analyze_md(md, catalog));
    return out;
}

// A rule set is interaction-free when no attribute read by any rule's
// condition side is written by any rule's identity side (self-pairs
// included). Interaction-free sets resolve to a unique stable instance no
// matter the enforcement order.
inline bool is_interaction_free(const std::vector<MatchDependency>& mds,
                                const Catalog& catalog) {
    std::set<std::string> read, written;
    for (const MDAnalysis& a : analyze_all(mds, catalog)) {
        read.insert(a.alhs.begin(), a.alhs.end());
        written.insert(a.arhs[0]);
        written.insert(a.arhs[1]);
    }
    for (const auto& attr : read)
        if (written.count(attr)) return false;
    return true;
}

} // namespace matchbox
