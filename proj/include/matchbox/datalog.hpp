#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "matchbox/analysis.hpp"
#include "matchbox/error.hpp"
#include "matchbox/md.hpp"
#include "matchbox/schema.hpp"

namespace matchbox {

// Which stratified program to render: block identification (identities on
// block-number attributes) or record merging (identities on tail attributes).
enum class DatalogMode { Blocking, Merging };

namespace detail {

inline bool has_block_attribute(const RelationSchema& schema) {
    return schema.arity() > 0 &&
           schema.attributes().back().kind == AttributeKind::BlockNumber;
}

inline std::size_t var_position(const MdAtom& atom, const std::string& var) {
    for (std::size_t i = 0; i < atom.vars.size(); ++i)
        if (atom.vars[i] == var) return i;
    return 0; // analysis has already guaranteed the variable occurs exactly once
}

// "Rel[v0, ..., vk-1] = vk" — the functional notation for a relation whose
// last attribute is its block number.
inline std::string functional_atom(const std::string& relation,
                                   const std::vector<std::string>& vars) {
    std::string out = relation + "[";
    for (std::size_t i = 0; i + 1 < vars.size(); ++i) {
        if (i) out += ", ";
        out += vars[i];
    }
    out += "] = " + vars.back();
    return out;
}

inline std::string plain_atom(const std::string& relation,
                              const std::vector<std::string>& vars) {
    std::string out = relation + "(";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i) out += ", ";
        out += vars[i];
    }
    out += ")";
    return out;
}

// Blocking programs keep every position; relations carrying a block number
// render functionally. Merging programs drop block positions entirely.
inline std::string render_atom(const MdAtom& atom, const Catalog& catalog,
                               DatalogMode mode) {
    const RelationSchema& schema = catalog.at(atom.relation);
    if (mode == DatalogMode::Blocking) {
        if (has_block_attribute(schema)) return functional_atom(atom.relation, atom.vars);
        return plain_atom(atom.relation, atom.vars);
    }
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < atom.vars.size(); ++i)
        if (schema.attributes()[i].kind != AttributeKind::BlockNumber)
            vars.push_back(atom.vars[i]);
    return plain_atom(atom.relation, vars);
}

inline void validate_mode(const MatchDependency& md, const Catalog& catalog,
                          DatalogMode mode) {
    for (std::size_t side = 0; side < 2; ++side) {
        const MdAtom& lead = md.leading[side];
        const std::string& var = side == 0 ? md.identity.first : md.identity.second;
        const std::size_t pos = var_position(lead, var);
        const AttributeSpec& attr = catalog.at(lead.relation).attributes()[pos];
        const std::string ref = attribute_ref(lead.relation, attr.name);
        if (mode == DatalogMode::Blocking && attr.kind != AttributeKind::BlockNumber)
            fail(ErrorCode::ModeMismatch, "rule '" + md.name + "': identity attribute " +
                                              ref + " is not a block number");
        if (mode == DatalogMode::Merging && attr.kind == AttributeKind::BlockNumber)
            fail(ErrorCode::ModeMismatch, "rule '" + md.name + "': identity attribute " +
                                              ref + " is a block number");
        if (mode == DatalogMode::Merging && pos == 0)
            fail(ErrorCode::ModeMismatch, "rule '" + md.name + "': identity attribute " +
                                              ref + " is the record id");
    }
}

// Similarity atoms render as binary predicates; in merging mode a similarity
// between the two leading record ids is the classifier's duplicate verdict.
inline std::string render_sim(const SimAtom& sim, const MatchDependency& md,
                              DatalogMode mode) {
    if (mode == DatalogMode::Merging &&
        ((sim.x == md.leading[0].vars[0] && sim.y == md.leading[1].vars[0]) ||
         (sim.x == md.leading[1].vars[0] && sim.y == md.leading[0].vars[0])))
        return md.leading[0].relation + "-Duplicate(" + sim.x + ", " + sim.y + ")";
    return sim.tag + "-sim(" + sim.x + ", " + sim.y + ")";
}

inline std::string blocking_rule(const MatchDependency& md, const Catalog& catalog) {
    MdAtom head0 = md.leading[0];
    head0.vars[var_position(head0, md.identity.first)] = md.identity.second;

    std::string rule = render_atom(head0, catalog, DatalogMode::Blocking) + ", " +
                       render_atom(md.leading[1], catalog, DatalogMode::Blocking) + " <- " +
                       render_atom(md.leading[0], catalog, DatalogMode::Blocking) + ", " +
                       render_atom(md.leading[1], catalog, DatalogMode::Blocking);
    for (const MdAtom& c : md.context)
        rule += ", " + render_atom(c, catalog, DatalogMode::Blocking);
    for (const SimAtom& sim : md.sims) {
        if (sim.is_equality()) continue; // carried by the repeated variable itself
        rule += ", " + render_sim(sim, md, DatalogMode::Blocking);
    }
    rule += ", " + md.identity.first + " < " + md.identity.second + ".";
    return rule;
}

inline std::string merging_rule(const MatchDependency& md, const Catalog& catalog) {
    const std::size_t pos0 = var_position(md.leading[0], md.identity.first);
    const std::size_t pos1 = var_position(md.leading[1], md.identity.second);
    const AttributeSpec& attr = catalog.at(md.leading[0].relation).attributes()[pos0];
    const std::string merged = "m_" + attr.name;

    MdAtom head0 = md.leading[0];
    MdAtom head1 = md.leading[1];
    head0.vars[pos0] = merged;
    head1.vars[pos1] = merged;

    std::string rule = render_atom(head0, catalog, DatalogMode::Merging) + ", " +
                       render_atom(head1, catalog, DatalogMode::Merging) + " <- " +
                       render_atom(md.leading[0], catalog, DatalogMode::Merging) + ", " +
                       render_atom(md.leading[1], catalog, DatalogMode::Merging);
    for (const MdAtom& c : md.context)
        rule += ", " + render_atom(c, catalog, DatalogMode::Merging);
    for (const SimAtom& sim : md.sims) {
        if (sim.is_equality()) continue;
        rule += ", " + render_sim(sim, md, DatalogMode::Merging);
    }
    rule += ", m-" + attr.domain + "(" + md.identity.first + ", " + md.identity.second +
            ", " + merged + ").";
    return rule;
}

// Scaffolding variable lists built from attribute names, with the block or
// version column renamed to keep the generated rules readable.
inline std::vector<std::string> schema_vars(const RelationSchema& schema,
                                            bool drop_block) {
    std::vector<std::string> vars;
    for (const AttributeSpec& attr : schema.attributes()) {
        if (drop_block && attr.kind == AttributeKind::BlockNumber) continue;
        vars.push_back(attr.name);
    }
    return vars;
}

inline std::string joined(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += parts[i];
    }
    return out;
}

inline std::string emit_blocking(const std::vector<MatchDependency>& mds,
                                 const Catalog& catalog) {
    std::string out;
    out += "# Collective-blocking program (stratified rendering of the chase semantics).\n";
    out += "# 1. Base facts: one Rel[rid, ...] = bl fact per input tuple; every record\n";
    out += "#    starts in its own block.\n";
    out += "# 2. Similarity facts from the kernel pass, one binary predicate per\n";
    out += "#    attribute domain.\n";
    out += "# 3. Block-propagation rules, one per match rule; the guard keeps the larger\n";
    out += "#    block number.\n";
    for (const MatchDependency& md : mds) out += blocking_rule(md, catalog) + "\n";
    out += "# 4. Versions superseded by a larger block number are old.\n";
    for (const auto& [name, schema] : catalog.all()) {
        if (!has_block_attribute(schema)) continue;
        std::vector<std::string> tail = schema_vars(schema, true);
        const std::string bl = schema.attributes().back().name;
        std::vector<std::string> with_bl1 = tail;
        with_bl1.push_back(bl + "_1");
        std::vector<std::string> with_bl2 = tail;
        with_bl2.push_back(bl + "_2");
        std::vector<std::string> head = tail;
        head.push_back(bl + "_1");
        out += name + "-OldVer(" + joined(head) + ") <- " +
               functional_atom(name, with_bl1) + ", " + functional_atom(name, with_bl2) +
               ", " + bl + "_1 < " + bl + "_2.\n";
    }
    out += "# 5. Surviving versions form the blocks.\n";
    for (const auto& [name, schema] : catalog.all()) {
        if (!has_block_attribute(schema)) continue;
        std::vector<std::string> vars = schema_vars(schema, true);
        vars.push_back(schema.attributes().back().name);
        std::vector<std::string> old_vars = vars;
        out += name + "-Block[" + joined(schema_vars(schema, true)) + "] = " +
               schema.attributes().back().name + " <- " + functional_atom(name, vars) +
               ", not " + name + "-OldVer(" + joined(old_vars) + ").\n";
    }
    return out;
}

inline std::string emit_merging(const std::vector<MatchDependency>& mds,
                                const Catalog& catalog) {
    std::string out;
    out += "# Record-merging program (stratified rendering of the chase semantics).\n";
    out += "# 1. Base facts: classifier verdicts Rel-Duplicate(r1, r2) and matching-\n";
    out += "#    function tables m-<domain>(a1, a2, a3).\n";
    out += "# 2. Merge rules, one per match rule; duplicate records converge on the\n";
    out += "#    merged attribute value.\n";
    for (const MatchDependency& md : mds) out += merging_rule(md, catalog) + "\n";
    out += "# 3. A version strictly below another version of the same record is old;\n";
    out += "#    tail-below compares tails componentwise in the matching-function order.\n";
    for (const auto& [name, schema] : catalog.all()) {
        std::vector<std::string> tail = schema_vars(schema, true);
        if (tail.size() < 2) continue; // nothing to merge beyond the record id
        const std::string rid = tail.front();
        std::vector<std::string> tail_a, tail_b;
        for (std::size_t i = 1; i < tail.size(); ++i) {
            tail_a.push_back(tail[i] + "_a");
            tail_b.push_back(tail[i] + "_b");
        }
        std::vector<std::string> atom_a{rid}, atom_b{rid};
        atom_a.insert(atom_a.end(), tail_a.begin(), tail_a.end());
        atom_b.insert(atom_b.end(), tail_b.begin(), tail_b.end());
        std::vector<std::string> below = tail_a;
        below.insert(below.end(), tail_b.begin(), tail_b.end());
        out += name + "-OldVer(" + joined(atom_a) + ") <- " + plain_atom(name, atom_a) +
               ", " + plain_atom(name, atom_b) + ", tail-below(" + joined(below) + ").\n";
    }
    out += "# 4. The latest version of each record forms the resolved instance.\n";
    for (const auto& [name, schema] : catalog.all()) {
        std::vector<std::string> tail = schema_vars(schema, true);
        if (tail.size() < 2) continue;
        out += name + "-ER(" + joined(tail) + ") <- " + plain_atom(name, tail) + ", not " +
               name + "-OldVer(" + joined(tail) + ").\n";
    }
    return out;
}

} // namespace detail

// Renders the stratified rule program equivalent to enforcing `mds` in the
// given mode. Documentation and parity output only: the chase engine is the
// executable semantics.
inline std::string emit_datalog(const std::vector<MatchDependency>& mds,
                                const Catalog& catalog, DatalogMode mode) {
    analyze_all(mds, catalog); // schema conformance, including identity positions
    for (const MatchDependency& md : mds) detail::validate_mode(md, catalog, mode);
    return mode == DatalogMode::Blocking ? detail::emit_blocking(mds, catalog)
                                         : detail::emit_merging(mds, catalog);
}

} // namespace matchbox
