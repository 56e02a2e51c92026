#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/schema.hpp"

namespace matchbox {

// Minimal RFC-4180-style CSV: comma separated, double-quote escaping with ""
// inside quoted fields, UTF-8 passed through verbatim. One record per line;
// embedded newlines inside quoted fields are supported on read.

inline std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::vector<std::string>> csv_parse(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false, any_char = false;
    char c;
    while (in.get(c)) {
        any_char = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get(c);
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any_char = false;
        } else {
            field += c;
        }
    }
    if (any_char || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Loads tuples for one relation. Requirements and conventions:
//   - header row mandatory and must match the schema attribute names, except
//     that a trailing block-number column may be omitted entirely — then each
//     tuple's block number is synthesized equal to its tid;
//   - column 0 must parse as a positive integer (the tid);
//   - empty cells become Null (only legal on nullable attributes).
inline std::vector<Tuple> load_csv(std::istream& in, const RelationSchema& schema) {
    auto rows = csv_parse(in);
    if (rows.empty())
        fail(ErrorCode::MalformedRow, schema.name() + ": missing header row");

    const auto& attrs = schema.attributes();
    bool block_synthesized = false;
    std::size_t expected_cols = attrs.size();
    if (auto bl = schema.block_index(); bl && rows[0].size() == attrs.size() - 1) {
        block_synthesized = true;
        expected_cols = attrs.size() - 1;
    }
    if (rows[0].size() != expected_cols)
        fail(ErrorCode::MalformedRow,
             schema.name() + ": header has " + std::to_string(rows[0].size()) +
                 " columns, schema expects " + std::to_string(attrs.size()));
    for (std::size_t i = 0; i < expected_cols; ++i)
        if (rows[0][i] != attrs[i].name)
            fail(ErrorCode::MalformedRow,
                 schema.name() + ": header column '" + rows[0][i] +
                     "' does not match attribute '" + attrs[i].name + "'");

    std::vector<Tuple> tuples;
    std::set<Tid> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() == 1 && cells[0].empty()) continue; // trailing blank line
        if (cells.size() != expected_cols)
            fail(ErrorCode::MalformedRow,
                 schema.name() + " row " + std::to_string(r) + ": " +
                     std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(expected_cols));
        Tuple t;
        {
            const std::string& id_text = cells[0];
            Tid tid = 0;
            bool ok = !id_text.empty();
            for (char ch : id_text)
                if (ch < '0' || ch > '9') { ok = false; break; }
            if (ok) {
                try {
                    tid = std::stoll(id_text);
                } catch (...) { ok = false; }
            }
            if (!ok || tid <= 0)
                fail(ErrorCode::MalformedRow,
                     schema.name() + " row " + std::to_string(r) + ": id '" + id_text +
                         "' is not a positive integer");
            t.tid = tid;
        }
        if (!seen.insert(t.tid).second)
            fail(ErrorCode::DuplicateTid,
                 schema.name() + ": tid " + std::to_string(t.tid) + " appears twice");
        for (std::size_t i = 0; i < expected_cols; ++i) {
            if (cells[i].empty() && i != 0) {
                if (!attrs[i].nullable)
                    fail(ErrorCode::NonNullableNull,
                         schema.name() + "." + attrs[i].name + " empty in row " +
                             std::to_string(r));
                t.values.push_back(Value::null());
            } else {
                t.values.push_back(Value::atomic(cells[i]));
            }
        }
        if (block_synthesized)
            t.values.push_back(Value::atomic(std::to_string(t.tid)));
        tuples.push_back(std::move(t));
    }
    return tuples;
}

inline std::vector<Tuple> load_csv(const std::string& path, const RelationSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::DataError, "cannot open '" + path + "'");
    return load_csv(in, schema);
}

inline void save_csv(std::ostream& out, const RelationSchema& schema,
                     const std::vector<Tuple>& tuples) {
    const auto& attrs = schema.attributes();
    for (std::size_t i = 0; i < attrs.size(); ++i)
        out << (i ? "," : "") << csv_escape(attrs[i].name);
    out << "\n";
    for (const auto& t : tuples) {
        for (std::size_t i = 0; i < t.values.size(); ++i)
            out << (i ? "," : "") << csv_escape(t.values[i].render());
        out << "\n";
    }
}

} // namespace matchbox
