#pragma once

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/error.hpp"

namespace matchbox {

// One relational atom of a rule: R(t, x1, ..., xk). The first variable binds
// the tuple id, the rest bind attribute positions 1..k of R's schema.
struct MdAtom {
    std::string relation;
    std::vector<std::string> vars;

    bool operator==(const MdAtom&) const = default;

    bool binds(const std::string& var) const {
        for (const auto& v : vars)
            if (v == var) return true;
        return false;
    }
};

// Equality joins written as repeated variables are recorded with the marker
// tag "=" and both sides equal; they take part in attribute analysis but are
// enforced by the shared binding itself.
inline constexpr const char* kEqualityTag = "=";

struct SimAtom {
    std::string tag; // attribute-domain tag, or "=" for an implicit equality
    std::string x;
    std::string y;

    bool operator==(const SimAtom&) const = default;
    bool is_equality() const { return tag == kEqualityTag; }
};

// A match rule: when the two leading tuples (plus optional context tuples)
// satisfy every similarity and join condition, the two identity-variable
// values must be made identical.
struct MatchDependency {
    std::string name;
    std::array<MdAtom, 2> leading;
    std::vector<MdAtom> context;
    std::vector<SimAtom> sims;
    std::pair<std::string, std::string> identity; // (var in leading[0], var in leading[1])

    bool operator==(const MatchDependency&) const = default;

    bool is_relational() const { return !context.empty(); }

    std::vector<const MdAtom*> all_atoms() const {
        std::vector<const MdAtom*> atoms{&leading[0], &leading[1]};
        for (const auto& c : context) atoms.push_back(&c);
        return atoms;
    }
};

namespace detail {

struct MdToken {
    enum Kind { Ident, LParen, RParen, Comma, Colon, Arrow, End };
    Kind kind = End;
    std::string text;
    std::size_t line = 1;
    std::size_t col = 1;
};

inline const char* md_token_name(MdToken::Kind k) {
    switch (k) {
        case MdToken::Ident: return "identifier";
        case MdToken::LParen: return "'('";
        case MdToken::RParen: return "')'";
        case MdToken::Comma: return "','";
        case MdToken::Colon: return "':'";
        case MdToken::Arrow: return "'->'";
        case MdToken::End: return "end of input";
    }
    return "?";
}

class MdLexer {
public:
    explicit MdLexer(const std::string& text) : text_(text) { advance(); }

    const MdToken& peek() const { return current_; }

    MdToken take() {
        MdToken t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else {
                break;
            }
        }
        current_.line = line_;
        current_.col = col_;
        if (pos_ >= text_.size()) {
            current_.kind = MdToken::End;
            current_.text.clear();
            return;
        }
        const char c = text_[pos_];
        auto single = [&](MdToken::Kind k) {
            current_.kind = k;
            current_.text = std::string(1, c);
            ++pos_;
            ++col_;
        };
        switch (c) {
            case '(': single(MdToken::LParen); return;
            case ')': single(MdToken::RParen); return;
            case ',': single(MdToken::Comma); return;
            case ':': single(MdToken::Colon); return;
            case '-':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                    current_.kind = MdToken::Arrow;
                    current_.text = "->";
                    pos_ += 2;
                    col_ += 2;
                    return;
                }
                break;
            default: break;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size()) {
                const char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '-') {
                    // keep '-' inside identifiers only when not starting '->'
                    if (d == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') break;
                    ++pos_;
                    ++col_;
                } else {
                    break;
                }
            }
            current_.kind = MdToken::Ident;
            current_.text = text_.substr(start, pos_ - start);
            return;
        }
        fail(ErrorCode::SyntaxError, "line " + std::to_string(line_) + ", col " +
                                         std::to_string(col_) +
                                         ": unexpected character '" + std::string(1, c) +
                                         "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    MdToken current_;
};

class MdParser {
public:
    explicit MdParser(const std::string& text) : lexer_(text) {}

    bool at_end() const { return lexer_.peek().kind == MdToken::End; }

    MatchDependency parse_declaration() {
        expect_keyword("md");
        MatchDependency md;
        md.name = expect(MdToken::Ident, "rule name").text;
        expect(MdToken::Colon, "':'");

        std::vector<MdAtom> atoms;
        bool saw_sim = false;
        while (true) {
            const MdToken head = expect(MdToken::Ident, "atom");
            if (head.text == "sim") {
                saw_sim = true;
                md.sims.push_back(parse_sim());
            } else {
                if (saw_sim)
                    fail_at(head, "relational atoms must precede sim atoms");
                atoms.push_back(parse_atom(head));
            }
            if (lexer_.peek().kind == MdToken::Comma) {
                lexer_.take();
                continue;
            }
            break;
        }
        expect(MdToken::Arrow, "'->'");
        expect_keyword("ident");
        expect(MdToken::LParen, "'('");
        md.identity.first = expect(MdToken::Ident, "identity variable").text;
        expect(MdToken::Comma, "','");
        md.identity.second = expect(MdToken::Ident, "identity variable").text;
        expect(MdToken::RParen, "')'");

        if (atoms.size() < 2)
            fail(ErrorCode::SyntaxError,
                 "rule '" + md.name + "' needs two leading atoms, got " +
                     std::to_string(atoms.size()));
        md.leading = {atoms[0], atoms[1]};
        md.context.assign(atoms.begin() + 2, atoms.end());
        finalize(md);
        return md;
    }

private:
    MdToken expect(MdToken::Kind kind, const std::string& what) {
        if (lexer_.peek().kind != kind) fail_expected(what);
        return lexer_.take();
    }

    void expect_keyword(const std::string& word) {
        if (lexer_.peek().kind != MdToken::Ident || lexer_.peek().text != word)
            fail_expected("'" + word + "'");
        lexer_.take();
    }

    [[noreturn]] void fail_expected(const std::string& what) {
        const MdToken& t = lexer_.peek();
        fail(ErrorCode::SyntaxError, "line " + std::to_string(t.line) + ", col " +
                                         std::to_string(t.col) + ": expected " + what +
                                         ", found " +
                                         (t.kind == MdToken::Ident ? "'" + t.text + "'"
                                                                   : md_token_name(t.kind)));
    }

    [[noreturn]] void fail_at(const MdToken& t, const std::string& message) {
        fail(ErrorCode::SyntaxError, "line " + std::to_string(t.line) + ", col " +
                                         std::to_string(t.col) + ": " + message);
    }

    MdAtom parse_atom(const MdToken& head) {
        MdAtom atom;
        atom.relation = head.text;
        expect(MdToken::LParen, "'('");
        while (true) {
            const MdToken var = expect(MdToken::Ident, "variable");
            atom.vars.push_back(var.text == "_" ? fresh_wildcard() : var.text);
            if (lexer_.peek().kind == MdToken::Comma) {
                lexer_.take();
                continue;
            }
            break;
        }
        expect(MdToken::RParen, "')'");
        return atom;
    }

    SimAtom parse_sim() {
        SimAtom sim;
        expect(MdToken::LParen, "'('");
        sim.tag = expect(MdToken::Ident, "domain tag").text;
        expect(MdToken::Colon, "':'");
        sim.x = expect(MdToken::Ident, "variable").text;
        expect(MdToken::Comma, "','");
        sim.y = expect(MdToken::Ident, "variable").text;
        expect(MdToken::RParen, "')'");
        if (sim.tag == kEqualityTag)
            fail(ErrorCode::SyntaxError, "the tag '=' is reserved for implicit equalities");
        return sim;
    }

    std::string fresh_wildcard() {
        return "_" + std::to_string(++wildcards_);
    }

    // Validates variable binding rules and appends the implicit-equality
    // sim-atoms derived from repeated variables.
    void finalize(MatchDependency& md) {
        std::vector<std::string> order; // variables by first occurrence
        std::map<std::string, int> occurrences;
        auto visit = [&](const MdAtom& atom) {
            for (const auto& v : atom.vars) {
                if (++occurrences[v] == 1) order.push_back(v);
            }
        };
        visit(md.leading[0]);
        visit(md.leading[1]);
        for (const auto& c : md.context) visit(c);

        for (const auto& sim : md.sims) {
            if (sim.is_equality()) continue;
            for (const std::string* v : {&sim.x, &sim.y})
                if (!occurrences.count(*v))
                    fail(ErrorCode::UnboundVariable, "similarity variable '" + *v +
                                                         "' of rule '" + md.name +
                                                         "' is not bound by any atom");
        }
        for (const auto& v : order)
            if (occurrences[v] > 1)
                md.sims.push_back(SimAtom{kEqualityTag, v, v});

        for (const std::string* v : {&md.identity.first, &md.identity.second})
            if (!occurrences.count(*v))
                fail(ErrorCode::UnboundVariable, "identity variable '" + *v + "' of rule '" +
                                                     md.name + "' is not bound by any atom");
        const bool first_in_0 = md.leading[0].binds(md.identity.first);
        const bool first_in_1 = md.leading[1].binds(md.identity.first);
        const bool second_in_0 = md.leading[0].binds(md.identity.second);
        const bool second_in_1 = md.leading[1].binds(md.identity.second);
        if (first_in_0 && second_in_1) {
            // canonical arrangement
        } else if (first_in_1 && second_in_0) {
            std::swap(md.identity.first, md.identity.second);
        } else {
            fail(ErrorCode::IdentityOutsideLeadingAtoms,
                 "identity variables of rule '" + md.name +
                     "' must come one from each leading atom");
        }

        if (!md.context.empty()) {
            std::set<std::string> context_vars;
            for (const auto& c : md.context)
                context_vars.insert(c.vars.begin(), c.vars.end());
            for (const MdAtom& lead : md.leading) {
                bool connected = false;
                for (const auto& v : lead.vars)
                    if (context_vars.count(v)) connected = true;
                if (!connected)
                    fail(ErrorCode::DisconnectedContext,
                         "context atoms of rule '" + md.name +
                             "' share no variable with leading atom over '" +
                             lead.relation + "'");
            }
        }
    }

    MdLexer lexer_;
    int wildcards_ = 0;
};

} // namespace detail

// Parses a single rule declaration. Structural validation only; schema
// conformance is checked by the analysis layer, which knows the catalog.
inline MatchDependency parse_md(const std::string& text) {
    detail::MdParser parser(text);
    MatchDependency md = parser.parse_declaration();
    if (!parser.at_end())
        fail(ErrorCode::SyntaxError, "trailing input after rule '" + md.name + "'");
    return md;
}

// Parses a rule file: any number of declarations, '#' comments between them.
inline std::vector<MatchDependency> parse_md_list(const std::string& text) {
    detail::MdParser parser(text);
    std::vector<MatchDependency> mds;
    while (!parser.at_end()) mds.push_back(parser.parse_declaration());
    return mds;
}

// Canonical rule text. Implicit equalities are not printed: they are carried
// by the repeated variables themselves and re-derived on parse, which is what
// makes render/parse a structural round-trip.
inline std::string render_md(const MatchDependency& md) {
    std::string out = "md " + md.name + ": ";
    auto atom = [&](const MdAtom& a) {
        out += a.relation + "(";
        for (std::size_t i = 0; i < a.vars.size(); ++i) {
            if (i) out += ", ";
            out += a.vars[i];
        }
        out += ")";
    };
    atom(md.leading[0]);
    out += ", ";
    atom(md.leading[1]);
    for (const auto& c : md.context) {
        out += ", ";
        atom(c);
    }
    for (const auto& sim : md.sims) {
        if (sim.is_equality()) continue;
        out += ", sim(" + sim.tag + ": " + sim.x + ", " + sim.y + ")";
    }
    out += " -> ident(" + md.identity.first + ", " + md.identity.second + ")";
    return out;
}

inline std::string render_md_list(const std::vector<MatchDependency>& mds) {
    std::string out;
    for (const auto& md : mds) {
        out += render_md(md);
        out += "\n";
    }
    return out;
}

} // namespace matchbox
