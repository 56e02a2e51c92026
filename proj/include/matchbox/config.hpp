#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/features.hpp"
#include "matchbox/schema.hpp"
#include "matchbox/similarity.hpp"
#include "matchbox/svm.hpp"

namespace matchbox {

// Everything one resolution run needs, read from a sectioned key-value file.
// Section by section:
//   [schemas]    relation = <Name> <attr>:<kind>[?][@domain] ...
//                csv = <Name> <path>
//   [similarity] domain = <tag> <function> <threshold>
//   [features]   feature = <Relation> <attr> <function> <weight>
//   [blocking]   mode = sb | mdsb | mdcb
//                keys = <Relation> <attr> ...
//                mdsb_rules = <path>      mdcb_rules = <path>
//   [svm]        C / max_epochs / tol / seed = <number>
//                training = <labeled-pair csv>  |  model = <trained model>
//   [merge]      relation = <Name>
//                mf = <domain> union|max
// Attribute kinds: id, short, long, numeric, block. A trailing '?' marks the
// attribute nullable; '@tag' overrides its comparison domain.
struct PipelineConfig {
    Catalog catalog;
    std::map<std::string, std::string> csv_paths; // relation -> data file
    SimilarityConfig similarity;
    std::vector<FeatureSpec> features;
    std::string blocking_mode = "mdsb";
    std::map<std::string, std::vector<std::string>> keys; // relation -> SB key attrs
    std::string mdsb_rules;
    std::string mdcb_rules;
    SvmParams svm;
    std::string training_path;
    std::string model_path;
    std::string merge_relation;
    std::map<std::string, std::string> merge_mf; // domain -> union|max
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(std::move(tok));
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double config_double(const std::string& s, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::ConfigError, "bad number for '" + key + "': '" + s + "'");
    return v;
}

inline std::uint64_t config_unsigned(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::ConfigError, "bad count for '" + key + "': '" + s + "'");
    return v;
}

inline AttributeSpec parse_attribute_spec(const std::string& token) {
    const std::size_t colon = token.find(':');
    if (colon == std::string::npos || colon == 0)
        fail(ErrorCode::ConfigError, "attribute must look like name:kind, got '" + token + "'");
    AttributeSpec spec;
    spec.name = token.substr(0, colon);
    std::string rest = token.substr(colon + 1);
    const std::size_t at = rest.find('@');
    if (at != std::string::npos) {
        spec.domain = rest.substr(at + 1);
        rest = rest.substr(0, at);
        if (spec.domain.empty())
            fail(ErrorCode::ConfigError, "empty domain tag in '" + token + "'");
    }
    if (!rest.empty() && rest.back() == '?') {
        spec.nullable = true;
        rest.pop_back();
    }
    if (rest == "id") spec.kind = AttributeKind::ReferenceId;
    else if (rest == "short") spec.kind = AttributeKind::ShortString;
    else if (rest == "long") spec.kind = AttributeKind::LongText;
    else if (rest == "numeric") spec.kind = AttributeKind::NumericString;
    else if (rest == "block") spec.kind = AttributeKind::BlockNumber;
    else
        fail(ErrorCode::ConfigError, "unknown attribute kind '" + rest + "' in '" + token +
                                         "' (want id, short, long, numeric, or block)");
    return spec;
}

} // namespace detail

// Parses the sectioned format. Keys outside any section, unknown sections,
// and unknown keys all refuse loudly — a typo should never half-configure a
// run. Paths are kept verbatim; load_config resolves and checks them.
inline PipelineConfig parse_config(std::istream& in) {
    PipelineConfig cfg;
    std::map<std::string, std::vector<Feature>> feature_groups;
    std::vector<std::string> feature_order;
    std::string section;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = detail::trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::string where = "line " + std::to_string(line_no);
        if (text.front() == '[') {
            if (text.back() != ']')
                fail(ErrorCode::ConfigError, where + ": unterminated section header");
            section = text.substr(1, text.size() - 2);
            static const std::set<std::string> known = {"schemas",  "similarity", "features",
                                                        "blocking", "svm",        "merge"};
            if (!known.count(section))
                fail(ErrorCode::ConfigError, where + ": unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::ConfigError, where + ": expected key = value");
        if (section.empty())
            fail(ErrorCode::ConfigError, where + ": key before any [section]");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        const std::vector<std::string> words = detail::split_ws(value);

        if (section == "schemas") {
            if (key == "relation") {
                if (words.size() < 2)
                    fail(ErrorCode::ConfigError,
                         where + ": relation needs a name and at least one attribute");
                std::vector<AttributeSpec> attrs;
                for (std::size_t i = 1; i < words.size(); ++i)
                    attrs.push_back(detail::parse_attribute_spec(words[i]));
                try {
                    cfg.catalog.add(RelationSchema(words[0], std::move(attrs)));
                } catch (const Error& e) {
                    fail(ErrorCode::ConfigError, where + ": " + e.message());
                }
            } else if (key == "csv") {
                if (words.size() != 2)
                    fail(ErrorCode::ConfigError, where + ": csv needs <relation> <path>");
                cfg.csv_paths[words[0]] = words[1];
            } else {
                fail(ErrorCode::ConfigError, where + ": unknown [schemas] key '" + key + "'");
            }
        } else if (section == "similarity") {
            if (key != "domain")
                fail(ErrorCode::ConfigError, where + ": unknown [similarity] key '" + key + "'");
            if (words.size() != 3)
                fail(ErrorCode::ConfigError,
                     where + ": domain needs <tag> <function> <threshold>");
            const auto fn = similarity_function_from_name(words[1]);
            if (!fn)
                fail(ErrorCode::ConfigError,
                     where + ": unknown similarity function '" + words[1] + "'");
            try {
                cfg.similarity.set(words[0], *fn,
                                   detail::config_double(words[2], "threshold"));
            } catch (const Error& e) {
                fail(ErrorCode::ConfigError, where + ": " + e.message());
            }
        } else if (section == "features") {
            if (key != "feature")
                fail(ErrorCode::ConfigError, where + ": unknown [features] key '" + key + "'");
            if (words.size() != 4)
                fail(ErrorCode::ConfigError,
                     where + ": feature needs <relation> <attr> <function> <weight>");
            Feature f;
            f.attribute = words[1];
            const auto fn = similarity_function_from_name(words[2]);
            if (!fn)
                fail(ErrorCode::ConfigError,
                     where + ": unknown similarity function '" + words[2] + "'");
            f.function = *fn;
            f.weight = detail::config_double(words[3], "feature weight");
            if (!feature_groups.count(words[0])) feature_order.push_back(words[0]);
            feature_groups[words[0]].push_back(f);
        } else if (section == "blocking") {
            if (key == "mode") {
                if (value != "sb" && value != "mdsb" && value != "mdcb")
                    fail(ErrorCode::ConfigError,
                         where + ": mode must be sb, mdsb, or mdcb, got '" + value + "'");
                cfg.blocking_mode = value;
            } else if (key == "keys") {
                if (words.size() < 2)
                    fail(ErrorCode::ConfigError,
                         where + ": keys needs <relation> <attr> [<attr> ...]");
                cfg.keys[words[0]] = {words.begin() + 1, words.end()};
            } else if (key == "mdsb_rules") {
                cfg.mdsb_rules = value;
            } else if (key == "mdcb_rules") {
                cfg.mdcb_rules = value;
            } else {
                fail(ErrorCode::ConfigError, where + ": unknown [blocking] key '" + key + "'");
            }
        } else if (section == "svm") {
            if (key == "C") {
                cfg.svm.C = detail::config_double(value, key);
            } else if (key == "max_epochs") {
                cfg.svm.max_epochs =
                    static_cast<std::size_t>(detail::config_unsigned(value, key));
            } else if (key == "tol") {
                cfg.svm.tol = detail::config_double(value, key);
            } else if (key == "seed") {
                cfg.svm.seed = detail::config_unsigned(value, key);
            } else if (key == "training") {
                cfg.training_path = value;
            } else if (key == "model") {
                cfg.model_path = value;
            } else {
                fail(ErrorCode::ConfigError, where + ": unknown [svm] key '" + key + "'");
            }
        } else if (section == "merge") {
            if (key == "relation") {
                cfg.merge_relation = value;
            } else if (key == "mf") {
                if (words.size() != 2 || (words[1] != "union" && words[1] != "max"))
                    fail(ErrorCode::ConfigError,
                         where + ": mf needs <domain> union|max, got '" + value + "'");
                cfg.merge_mf[words[0]] = words[1];
            } else {
                fail(ErrorCode::ConfigError, where + ": unknown [merge] key '" + key + "'");
            }
        }
    }
    for (const std::string& rel : feature_order)
        cfg.features.push_back(FeatureSpec{rel, feature_groups[rel]});
    return cfg;
}

// Cross-field checks that don't need the filesystem. Split out so tests can
// exercise them on in-memory configs.
inline void validate_config(const PipelineConfig& cfg) {
    if (cfg.catalog.all().empty())
        fail(ErrorCode::ConfigError, "no relations declared in [schemas]");
    for (const auto& [rel, path] : cfg.csv_paths)
        if (!cfg.catalog.has(rel))
            fail(ErrorCode::ConfigError, "csv declared for unknown relation '" + rel + "'");
    for (const auto& [rel, schema] : cfg.catalog.all())
        if (!cfg.csv_paths.count(rel))
            fail(ErrorCode::ConfigError, "relation '" + rel + "' has no csv source");
    for (const FeatureSpec& spec : cfg.features) validate_feature_spec(spec, cfg.catalog);
    if (cfg.blocking_mode == "sb" && cfg.keys.empty())
        fail(ErrorCode::ConfigError, "blocking mode sb needs at least one keys line");
    if (cfg.blocking_mode == "mdsb" && cfg.mdsb_rules.empty())
        fail(ErrorCode::ConfigError, "blocking mode mdsb needs mdsb_rules");
    if (cfg.blocking_mode == "mdcb" && cfg.mdcb_rules.empty())
        fail(ErrorCode::ConfigError, "blocking mode mdcb needs mdcb_rules");
    for (const auto& [rel, attrs] : cfg.keys) {
        if (!cfg.catalog.has(rel))
            fail(ErrorCode::ConfigError, "keys declared for unknown relation '" + rel + "'");
        const RelationSchema& schema = cfg.catalog.at(rel);
        for (const std::string& attr : attrs) schema.index_of(attr);
    }
    if (!cfg.training_path.empty() && !cfg.model_path.empty())
        fail(ErrorCode::ConfigError,
             "[svm] declares both training data and a trained model; pick one");
    if (!cfg.merge_relation.empty() && !cfg.catalog.has(cfg.merge_relation))
        fail(ErrorCode::ConfigError,
             "merge relation '" + cfg.merge_relation + "' is not declared");
    if (cfg.svm.C <= 0.0)
        fail(ErrorCode::ConfigError, "svm C must be positive");
    if (cfg.svm.max_epochs == 0)
        fail(ErrorCode::ConfigError, "svm max_epochs must be positive");
}

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (base / path).string();
}

inline void require_file(const std::string& path, const std::string& role) {
    if (!std::filesystem::is_regular_file(path))
        fail(ErrorCode::ConfigError, role + " file not found: " + path);
}

} // namespace detail

// Reads, validates, resolves paths against the config's own directory, and
// confirms every referenced file exists — all before any pipeline stage runs.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open config file: " + path);
    PipelineConfig cfg = parse_config(in);
    validate_config(cfg);
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (auto& [rel, p] : cfg.csv_paths) {
        p = detail::resolve_path(base, p);
        detail::require_file(p, "data");
    }
    for (std::string* p : {&cfg.mdsb_rules, &cfg.mdcb_rules}) {
        if (p->empty()) continue;
        *p = detail::resolve_path(base, *p);
        detail::require_file(*p, "rule");
    }
    if (!cfg.training_path.empty()) {
        cfg.training_path = detail::resolve_path(base, cfg.training_path);
        detail::require_file(cfg.training_path, "training");
    }
    if (!cfg.model_path.empty()) {
        cfg.model_path = detail::resolve_path(base, cfg.model_path);
        detail::require_file(cfg.model_path, "model");
    }
    return cfg;
}

} // namespace matchbox
