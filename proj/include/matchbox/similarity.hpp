#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/simstore.hpp"

namespace matchbox {

// ---------------------------------------------------------------------------
// String kernels
// ---------------------------------------------------------------------------

// Jaro similarity with the standard matching window floor(max_len/2)-1.
inline double jaro(const std::string& s1, const std::string& s2) {
    if (s1 == s2) return 1.0;
    if (s1.empty() || s2.empty()) return 0.0;
    const std::size_t len1 = s1.size(), len2 = s2.size();
    const std::size_t window =
        std::max<std::size_t>(1, std::max(len1, len2) / 2) - 1;

    std::vector<bool> matched1(len1, false), matched2(len2, false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < len1; ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(len2 - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (!matched2[j] && s2[j] == s1[i]) {
                matched1[i] = matched2[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    // Count transpositions between the two matched subsequences.
    std::size_t transpositions = 0, k = 0;
    for (std::size_t i = 0; i < len1; ++i) {
        if (!matched1[i]) continue;
        while (!matched2[k]) ++k;
        if (s1[i] != s2[k]) ++transpositions;
        ++k;
    }
    const double m = static_cast<double>(matches);
    const double t = transpositions / 2.0;
    return (m / len1 + m / len2 + (m - t) / m) / 3.0;
}

// Jaro-Winkler: Jaro plus a prefix boost, scaling p = 0.1, prefix capped at 4.
inline double jaro_winkler(const std::string& s1, const std::string& s2) {
    const double j = jaro(s1, s2);
    std::size_t prefix = 0;
    for (std::size_t i = 0; i < std::min({s1.size(), s2.size(), std::size_t(4)}); ++i) {
        if (s1[i] != s2[i]) break;
        ++prefix;
    }
    return j + prefix * 0.1 * (1.0 - j);
}

// Classic dynamic-programming edit distance (insert/delete/substitute, unit
// costs), rolling two rows.
inline std::size_t edit_distance(const std::string& s1, const std::string& s2) {
    const std::size_t n = s1.size(), m = s2.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t subst = prev[j - 1] + (s1[i - 1] == s2[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

// Normalized edit similarity: 1 - dist/max_len; 1.0 when both strings empty.
inline double levenshtein_sim(const std::string& s1, const std::string& s2) {
    if (s1.empty() && s2.empty()) return 1.0;
    const double max_len = static_cast<double>(std::max(s1.size(), s2.size()));
    return 1.0 - static_cast<double>(edit_distance(s1, s2)) / max_len;
}

// ---------------------------------------------------------------------------
// TF-IDF cosine
// ---------------------------------------------------------------------------

// Tokenization for long-text attributes: lowercase, non-word characters
// replaced by blanks, whitespace split.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::string normalized;
    normalized.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c))
            normalized += static_cast<char>(std::tolower(c));
        else
            normalized += ' ';
    }
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < normalized.size()) {
        while (i < normalized.size() && normalized[i] == ' ') ++i;
        std::size_t start = i;
        while (i < normalized.size() && normalized[i] != ' ') ++i;
        if (i > start) tokens.push_back(normalized.substr(start, i - start));
    }
    return tokens;
}

struct CorpusStats {
    std::size_t document_count = 0;
    std::map<std::string, std::size_t> token_document_frequency;

    void add_document(const std::vector<std::string>& tokens) {
        ++document_count;
        std::map<std::string, bool> seen;
        for (const auto& t : tokens) {
            if (!seen[t]) {
                seen[t] = true;
                ++token_document_frequency[t];
            }
        }
    }

    // idf = ln(N / df); tokens unseen in the corpus contribute 0.
    double idf(const std::string& token) const {
        auto it = token_document_frequency.find(token);
        if (it == token_document_frequency.end() || document_count == 0) return 0.0;
        return std::log(static_cast<double>(document_count) /
                        static_cast<double>(it->second));
    }
};

// Cosine of the tf-idf vectors; tf = raw count / document length. Returns 0
// when either vector is all-zero.
inline double tfidf_cosine(const std::vector<std::string>& doc1,
                           const std::vector<std::string>& doc2,
                           const CorpusStats& stats) {
    auto weigh = [&](const std::vector<std::string>& doc) {
        std::map<std::string, double> w;
        if (doc.empty()) return w;
        std::map<std::string, std::size_t> counts;
        for (const auto& t : doc) ++counts[t];
        for (const auto& [tok, c] : counts) {
            const double weight =
                (static_cast<double>(c) / static_cast<double>(doc.size())) * stats.idf(tok);
            if (weight != 0.0) w[tok] = weight;
        }
        return w;
    };
    const auto v1 = weigh(doc1), v2 = weigh(doc2);
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (const auto& [tok, w] : v1) {
        n1 += w * w;
        auto it = v2.find(tok);
        if (it != v2.end()) dot += w * it->second;
    }
    for (const auto& [tok, w] : v2) n2 += w * w;
    if (n1 == 0.0 || n2 == 0.0) return 0.0;
    return dot / (std::sqrt(n1) * std::sqrt(n2));
}

// ---------------------------------------------------------------------------
// Similarity configuration and fact materialization
// ---------------------------------------------------------------------------

enum class SimilarityFunction { JaroWinkler, TfidfCosine, Levenshtein, Equality };

inline const char* similarity_function_name(SimilarityFunction f) {
    switch (f) {
        case SimilarityFunction::JaroWinkler: return "jaro_winkler";
        case SimilarityFunction::TfidfCosine: return "tfidf_cosine";
        case SimilarityFunction::Levenshtein: return "levenshtein";
        case SimilarityFunction::Equality: return "equality";
    }
    return "?";
}

inline std::optional<SimilarityFunction> similarity_function_from_name(
    const std::string& name) {
    for (SimilarityFunction f :
         {SimilarityFunction::JaroWinkler, SimilarityFunction::TfidfCosine,
          SimilarityFunction::Levenshtein, SimilarityFunction::Equality})
        if (name == similarity_function_name(f)) return f;
    return std::nullopt;
}

struct DomainSimilarity {
    SimilarityFunction function = SimilarityFunction::Equality;
    double blocking_threshold = 1.0; // in [0,1]; equality is implicitly 1.0
};

// Per attribute-domain-tag similarity choice.
struct SimilarityConfig {
    std::map<std::string, DomainSimilarity> domains;

    void set(const std::string& domain, SimilarityFunction f, double threshold) {
        if (f != SimilarityFunction::Equality &&
            (threshold < 0.0 || threshold > 1.0))
            fail(ErrorCode::ConfigError,
                 "blocking threshold for '" + domain + "' must be in [0,1]");
        domains[domain] = {f, threshold};
    }

    const DomainSimilarity* find(const std::string& domain) const {
        auto it = domains.find(domain);
        return it == domains.end() ? nullptr : &it->second;
    }
};

// Similarity of two non-null values under one configured function. Object-set
// values are compared through their canonical rendering.
inline double similarity_score(SimilarityFunction f, const Value& a, const Value& b,
                               const CorpusStats& stats) {
    if (a.is_null() || b.is_null()) return 0.0;
    const std::string sa = a.render(), sb = b.render();
    switch (f) {
        case SimilarityFunction::JaroWinkler: return jaro_winkler(sa, sb);
        case SimilarityFunction::TfidfCosine: return tfidf_cosine(tokenize(sa), tokenize(sb), stats);
        case SimilarityFunction::Levenshtein: return levenshtein_sim(sa, sb);
        case SimilarityFunction::Equality: return sa == sb ? 1.0 : 0.0;
    }
    return 0.0;
}

// Corpus statistics per tf-idf domain, built from the active domain.
inline std::map<std::string, CorpusStats> corpus_stats_for(const Instance& inst,
                                                           const SimilarityConfig& cfg) {
    std::map<std::string, CorpusStats> stats;
    const auto domains = active_domain(inst);
    for (const auto& [tag, values] : domains) {
        const DomainSimilarity* ds = cfg.find(tag);
        if (!ds || ds->function != SimilarityFunction::TfidfCosine) continue;
        CorpusStats& cs = stats[tag];
        for (const Value& v : values) cs.add_document(tokenize(v.render()));
    }
    return stats;
}

// Materializes A-Sim facts: for each configured domain, every unordered pair
// of active-domain values scoring at or above the blocking threshold becomes
// a fact (the store adds the reflexive/symmetric closure). Equality-kind
// domains produce only identical-value (reflexive) facts.
inline SimilarityFactStore materialize_sim_facts(const Instance& inst,
                                                 const SimilarityConfig& cfg) {
    SimilarityFactStore store;
    const auto domains = active_domain(inst);
    const auto stats = corpus_stats_for(inst, cfg);
    static const CorpusStats empty_stats;
    for (const auto& [tag, values] : domains) {
        const DomainSimilarity* ds = cfg.find(tag);
        if (!ds) continue;
        const CorpusStats* cs = &empty_stats;
        if (auto it = stats.find(tag); it != stats.end()) cs = &it->second;
        std::vector<Value> vals(values.begin(), values.end());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            store.insert(tag, vals[i], vals[i]);
            for (std::size_t j = i + 1; j < vals.size(); ++j) {
                if (ds->function == SimilarityFunction::Equality) continue; // distinct values never equal
                const double score = similarity_score(ds->function, vals[i], vals[j], *cs);
                if (score >= ds->blocking_threshold)
                    store.insert(tag, vals[i], vals[j]);
            }
        }
    }
    return store;
}

} // namespace matchbox
