#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "matchbox/instance.hpp"
#include "matchbox/metrics.hpp"
#include "matchbox/schema.hpp"

namespace matchbox {

// Knobs for the synthetic bibliography generator. Rates are probabilities in
// [0, 1]; `typo_share` splits the duplicates between character-level noise
// and dropped trailing words.
struct SynthParams {
    std::size_t authors = 150;
    std::size_t papers = 200;
    double author_duplicate_rate = 0.25;
    double paper_duplicate_rate = 0.25;
    double typo_share = 0.6;
    std::uint64_t seed = 0;
};

// A generated corpus plus the ground truth that generation makes free:
// each duplicate is recorded against the record it was derived from.
struct SynthCorpus {
    Catalog catalog;
    Instance instance;
    PairSet author_truth;
    PairSet paper_truth;
};

namespace detail {

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline bool flip(std::mt19937_64& rng, double rate) {
    return static_cast<double>(rng() % 10000) < rate * 10000.0;
}

// Single character-level edit: swap, drop, or double one character.
inline std::string typo(std::mt19937_64& rng, const std::string& s) {
    if (s.size() < 2) return s + s;
    std::string out = s;
    const std::size_t i = pick(rng, s.size() - 1);
    switch (pick(rng, 3)) {
    case 0: std::swap(out[i], out[i + 1]); break;
    case 1: out.erase(i, 1); break;
    default: out.insert(i, 1, out[i]); break;
    }
    return out;
}

// Drops the last whitespace-separated word, falling back to a typo for
// single-word strings. Keeps a long shared prefix, so prefix-weighted
// similarity stays high while equality breaks.
inline std::string abbreviate(std::mt19937_64& rng, const std::string& s) {
    const std::size_t cut = s.rfind(' ');
    if (cut == std::string::npos || cut == 0) return typo(rng, s);
    return s.substr(0, cut);
}

inline std::string perturb(std::mt19937_64& rng, double typo_share, const std::string& s) {
    return flip(rng, typo_share) ? typo(rng, s) : abbreviate(rng, s);
}

inline Catalog synth_catalog() {
    Catalog catalog;
    catalog.add({"Author",
                 {{"aid", AttributeKind::ReferenceId, false, ""},
                  {"name", AttributeKind::ShortString, false, ""},
                  {"aff", AttributeKind::ShortString, false, ""},
                  {"abl", AttributeKind::BlockNumber, false, ""}}});
    catalog.add({"Paper",
                 {{"pid", AttributeKind::ReferenceId, false, ""},
                  {"title", AttributeKind::ShortString, false, ""},
                  {"year", AttributeKind::NumericString, false, ""},
                  {"pbl", AttributeKind::BlockNumber, false, ""}}});
    catalog.add({"PaperAuthor",
                 {{"paid", AttributeKind::ReferenceId, false, ""},
                  {"pid", AttributeKind::NumericString, false, ""},
                  {"aid", AttributeKind::NumericString, false, ""},
                  {"name", AttributeKind::ShortString, false, ""},
                  {"aff", AttributeKind::ShortString, false, ""}}});
    return catalog;
}

inline const std::vector<std::string>& given_names() {
    static const std::vector<std::string> pool = {
        "Alice",  "Bruno",  "Carla",  "Diego", "Elena",  "Farid",  "Grace",  "Hakim",
        "Irene",  "Jonas",  "Katya",  "Liang", "Marta",  "Nadia",  "Omar",   "Priya",
        "Quinn",  "Rosa",   "Samir",  "Tomas", "Ulrike", "Viktor", "Wenjie", "Yusuf"};
    return pool;
}

inline const std::vector<std::string>& surnames() {
    static const std::vector<std::string> pool = {
        "Abbott",   "Barros",  "Castillo", "Dorsey",   "Eriksen",  "Fontaine", "Galvan",
        "Hertz",    "Iwata",   "Jensen",   "Kovacs",   "Lindqvist", "Moreau",  "Novak",
        "Okafor",   "Petrova", "Quintero", "Rahman",   "Sorensen", "Takeda",   "Ueda",
        "Vasquez",  "Weber",   "Xu",       "Yamada",   "Zhang",    "Keller",   "Braun",
        "Silva",    "Costa",   "Haddad",   "Nilsen",   "Ferrari",  "Dubois",   "Olsen",
        "Schmidt",  "Tanaka",  "Ivanov",   "Larsen",   "Meyer"};
    return pool;
}

inline const std::vector<std::string>& title_words() {
    static const std::vector<std::string> pool = {
        "adaptive",   "bayesian",  "collective", "distributed", "efficient", "federated",
        "graphical",  "heuristic", "incremental", "joint",      "kernel",    "latent",
        "modular",    "neural",    "optimal",    "probabilistic", "quantized", "robust",
        "scalable",   "temporal",  "unified",    "variational", "weighted",  "inference",
        "matching",   "retrieval", "clustering", "estimation",  "resolution", "alignment"};
    return pool;
}

inline const std::vector<std::string>& affiliations() {
    static const std::vector<std::string> pool = {
        "Aalto University",     "Univ of Bordeaux",   "Carleton College",
        "Dresden Institute",    "Evora Polytechnic",  "Fudan University",
        "Galway Institute",     "Hanyang University", "Ibadan College",
        "Jagiellonian University", "Kyoto Institute", "Lund University"};
    return pool;
}

inline std::string synth_name(std::mt19937_64& rng) {
    return given_names()[pick(rng, given_names().size())] + " " +
           surnames()[pick(rng, surnames().size())];
}

inline std::string synth_title(std::mt19937_64& rng) {
    const std::size_t words = 4 + pick(rng, 3);
    std::string title;
    for (std::size_t w = 0; w < words; ++w) {
        if (w > 0) title += ' ';
        title += title_words()[pick(rng, title_words().size())];
    }
    return title;
}

} // namespace detail

// Builds a three-relation bibliography with seeded duplicates. Every record
// spawns at most one duplicate; a duplicate perturbs one payload attribute
// and keeps the rest, and the (original, duplicate) id pair goes into the
// ground truth for its relation. Link rows copy the referenced author's
// name and affiliation verbatim, so cross-relation joins stay intact.
inline SynthCorpus generate_synth(const SynthParams& params) {
    SynthCorpus corpus;
    corpus.catalog = detail::synth_catalog();
    corpus.instance = Instance(corpus.catalog);
    std::mt19937_64 rng(params.seed);
    Tid next = 1;

    struct AuthorRow {
        Tid tid;
        std::string name;
        std::string aff;
    };
    struct PaperRow {
        Tid tid;
        std::string title;
        std::string year;
        std::vector<std::size_t> author_slots; // indexes into `authors`
    };
    std::vector<AuthorRow> authors;
    std::vector<PaperRow> papers;

    for (std::size_t i = 0; i < params.authors; ++i) {
        authors.push_back({next++, detail::synth_name(rng),
                           detail::affiliations()[detail::pick(
                               rng, detail::affiliations().size())]});
    }
    for (std::size_t i = 0; i < params.papers; ++i) {
        PaperRow row;
        row.tid = next++;
        row.title = detail::synth_title(rng);
        row.year = std::to_string(1990 + detail::pick(rng, 26));
        const std::size_t count = 1 + detail::pick(rng, 3);
        for (std::size_t a = 0; a < count; ++a)
            row.author_slots.push_back(detail::pick(rng, authors.size()));
        papers.push_back(row);
    }

    // Duplicates come after all originals so the original always has the
    // smaller id; merging then keeps the original as the survivor.
    const std::size_t original_authors = authors.size();
    for (std::size_t i = 0; i < original_authors; ++i) {
        if (!detail::flip(rng, params.author_duplicate_rate)) continue;
        AuthorRow dup = authors[i];
        dup.tid = next++;
        dup.name = detail::perturb(rng, params.typo_share, dup.name);
        corpus.author_truth.insert(ordered_pair(authors[i].tid, dup.tid));
        authors.push_back(dup);
    }
    const std::size_t original_papers = papers.size();
    for (std::size_t i = 0; i < original_papers; ++i) {
        if (!detail::flip(rng, params.paper_duplicate_rate)) continue;
        PaperRow dup = papers[i];
        dup.tid = next++;
        dup.title = detail::perturb(rng, params.typo_share, dup.title);
        corpus.paper_truth.insert(ordered_pair(papers[i].tid, dup.tid));
        papers.push_back(dup);
    }

    for (const AuthorRow& a : authors) {
        corpus.instance.add_tuple(
            "Author", Tuple{a.tid,
                            {Value::atomic(std::to_string(a.tid)), Value::atomic(a.name),
                             Value::atomic(a.aff), Value::atomic(std::to_string(a.tid))}});
    }
    for (const PaperRow& p : papers) {
        corpus.instance.add_tuple(
            "Paper", Tuple{p.tid,
                           {Value::atomic(std::to_string(p.tid)), Value::atomic(p.title),
                            Value::atomic(p.year), Value::atomic(std::to_string(p.tid))}});
    }
    for (const PaperRow& p : papers) {
        for (std::size_t slot : p.author_slots) {
            const AuthorRow& a = authors[slot];
            const Tid tid = next++;
            corpus.instance.add_tuple(
                "PaperAuthor", Tuple{tid,
                                     {Value::atomic(std::to_string(tid)),
                                      Value::atomic(std::to_string(p.tid)),
                                      Value::atomic(std::to_string(a.tid)),
                                      Value::atomic(a.name), Value::atomic(a.aff)}});
        }
    }
    return corpus;
}

} // namespace matchbox
