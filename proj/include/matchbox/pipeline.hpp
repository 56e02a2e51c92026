#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/blocking.hpp"
#include "matchbox/config.hpp"
#include "matchbox/csv.hpp"
#include "matchbox/error.hpp"
#include "matchbox/features.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/merge.hpp"
#include "matchbox/metrics.hpp"
#include "matchbox/mf.hpp"
#include "matchbox/similarity.hpp"
#include "matchbox/svm.hpp"

namespace matchbox {

// Re-raises any failure inside `fn` with the stage name prepended, keeping
// the original code. Every diagnostic then says which stage it came from.
template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        fail(e.code(), stage + ": " + e.message());
    }
}

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::DataError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::DataError, "cannot write " + path);
    out << content;
}

} // namespace detail

// Reads every relation's csv into one instance.
inline Instance ingest(const PipelineConfig& cfg) {
    Instance inst(cfg.catalog);
    for (const auto& [rel, path] : cfg.csv_paths)
        for (Tuple& t : load_csv(path, cfg.catalog.at(rel)))
            inst.add_tuple(rel, std::move(t));
    return inst;
}

namespace detail {

// Shared loader for the two small pair-file shapes below: checks the exact
// header, returns the data rows, and reports positions 1-based.
inline std::vector<std::vector<std::string>> load_pair_rows(
    const std::string& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::DataError, "cannot open " + path);
    std::vector<std::vector<std::string>> rows = csv_parse(in);
    std::string expected;
    for (const std::string& h : header) expected += (expected.empty() ? "" : ",") + h;
    if (rows.empty() || rows.front() != header)
        fail(ErrorCode::MalformedRow, path + ": expected header " + expected);
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].size() != header.size())
            fail(ErrorCode::MalformedRow, path + " row " + std::to_string(i + 1) +
                                              ": expected " + std::to_string(header.size()) +
                                              " cells");
    rows.erase(rows.begin());
    return rows;
}

} // namespace detail

// A labeled-pair file: "tid1,tid2,label" rows under that exact header.
inline std::vector<LabeledPair> load_labeled_pairs(const std::string& path) {
    std::vector<LabeledPair> out;
    for (const auto& cells : detail::load_pair_rows(path, {"tid1", "tid2", "label"})) {
        LabeledPair p;
        p.first = static_cast<Tid>(detail::parse_unsigned(cells[0], path + " tid1"));
        p.second = static_cast<Tid>(detail::parse_unsigned(cells[1], path + " tid2"));
        const std::uint64_t label = detail::parse_unsigned(cells[2], path + " label");
        if (label > 1)
            fail(ErrorCode::DataError, path + ": label must be 0 or 1, got " + cells[2]);
        p.label = static_cast<int>(label);
        out.push_back(p);
    }
    return out;
}

// A truth/pair file: "tid1,tid2" rows, order within a pair irrelevant.
inline PairSet load_pair_set(const std::string& path) {
    PairSet out;
    for (const auto& cells : detail::load_pair_rows(path, {"tid1", "tid2"}))
        out.insert(
            ordered_pair(static_cast<Tid>(detail::parse_unsigned(cells[0], path + " tid1")),
                         static_cast<Tid>(detail::parse_unsigned(cells[1], path + " tid2"))));
    return out;
}

inline std::string render_pair_set(const PairSet& pairs) {
    std::string out = "tid1,tid2\n";
    for (const auto& [a, b] : pairs)
        out += std::to_string(a) + "," + std::to_string(b) + "\n";
    return out;
}

// Corpus statistics for every tf-idf domain the run touches: blocking
// domains from the similarity config plus any feature using tf-idf.
inline std::map<std::string, CorpusStats> feature_stats(const Instance& inst,
                                                        const PipelineConfig& cfg) {
    std::map<std::string, CorpusStats> stats = corpus_stats_for(inst, cfg.similarity);
    std::set<std::string> wanted;
    for (const FeatureSpec& spec : cfg.features) {
        const RelationSchema& schema = cfg.catalog.at(spec.relation);
        for (const Feature& f : spec.features)
            if (f.function == SimilarityFunction::TfidfCosine)
                wanted.insert(schema.attributes()[schema.index_of(f.attribute)].domain);
    }
    const auto domains = active_domain(inst);
    for (const std::string& tag : wanted) {
        if (stats.count(tag)) continue;
        auto it = domains.find(tag);
        if (it == domains.end()) continue;
        CorpusStats& cs = stats[tag];
        for (const Value& v : it->second) cs.add_document(tokenize(v.render()));
    }
    return stats;
}

inline const FeatureSpec* feature_spec_for(const PipelineConfig& cfg,
                                           const std::string& relation) {
    for (const FeatureSpec& spec : cfg.features)
        if (spec.relation == relation) return &spec;
    return nullptr;
}

// The reconciliation registry the merge stage runs with: union-case tables
// for every declared attribute domain, with any configured "max" override
// replacing the numeric domains it names.
inline MfRegistry merge_registry(const PipelineConfig& cfg) {
    MfRegistry registry = union_case_registry(cfg.catalog);
    for (const auto& [domain, kind] : cfg.merge_mf)
        if (kind == "max") registry.add(MatchingFunctionDef::max_numeric(domain));
    return registry;
}

// Runs the configured blocking and reads candidate pairs off the blocks.
// Key-equality mode groups records directly; the rule-driven modes reset
// every record to its own block and chase the rule file to a fixpoint.
struct BlockingOutcome {
    BlockAssignment assignment;
    std::vector<CandidatePairSet> candidates;
};

inline BlockingOutcome run_blocking(const Instance& inst, const PipelineConfig& cfg,
                                    const std::string& mode,
                                    const SimilarityFactStore& sims) {
    BlockingOutcome out;
    if (mode == "sb") {
        for (const auto& [rel, attrs] : cfg.keys) {
            BlockAssignment one = sb_blocking(inst, rel, attrs);
            out.assignment.blocks.insert(one.blocks.begin(), one.blocks.end());
        }
    } else if (mode == "mdsb" || mode == "mdcb") {
        const std::string& path = mode == "mdsb" ? cfg.mdsb_rules : cfg.mdcb_rules;
        if (path.empty())
            fail(ErrorCode::ConfigError, "blocking mode " + mode + " has no rule file");
        const std::vector<MatchDependency> mds =
            parse_md_list(detail::read_text_file(path));
        out.assignment =
            apply_blocking(assign_initial_blocks(inst), mds, sims).assignment;
    } else {
        fail(ErrorCode::ConfigError, "unknown blocking mode '" + mode + "'");
    }
    out.candidates = candidate_pairs(out.assignment);
    return out;
}

inline const CandidatePairSet* candidates_for(const std::vector<CandidatePairSet>& sets,
                                              const std::string& relation) {
    for (const CandidatePairSet& s : sets)
        if (s.relation == relation) return &s;
    return nullptr;
}

// Scores one instance pair list with a trained model.
inline PairSet classify_pairs(const Instance& inst, const ClassifierBundle& bundle,
                              const std::vector<std::pair<Tid, Tid>>& pairs,
                              const std::map<std::string, CorpusStats>& stats) {
    const std::string& relation = bundle.spec.relation;
    const RelationSchema& schema = inst.catalog().at(relation);
    PairSet out;
    for (const auto& [a, b] : pairs) {
        const WeightVector wv = weight_vector(schema, inst.tuple_at(relation, a),
                                              inst.tuple_at(relation, b), bundle.spec, stats);
        if (svm_predict(bundle.model, wv) == 1) out.insert(ordered_pair(a, b));
    }
    return out;
}

// Trains on explicit labeled pairs, turning each pair into its weighted
// similarity vector against the live instance.
inline ClassifierBundle train_from_pairs(const Instance& inst, const PipelineConfig& cfg,
                                         const FeatureSpec& spec,
                                         const std::vector<LabeledPair>& labeled,
                                         const std::map<std::string, CorpusStats>& stats) {
    const RelationSchema& schema = inst.catalog().at(spec.relation);
    std::vector<TrainingExample> examples;
    for (const LabeledPair& p : labeled) {
        const WeightVector wv = weight_vector(schema, inst.tuple_at(spec.relation, p.first),
                                              inst.tuple_at(spec.relation, p.second), spec, stats);
        examples.push_back(TrainingExample{wv, p.label});
    }
    ClassifierBundle bundle;
    bundle.spec = spec;
    bundle.params = cfg.svm;
    const TrainingMatrix matrix = build_training_matrix(examples);
    bundle.model = svm_train(matrix.rows, matrix.labels, cfg.svm);
    return bundle;
}

// One full resolution pass and everything it produced.
struct PipelineResult {
    Instance instance;           // as ingested
    BlockAssignment assignment;
    std::size_t candidate_count = 0;
    std::optional<ClassifierBundle> bundle;
    DuplicatePairSet duplicates;
    std::optional<MergeResult> merged;
    std::vector<MetricsReport> metrics;
    std::vector<std::string> written; // artifact files, in write order
};

// How far run_pipeline goes: stop after pair classification, or carry on
// through record merging.
enum class PipelineStage { Classification, Full };

// Ingest -> similarity -> blocking -> classifier -> merge, writing artifacts
// into `out_dir`: blocks.csv, model.txt (when a classifier exists),
// duplicates.csv, resolved-<Relation>.csv per relation, metrics.csv. The
// truth set is optional; without it the metrics row scores the predictions
// against an empty truth (vacuous recall), which still reports the blocking
// counts. Every failure carries its stage name.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir,
                                   const std::optional<PairSet>& truth = std::nullopt,
                                   PipelineStage until = PipelineStage::Full) {
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    const auto artifact = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    PipelineResult result;
    result.instance = with_stage("ingest", [&] { return ingest(cfg); });
    const Instance& inst = result.instance;

    const SimilarityFactStore sims =
        with_stage("similarity", [&] { return materialize_sim_facts(inst, cfg.similarity); });
    const auto stats = with_stage("similarity", [&] { return feature_stats(inst, cfg); });

    BlockingOutcome blocking = with_stage(
        "blocking", [&] { return run_blocking(inst, cfg, cfg.blocking_mode, sims); });
    result.assignment = std::move(blocking.assignment);
    with_stage("blocking", [&] {
        detail::write_text_file(artifact("blocks.csv"),
                                render_blocks_report(result.assignment));
    });
    result.written.push_back(artifact("blocks.csv"));

    const CandidatePairSet* candidates =
        cfg.merge_relation.empty() ? nullptr
                                   : candidates_for(blocking.candidates, cfg.merge_relation);
    static const std::vector<std::pair<Tid, Tid>> no_pairs;
    const std::vector<std::pair<Tid, Tid>>& pairs = candidates ? candidates->pairs : no_pairs;
    result.candidate_count = pairs.size();

    with_stage("training", [&] {
        if (!cfg.model_path.empty()) {
            result.bundle = parse_model(detail::read_text_file(cfg.model_path));
        } else if (!cfg.training_path.empty()) {
            const std::vector<LabeledPair> labeled = load_labeled_pairs(cfg.training_path);
            const FeatureSpec* spec = feature_spec_for(cfg, cfg.merge_relation);
            if (!spec)
                fail(ErrorCode::ConfigError,
                     "training requires [features] for relation '" + cfg.merge_relation + "'");
            if (!labeled.empty())
                result.bundle = train_from_pairs(inst, cfg, *spec, labeled, stats);
        }
    });
    if (result.bundle) {
        with_stage("training", [&] {
            detail::write_text_file(artifact("model.txt"), render_model(*result.bundle));
        });
        result.written.push_back(artifact("model.txt"));
    }

    result.duplicates.relation = cfg.merge_relation;
    with_stage("classification", [&] {
        if (result.bundle && !pairs.empty()) {
            const PairSet predicted = classify_pairs(inst, *result.bundle, pairs, stats);
            result.duplicates.pairs.insert(predicted.begin(), predicted.end());
        }
    });
    with_stage("classification", [&] {
        PairSet predicted(result.duplicates.pairs.begin(), result.duplicates.pairs.end());
        detail::write_text_file(artifact("duplicates.csv"),
                                render_pairs_csv(cfg.merge_relation, predicted));
    });
    result.written.push_back(artifact("duplicates.csv"));

    with_stage("merging", [&] {
        if (cfg.merge_relation.empty() || until != PipelineStage::Full) return;
        const MfRegistry registry = merge_registry(cfg);
        result.merged = merge(inst, result.duplicates, registry);
        for (const auto& [rel, schema] : cfg.catalog.all()) {
            std::ostringstream out;
            save_csv(out, schema, result.merged->resolved.tuples(rel));
            detail::write_text_file(artifact("resolved-" + rel + ".csv"), out.str());
            result.written.push_back(artifact("resolved-" + rel + ".csv"));
        }
    });

    with_stage("metrics", [&] {
        const std::size_t records =
            cfg.merge_relation.empty() ? 0 : inst.tuples(cfg.merge_relation).size();
        PairSet predicted(result.duplicates.pairs.begin(), result.duplicates.pairs.end());
        result.metrics.push_back(make_metrics(cfg.blocking_mode, records, pairs.size(),
                                              predicted, truth.value_or(PairSet{})));
        detail::write_text_file(artifact("metrics.csv"), render_metrics_csv(result.metrics));
    });
    result.written.push_back(artifact("metrics.csv"));
    return result;
}

// Scores all three blocking modes on one corpus under one shared similarity
// store, one shared classifier, and one seed, so the rows differ only in
// which candidate pairs each blocking lets through.
inline std::vector<MetricsReport> compare_modes(const PipelineConfig& cfg,
                                                const PairSet& truth) {
    validate_config(cfg);
    if (cfg.merge_relation.empty())
        fail(ErrorCode::ConfigError, "mode comparison needs a [merge] relation");
    if (cfg.keys.empty() || cfg.mdsb_rules.empty() || cfg.mdcb_rules.empty())
        fail(ErrorCode::ConfigError,
             "mode comparison needs keys, mdsb_rules, and mdcb_rules");

    const Instance inst = with_stage("ingest", [&] { return ingest(cfg); });
    const SimilarityFactStore sims =
        with_stage("similarity", [&] { return materialize_sim_facts(inst, cfg.similarity); });
    const auto stats = with_stage("similarity", [&] { return feature_stats(inst, cfg); });

    const ClassifierBundle bundle = with_stage("training", [&] {
        if (!cfg.model_path.empty())
            return parse_model(detail::read_text_file(cfg.model_path));
        const FeatureSpec* spec = feature_spec_for(cfg, cfg.merge_relation);
        if (!spec)
            fail(ErrorCode::ConfigError,
                 "mode comparison requires [features] for relation '" + cfg.merge_relation +
                     "'");
        if (!cfg.training_path.empty())
            return train_from_pairs(inst, cfg, *spec, load_labeled_pairs(cfg.training_path),
                                    stats);
        // No explicit training data: learn from the truth itself — every
        // truth pair is a positive, and twice as many seeded random
        // non-truth pairs are negatives.
        if (truth.empty())
            fail(ErrorCode::ConfigError,
                 "mode comparison without training data needs a non-empty truth set");
        std::vector<LabeledPair> labeled;
        for (const auto& [a, b] : truth) labeled.push_back(LabeledPair{a, b, 1});
        const std::vector<Tuple>& rows = inst.tuples(cfg.merge_relation);
        std::mt19937_64 rng(cfg.svm.seed);
        std::size_t negatives = 0;
        std::size_t guard = 0;
        while (negatives < 2 * truth.size() && guard < 100 * truth.size() + 1000) {
            ++guard;
            const Tid a = rows[rng() % rows.size()].tid;
            const Tid b = rows[rng() % rows.size()].tid;
            if (a == b || truth.count(ordered_pair(a, b))) continue;
            labeled.push_back(LabeledPair{ordered_pair(a, b).first,
                                          ordered_pair(a, b).second, 0});
            ++negatives;
        }
        return train_from_pairs(inst, cfg, *spec, labeled, stats);
    });

    std::vector<MetricsReport> rows;
    for (const std::string mode : {"sb", "mdsb", "mdcb"}) {
        const BlockingOutcome blocking = with_stage(
            "blocking", [&] { return run_blocking(inst, cfg, mode, sims); });
        const CandidatePairSet* candidates =
            candidates_for(blocking.candidates, cfg.merge_relation);
        static const std::vector<std::pair<Tid, Tid>> no_pairs;
        const auto& pairs = candidates ? candidates->pairs : no_pairs;
        const PairSet predicted = with_stage(
            "classification", [&] { return classify_pairs(inst, bundle, pairs, stats); });
        rows.push_back(make_metrics(mode, inst.tuples(cfg.merge_relation).size(),
                                    pairs.size(), predicted, truth));
    }
    return rows;
}

} // namespace matchbox
