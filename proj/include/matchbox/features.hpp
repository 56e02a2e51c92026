#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/instance.hpp"
#include "matchbox/schema.hpp"
#include "matchbox/similarity.hpp"
#include "matchbox/value.hpp"

namespace matchbox {

// One classifier feature: a weighted similarity function over an attribute.
struct Feature {
    std::string attribute;
    SimilarityFunction function = SimilarityFunction::Equality;
    double weight = 1.0;

    bool operator==(const Feature&) const = default;
};

// Ordered feature list for one relation's record pairs.
struct FeatureSpec {
    std::string relation;
    std::vector<Feature> features;

    bool operator==(const FeatureSpec&) const = default;
};

inline void validate_feature_spec(const FeatureSpec& spec, const Catalog& catalog) {
    const RelationSchema& schema = catalog.at(spec.relation);
    if (spec.features.empty())
        fail(ErrorCode::ConfigError,
             "feature spec for '" + spec.relation + "' lists no features");
    for (const Feature& f : spec.features) {
        if (f.weight <= 0.0)
            fail(ErrorCode::ConfigError, "feature '" + f.attribute +
                                             "' has non-positive weight " +
                                             std::to_string(f.weight));
        const AttributeKind kind = schema.attributes()[schema.index_of(f.attribute)].kind;
        if (kind == AttributeKind::ReferenceId || kind == AttributeKind::BlockNumber)
            fail(ErrorCode::ConfigError,
                 "feature '" + f.attribute + "' targets a record id or block column");
    }
}

// Per-feature weighted similarity scores for one record pair; the
// classifier's input.
struct WeightVector {
    std::pair<Tid, Tid> id;
    std::vector<double> entries;

    bool operator==(const WeightVector&) const = default;
};

// Entry i is weight_i * similarity_i applied to the pair's values at the
// feature's attribute; a missing value on either side scores 0. Symmetric in
// the two records except for the recorded id order.
inline WeightVector weight_vector(const RelationSchema& schema, const Tuple& r1,
                                  const Tuple& r2, const FeatureSpec& spec,
                                  const std::map<std::string, CorpusStats>& stats) {
    static const CorpusStats no_stats;
    WeightVector v;
    v.id = {r1.tid, r2.tid};
    for (const Feature& f : spec.features) {
        const std::size_t index = schema.index_of(f.attribute);
        const std::string& domain = schema.attributes()[index].domain;
        auto it = stats.find(domain);
        const CorpusStats& cs = it == stats.end() ? no_stats : it->second;
        v.entries.push_back(
            f.weight * similarity_score(f.function, r1.values[index], r2.values[index], cs));
    }
    return v;
}

struct TrainingExample {
    WeightVector vector;
    int label = 0; // 1 = duplicate pair, 0 = distinct

    bool operator==(const TrainingExample&) const = default;
};

// Row-per-example, column-per-feature layout with aligned labels.
struct TrainingMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    bool operator==(const TrainingMatrix&) const = default;
};

inline TrainingMatrix build_training_matrix(const std::vector<TrainingExample>& examples) {
    TrainingMatrix m;
    for (const TrainingExample& e : examples) {
        if (!m.rows.empty() && e.vector.entries.size() != m.rows.front().size())
            fail(ErrorCode::RaggedVectors,
                 "weight vector for pair (" + std::to_string(e.vector.id.first) + "," +
                     std::to_string(e.vector.id.second) + ") has " +
                     std::to_string(e.vector.entries.size()) + " entries, expected " +
                     std::to_string(m.rows.front().size()));
        if (e.label != 0 && e.label != 1)
            fail(ErrorCode::DataError,
                 "training label must be 0 or 1, got " + std::to_string(e.label));
        m.rows.push_back(e.vector.entries);
        m.labels.push_back(e.label);
    }
    return m;
}

namespace detail {

// Swaps one example of the missing class into `lacking` without emptying any
// class of the donor half; no-op when no safe swap exists.
inline void restore_class(std::vector<TrainingExample>& lacking,
                          std::vector<TrainingExample>& donor, int label) {
    const auto count = [&](const std::vector<TrainingExample>& half, int l) {
        return std::count_if(half.begin(), half.end(),
                             [&](const TrainingExample& e) { return e.label == l; });
    };
    if (lacking.empty() || count(lacking, label) > 0 || count(donor, label) < 2) return;
    for (auto& give : donor) {
        if (give.label != label) continue;
        for (auto& take : lacking) {
            if (count(lacking, take.label) < 2) continue;
            std::swap(give, take);
            return;
        }
        return;
    }
}

} // namespace detail

// Deterministic seeded shuffle, cut at ceil(0.7 n); afterwards each half gets
// at least one example of each class back whenever the counts allow it.
inline std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>>
split_70_30(std::vector<TrainingExample> examples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::shuffle(examples.begin(), examples.end(), rng);
    const std::size_t cut = (7 * examples.size() + 9) / 10;
    std::vector<TrainingExample> train(examples.begin(), examples.begin() + cut);
    std::vector<TrainingExample> test(examples.begin() + cut, examples.end());
    for (int label : {0, 1}) {
        detail::restore_class(train, test, label);
        detail::restore_class(test, train, label);
    }
    return {std::move(train), std::move(test)};
}

} // namespace matchbox
