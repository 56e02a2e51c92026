#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "matchbox/error.hpp"
#include "matchbox/features.hpp"

namespace matchbox {

struct SvmParams {
    double C = 10.0;
    std::size_t max_epochs = 500;
    double tol = 1e-9;
    std::uint64_t seed = 0; // recorded for provenance; training draws no randomness

    bool operator==(const SvmParams&) const = default;
};

// Linear decision rule: duplicate iff weights . v + bias > 0. `converged`
// reports whether successive epoch losses settled within tolerance; callers
// treat false as a warning, not a failure.
struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;     // regularization strength the trainer used
    double final_loss = 0.0; // best objective value reached
    std::size_t epochs = 0;
    bool converged = false;
    std::vector<double> epoch_losses; // best-so-far objective after each epoch

    bool operator==(const SvmModel&) const = default;
};

// Regularized hinge objective: lambda/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)).
// Labels are +-1 here; the bias is not regularized.
inline double hinge_objective(const std::vector<double>& w, double b,
                              const std::vector<std::vector<double>>& rows,
                              const std::vector<int>& ys, double lambda) {
    double reg = 0.0;
    for (double wi : w) reg += wi * wi;
    double hinge = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double margin = b;
        for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * rows[i][j];
        hinge += std::max(0.0, 1.0 - ys[i] * margin);
    }
    return 0.5 * lambda * reg + hinge / static_cast<double>(rows.size());
}

// Subgradient of the objective at (w, b); examples sitting exactly on the
// margin contribute nothing (the zero element of the subdifferential).
inline std::pair<std::vector<double>, double> hinge_subgradient(
    const std::vector<double>& w, double b, const std::vector<std::vector<double>>& rows,
    const std::vector<int>& ys, double lambda) {
    std::vector<double> gw(w.size(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double margin = b;
        for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * rows[i][j];
        if (ys[i] * margin >= 1.0) continue;
        for (std::size_t j = 0; j < w.size(); ++j) gw[j] -= ys[i] * rows[i][j];
        gb -= ys[i];
    }
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < w.size(); ++j) gw[j] = lambda * w[j] + gw[j] / n;
    return {std::move(gw), gb / n};
}

// Full-batch subgradient descent from zero with step 1/(lambda t), where
// lambda = 1/(C n) and t counts epochs. The returned weights are the
// best-objective iterate seen (the raw iterates oscillate around the
// optimum); convergence means two successive iterates' losses agreed within
// tolerance.
inline SvmModel svm_train(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels, const SvmParams& params = {}) {
    if (rows.size() != labels.size())
        fail(ErrorCode::DimensionMismatch,
             std::to_string(rows.size()) + " example rows vs " +
                 std::to_string(labels.size()) + " labels");
    for (const auto& row : rows)
        if (row.size() != rows.front().size())
            fail(ErrorCode::RaggedVectors, "training rows differ in feature count");
    bool saw[2] = {false, false};
    for (int l : labels) {
        if (l != 0 && l != 1)
            fail(ErrorCode::DataError, "training label must be 0 or 1, got " + std::to_string(l));
        saw[l] = true;
    }
    if (!saw[0] || !saw[1])
        fail(ErrorCode::SingleClassTraining,
             "training needs at least one example of each label");

    std::vector<int> ys;
    ys.reserve(labels.size());
    for (int l : labels) ys.push_back(l == 1 ? 1 : -1);

    const double n = static_cast<double>(rows.size());
    const double lambda = 1.0 / (params.C * n);

    SvmModel model;
    model.lambda = lambda;
    std::vector<double> w(rows.front().size(), 0.0);
    double b = 0.0;
    model.weights = w;
    model.bias = b;
    double best = hinge_objective(w, b, rows, ys, lambda);
    double previous = best;
    model.final_loss = best;

    for (std::size_t t = 1; t <= params.max_epochs; ++t) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        auto [gw, gb] = hinge_subgradient(w, b, rows, ys, lambda);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= eta * gw[j];
        b -= eta * gb;

        const double loss = hinge_objective(w, b, rows, ys, lambda);
        if (loss < best) {
            best = loss;
            model.weights = w;
            model.bias = b;
            model.final_loss = best;
        }
        model.epoch_losses.push_back(best);
        model.epochs = t;
        if (std::fabs(loss - previous) <= params.tol) {
            model.converged = true;
            break;
        }
        previous = loss;
    }
    return model;
}

inline int svm_predict(const SvmModel& model, const std::vector<double>& entries) {
    if (entries.size() != model.weights.size())
        fail(ErrorCode::DimensionMismatch,
             "vector has " + std::to_string(entries.size()) + " entries, model expects " +
                 std::to_string(model.weights.size()));
    double score = model.bias;
    for (std::size_t j = 0; j < entries.size(); ++j) score += model.weights[j] * entries[j];
    return score > 0.0 ? 1 : 0;
}

inline int svm_predict(const SvmModel& model, const WeightVector& v) {
    return svm_predict(model, v.entries);
}

// ---------------------------------------------------------------------------
// Model file: versioned line-oriented text tying the feature spec to the
// trained weights, so a saved model can score new pairs on its own.
// ---------------------------------------------------------------------------

struct ClassifierBundle {
    FeatureSpec spec;
    SvmParams params;
    SvmModel model;

    bool operator==(const ClassifierBundle&) const = default;
};

namespace detail {

// Shortest round-trip decimal form, so rendering is byte-stable and parsing
// restores the exact double.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::DataError, "bad " + what + " '" + s + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(ErrorCode::DataError, "bad " + what + " '" + s + "'");
    return v;
}

} // namespace detail

inline std::string render_model(const ClassifierBundle& bundle) {
    std::string out = "matchbox-model 1\n";
    out += "relation " + bundle.spec.relation + "\n";
    for (const Feature& f : bundle.spec.features)
        out += "feature " + f.attribute + " " + similarity_function_name(f.function) +
               " " + detail::format_double(f.weight) + "\n";
    out += "C " + detail::format_double(bundle.params.C) + "\n";
    out += "max_epochs " + std::to_string(bundle.params.max_epochs) + "\n";
    out += "tol " + detail::format_double(bundle.params.tol) + "\n";
    out += "seed " + std::to_string(bundle.params.seed) + "\n";
    out += "lambda " + detail::format_double(bundle.model.lambda) + "\n";
    out += "epochs " + std::to_string(bundle.model.epochs) + "\n";
    out += std::string("converged ") + (bundle.model.converged ? "1" : "0") + "\n";
    out += "final_loss " + detail::format_double(bundle.model.final_loss) + "\n";
    out += "bias " + detail::format_double(bundle.model.bias) + "\n";
    out += "weights";
    for (double w : bundle.model.weights) out += " " + detail::format_double(w);
    out += "\n";
    return out;
}

inline ClassifierBundle parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "matchbox-model 1")
        fail(ErrorCode::DataError, "model file: missing or unsupported version header");

    ClassifierBundle bundle;
    bool saw_weights = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        std::string rest;
        std::getline(fields, rest);
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        if (key == "relation") {
            bundle.spec.relation = rest;
        } else if (key == "feature") {
            std::istringstream parts(rest);
            Feature f;
            std::string function, weight;
            if (!(parts >> f.attribute >> function >> weight))
                fail(ErrorCode::DataError, "model file: bad feature line '" + line + "'");
            const auto fn = similarity_function_from_name(function);
            if (!fn)
                fail(ErrorCode::DataError,
                     "model file: unknown similarity function '" + function + "'");
            f.function = *fn;
            f.weight = detail::parse_double(weight, "feature weight");
            bundle.spec.features.push_back(std::move(f));
        } else if (key == "C") {
            bundle.params.C = detail::parse_double(rest, "C");
        } else if (key == "max_epochs") {
            bundle.params.max_epochs = detail::parse_unsigned(rest, "max_epochs");
        } else if (key == "tol") {
            bundle.params.tol = detail::parse_double(rest, "tol");
        } else if (key == "seed") {
            bundle.params.seed = detail::parse_unsigned(rest, "seed");
        } else if (key == "lambda") {
            bundle.model.lambda = detail::parse_double(rest, "lambda");
        } else if (key == "epochs") {
            bundle.model.epochs = detail::parse_unsigned(rest, "epochs");
        } else if (key == "converged") {
            bundle.model.converged = rest == "1";
        } else if (key == "final_loss") {
            bundle.model.final_loss = detail::parse_double(rest, "final_loss");
        } else if (key == "bias") {
            bundle.model.bias = detail::parse_double(rest, "bias");
        } else if (key == "weights") {
            std::istringstream parts(rest);
            std::string token;
            while (parts >> token)
                bundle.model.weights.push_back(detail::parse_double(token, "weight"));
            saw_weights = true;
        } else {
            fail(ErrorCode::DataError, "model file: unknown key '" + key + "'");
        }
    }
    if (!saw_weights)
        fail(ErrorCode::DataError, "model file: missing weights line");
    if (bundle.spec.features.size() != bundle.model.weights.size())
        fail(ErrorCode::DataError, "model file: " + std::to_string(bundle.spec.features.size()) +
                                       " features vs " +
                                       std::to_string(bundle.model.weights.size()) +
                                       " weights");
    return bundle;
}

// Training matrix as CSV, one row per example pair.
inline std::string render_training_csv(const std::vector<TrainingExample>& examples,
                                       const FeatureSpec& spec) {
    std::string out = "tid1,tid2";
    for (const Feature& f : spec.features) out += "," + f.attribute;
    out += ",label\n";
    for (const TrainingExample& e : examples) {
        out += std::to_string(e.vector.id.first) + "," + std::to_string(e.vector.id.second);
        for (double entry : e.vector.entries) out += "," + detail::format_double(entry);
        out += "," + std::to_string(e.label) + "\n";
    }
    return out;
}

} // namespace matchbox
