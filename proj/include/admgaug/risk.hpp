#ifndef ADMGAUG_RISK_HPP
#define ADMGAUG_RISK_HPP

#include "admgaug/augment.hpp"
#include "admgaug/dataset.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace admgaug {

/// Feature rows (every non-target column, in column order), targets and
/// nonnegative instance weights. Samples built from a dataset also record
/// their provenance: the original row each column was drawn from.
struct WeightedSamples {
    std::size_t features = 0;
    std::vector<double> x;  // row-major, size() * features
    std::vector<double> y;
    std::vector<double> w;
    std::size_t source_width = 0;      // 0 when provenance is unknown
    std::vector<std::size_t> sources;  // row-major, size() * source_width

    WeightedSamples() = default;
    explicit WeightedSamples(std::size_t feature_count, std::size_t source_count = 0)
        : features(feature_count), source_width(source_count) {}

    std::size_t size() const noexcept { return y.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * features, features}; }
    std::span<const std::size_t> source(std::size_t i) const {
        return {sources.data() + i * source_width, source_width};
    }
    // `source_rows` must have source_width entries.
    void add(std::span<const double> features_row, double target, double weight,
             std::span<const std::size_t> source_rows = {});
    void append(const WeightedSamples& other);
    WeightedSamples select(std::span<const std::size_t> indices) const;
};

using Predictor = std::function<double(std::span<const double>)>;

/// Pointwise loss; the objective layer only needs its value.
using Loss = std::function<double(double target, double prediction)>;

inline double squared_loss(double target, double prediction) {
    const double r = target - prediction;
    return r * r;
}

/// Split a full row into (features, target).
std::vector<double> feature_row(std::span<const double> row, std::size_t target_column);

/// Original rows with uniform weight 1/n.
WeightedSamples empirical_samples(const Dataset& data);
/// Augmented rows with their tree weights.
WeightedSamples augmented_samples(const AugmentedDataset& aug, std::size_t target_column);

/// The set an instance-weighted learner minimizes for the lambda-combined
/// objective: original rows at (1 - lambda) / n and augmented rows at
/// lambda * w. Zero-weight rows are dropped, so lambda = 0 reproduces
/// empirical_samples exactly. `aug` may be null only when lambda is 0.
WeightedSamples combined_samples(const Dataset& data, const AugmentedDataset* aug, double lambda);

/// Sum of w * loss over the samples.
double weighted_risk(const Predictor& model, const WeightedSamples& samples, const Loss& loss = squared_loss);

// Throws EmptyData.
double empirical_risk(const Predictor& model, const Dataset& data, const Loss& loss = squared_loss);
double augmented_risk(const Predictor& model, const AugmentedDataset& aug, std::size_t target_column,
                      const Loss& loss = squared_loss);

/// (1 - lambda) R_emp + lambda R_aug + regularization, with the penalty
/// value supplied by the learner and applied once. Throws LambdaOutOfRange.
double combined_objective(const Predictor& model, const Dataset& data, const AugmentedDataset& aug, double lambda,
                          double regularization, const Loss& loss = squared_loss);

}  // namespace admgaug

#endif  // ADMGAUG_RISK_HPP
