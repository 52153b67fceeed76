#ifndef ADMGAUG_GBRT_HPP
#define ADMGAUG_GBRT_HPP

#include "admgaug/risk.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace admgaug {

struct GbrtConfig {
    std::size_t max_leaves = 64;
    std::size_t rounds = 100;
    double l2 = 1.0;
    double learning_rate = 0.3;
    double min_child_weight = 0.0;

    // Throws DegenerateConfig.
    void check() const;
    bool operator==(const GbrtConfig&) const = default;
};

/// Node of an axis-aligned regression tree. Internal nodes send x to `left`
/// when x[feature] < threshold.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // root at 0

    double predict(std::span<const double> x) const;
    std::size_t leaf_count() const;
    bool operator==(const RegressionTree&) const = default;
};

/// prediction(x) = base_score + learning_rate * sum_k tree_k(x)
struct GbrtModel {
    double base_score = 0.0;
    double learning_rate = 1.0;
    std::size_t features = 0;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<RegressionTree> trees;

    // Throws DimensionMismatch.
    double predict(std::span<const double> x) const;
    /// Prediction using only the first `rounds` trees.
    double predict_rounds(std::span<const double> x, std::size_t rounds) const;
    /// sum_k (rho / 2) ||learning_rate * leaf values of tree k||^2
    double regularization(double rho) const;
    Predictor predictor() const;

    bool operator==(const GbrtModel&) const = default;
};

using RoundCallback = std::function<void(std::size_t round, const GbrtModel& model)>;

/// Second-order boosting on the weighted squared loss.
///
/// Per round, with residual r = f(x) - y, the gradient statistics are
/// G = sum w r and H = sum w; each tree grows best-first (largest gain,
/// ties to the older leaf) up to max_leaves by exact greedy search over
/// midpoints between consecutive observed values, and a leaf stores
/// -G / (H + l2). Zero-weight samples are dropped and identical
/// (features, target) samples merged by summing weights before fitting.
/// The callback, when given, runs after every round.
GbrtModel fit(const WeightedSamples& samples, const GbrtConfig& config, const RoundCallback& on_round = {});

/// Cartesian product of round counts and l2 strengths on top of `base`, rounds varying fastest.
std::vector<GbrtConfig> make_grid(const std::vector<std::size_t>& rounds, const std::vector<double>& l2,
                                  const GbrtConfig& base = {});
/// The grid searched when none is given: rounds {10, 50, 250, 1250} x l2 {1, 10, 100, 1000}, 64 leaves.
std::vector<GbrtConfig> default_grid();
/// Parses "K=10,50;rho=1,10" (either part optional) into a grid over `base`.
std::vector<GbrtConfig> parse_grid(const std::string& spec, const GbrtConfig& base = {});

struct CvCell {
    GbrtConfig config;
    std::vector<double> fold_mse;
    double mean_mse = 0.0;
};

struct CvResult {
    std::size_t best_index = 0;
    std::vector<CvCell> cells;  // grid order

    const GbrtConfig& best() const { return cells.at(best_index).config; }
};

/// Fold assignment for k-fold CV: shuffle with the seed, order by weight
/// (descending, stable) and deal folds round-robin so each fold receives a
/// similar share of the total weight.
std::vector<std::size_t> assign_folds(std::span<const double> weights, std::size_t folds, std::uint64_t seed);

/// Selects the config with the lowest mean weighted validation MSE over the
/// folds; ties go to the earlier grid entry. Configs that differ only in
/// the round count share one boosting run per fold.
///
/// Samples that carry provenance are folded by original row: a sample is
/// validated in a fold only when all of its source rows belong to it and is
/// trained on only when none do. Otherwise each sample is its own unit.
/// Throws TooFewSamples when fewer than `folds` samples (or original rows)
/// carry positive weight.
CvResult grid_search_cv(const WeightedSamples& samples, const std::vector<GbrtConfig>& grid, std::size_t folds,
                        std::uint64_t seed);

std::string model_to_json(const GbrtModel& model);
// Throws ParseError.
GbrtModel model_from_json(const std::string& text);

}  // namespace admgaug

#endif  // ADMGAUG_GBRT_HPP
