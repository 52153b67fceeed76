#ifndef ADMGAUG_AUGMENT_HPP
#define ADMGAUG_AUGMENT_HPP

#include "admgaug/admg.hpp"
#include "admgaug/dataset.hpp"
#include "admgaug/kernels.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace admgaug {

struct AugmentOptions {
    // A node survives iff its weight is >= theta (and > 0).
    double theta = 0.0;
    // Upper bound on surviving tree nodes across all depths.
    std::size_t node_cap = 10'000'000;
    // Rescale surviving weights to sum to one.
    bool renormalize = false;
};

/// Default pruning threshold 1e-3 / n.
double default_theta(std::size_t n);

/// Weighted samples emitted by the probability tree.
///
/// Sample s draws column c from source row tuple(s)[position_of_column[c]];
/// tuples are stored in topological-position order and samples appear in
/// lexicographic tuple order.
struct AugmentedDataset {
    std::vector<std::string> names;
    std::vector<std::size_t> position_of_column;
    std::size_t dims = 0;
    std::vector<std::size_t> tuples;  // size() * dims
    std::vector<double> values;       // size() * dims, dataset column order
    std::vector<double> weights;
    std::size_t surviving_nodes = 0;

    std::size_t size() const noexcept { return weights.size(); }
    std::span<const std::size_t> tuple(std::size_t s) const { return {tuples.data() + s * dims, dims}; }
    std::span<const double> row(std::size_t s) const { return {values.data() + s * dims, dims}; }
    std::size_t source_row(std::size_t s, std::size_t column) const {
        return tuples[s * dims + position_of_column[column]];
    }
};

/// Normalized kernel weights of every data row for one conditional: the
/// kernel between `query` and each row's values on `columns`, divided by the
/// sum over rows. Empty `columns` gives 1/n each; a zero sum gives all zeros.
std::vector<double> conditional_weight_row(const Dataset& data, const BandwidthPlan& plan,
                                           std::span<const std::size_t> columns, std::span<const double> query);

/// Probability tree over source-row index tuples.
///
/// Binds a dataset to an ADMG (vertex names must match column names) and a
/// bandwidth plan, and caches for each pillow column the n x n matrix of log
/// kernel factors so that edge weights at any node cost O(n |pillow|).
/// Instances are immutable after construction.
class ProbabilityTree {
public:
    ProbabilityTree(const Dataset& data, const Admg& graph, const BandwidthPlan& plan);

    std::size_t rows() const noexcept { return n_; }
    std::size_t depth() const noexcept { return d_; }
    const TopoIndexing& indexing() const noexcept { return indexing_; }
    const MarkovPillowTable& pillows() const noexcept { return pillows_; }
    // Dataset column at each topological position.
    const std::vector<std::size_t>& column_at() const noexcept { return column_at_; }

    /// Edge weights to the n children of the node `prefix` (length < depth()).
    std::vector<double> edge_weights(std::span<const std::size_t> prefix) const;

    /// Depth-first expansion with pruning; throws NodeCapExceeded.
    AugmentedDataset expand(const AugmentOptions& options = {}) const;

private:
    void fill_edge_weights(std::size_t position, std::span<const std::size_t> prefix, std::vector<double>& out) const;

    const Dataset* data_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    TopoIndexing indexing_;
    MarkovPillowTable pillows_;
    std::vector<std::size_t> column_at_;
    // log kernel factor caches, one n*n matrix per column that appears in some pillow
    std::vector<std::vector<double>> log_factor_;
};

AugmentedDataset fill_prob_tree(const Dataset& data, const Admg& graph, const BandwidthPlan& plan,
                                const AugmentOptions& options = {});

/// Every tuple weight by direct evaluation of the product formula, with
/// linear-space kernels and no tree or pruning. Weights are indexed by the
/// lexicographic rank of the tuple (topological-position order, base n).
struct BruteForceWeights {
    std::size_t n = 0;
    std::size_t dims = 0;
    std::vector<double> weights;

    std::size_t rank(std::span<const std::size_t> tuple) const;
    double at(std::span<const std::size_t> tuple) const { return weights[rank(tuple)]; }
};

// Throws TooLarge when n^D exceeds `limit`.
BruteForceWeights brute_force_weights(const Dataset& data, const Admg& graph, const BandwidthPlan& plan,
                                      std::size_t limit = 10'000'000);

double total_weight(const AugmentedDataset& aug);

/// Augmented CSV: original headers, `__weight`, then optionally one
/// `__src_<col>` column per variable with the 0-based source row.
std::string format_augmented_csv(const AugmentedDataset& aug, bool with_sources);

}  // namespace admgaug

#endif  // ADMGAUG_AUGMENT_HPP
