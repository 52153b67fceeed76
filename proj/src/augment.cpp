#include "admgaug/augment.hpp"

#include "admgaug/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace admgaug {

namespace {

// exp-normalize a vector of log kernel values in place; all -inf -> all zero
void normalize_logs(std::vector<double>& v) {
    const double top = *std::max_element(v.begin(), v.end());
    if (top == -std::numeric_limits<double>::infinity()) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    double sum = 0.0;
    for (auto& x : v) {
        x = std::exp(x - top);
        sum += x;
    }
    for (auto& x : v) x /= sum;
}

std::vector<std::size_t> match_columns(const Dataset& data, const Admg& graph) {
    if (graph.size() != data.cols()) {
        throw Error(Errc::InvalidArgument, "graph has " + std::to_string(graph.size()) + " vertices but data has " +
                                               std::to_string(data.cols()) + " columns");
    }
    std::vector<std::size_t> column_of_vertex(graph.size());
    for (std::size_t v = 0; v < graph.size(); ++v) {
        const auto c = data.find_column(graph.vertices()[v]);
        if (!c) throw Error(Errc::UnknownVertex, "graph vertex '" + graph.vertices()[v] + "' is not a data column");
        column_of_vertex[v] = *c;
    }
    return column_of_vertex;
}

}  // namespace

double default_theta(std::size_t n) { return n == 0 ? 0.0 : 1e-3 / static_cast<double>(n); }

std::vector<double> conditional_weight_row(const Dataset& data, const BandwidthPlan& plan,
                                           std::span<const std::size_t> columns, std::span<const double> query) {
    const std::size_t n = data.rows();
    if (n == 0) return {};
    if (query.size() != columns.size()) throw Error(Errc::DimensionMismatch, "query does not match the column set");
    if (columns.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));

    std::vector<double> logs(n, 0.0);
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto& entry = plan.at(columns[k]);
        for (std::size_t i = 0; i < n; ++i) logs[i] += log_kernel_factor(entry, query[k], data.at(i, columns[k]));
    }
    normalize_logs(logs);
    return logs;
}

ProbabilityTree::ProbabilityTree(const Dataset& data, const Admg& graph, const BandwidthPlan& plan)
    : data_(&data), n_(data.rows()), d_(data.cols()) {
    const auto column_of_vertex = match_columns(data, graph);
    if (plan.size() != data.cols()) {
        throw Error(Errc::PlanGraphMismatch, "bandwidth plan covers " + std::to_string(plan.size()) + " of " +
                                                 std::to_string(data.cols()) + " columns");
    }
    indexing_ = validate(graph);
    pillows_ = markov_pillow(graph, indexing_);
    column_at_.resize(d_);
    for (std::size_t pos = 0; pos < d_; ++pos) column_at_[pos] = column_of_vertex[indexing_.order[pos]];

    log_factor_.resize(d_);
    for (std::size_t pos = 0; pos < d_; ++pos) {
        for (auto p : pillows_[pos]) {
            const auto c = column_at_[p];
            auto& cache = log_factor_[c];
            if (!cache.empty()) continue;
            const auto& entry = plan.at(c);
            if (entry.kind == KernelKind::Gaussian && !(entry.bandwidth > 0.0)) {
                throw Error(Errc::PlanGraphMismatch, "non-positive bandwidth for column '" + data.names()[c] + "'");
            }
            cache.resize(n_ * n_);
            for (std::size_t a = 0; a < n_; ++a) {
                for (std::size_t b = 0; b < n_; ++b) cache[a * n_ + b] = log_kernel_factor(entry, data.at(a, c), data.at(b, c));
            }
        }
    }
}

void ProbabilityTree::fill_edge_weights(std::size_t position, std::span<const std::size_t> prefix,
                                        std::vector<double>& out) const {
    out.assign(n_, 0.0);
    const auto& pillow = pillows_[position];
    if (pillow.empty()) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n_));
        return;
    }
    for (auto p : pillow) {
        const double* row = log_factor_[column_at_[p]].data() + prefix[p] * n_;
        for (std::size_t b = 0; b < n_; ++b) out[b] += row[b];
    }
    normalize_logs(out);
}

std::vector<double> ProbabilityTree::edge_weights(std::span<const std::size_t> prefix) const {
    if (prefix.size() >= d_) throw Error(Errc::InvalidArgument, "prefix is already a leaf");
    for (auto i : prefix) {
        if (i >= n_) throw Error(Errc::InvalidArgument, "row index out of range");
    }
    std::vector<double> out;
    fill_edge_weights(prefix.size(), prefix, out);
    return out;
}

AugmentedDataset ProbabilityTree::expand(const AugmentOptions& options) const {
    if (!(options.theta >= 0.0 && options.theta < 1.0)) {
        throw Error(Errc::InvalidArgument, "pruning threshold must lie in [0, 1)");
    }
    AugmentedDataset aug;
    aug.names = data_->names();
    aug.dims = d_;
    aug.position_of_column.resize(d_);
    for (std::size_t pos = 0; pos < d_; ++pos) aug.position_of_column[column_at_[pos]] = pos;
    if (n_ == 0 || d_ == 0) return aug;

    std::vector<std::vector<double>> scratch(d_);
    std::vector<std::size_t> prefix(d_, 0);
    std::size_t live = 0;

    // recursion depth is bounded by the number of variables
    auto visit = [&](auto&& self, std::size_t position, double weight) -> void {
        auto& children = scratch[position];
        fill_edge_weights(position, std::span(prefix.data(), position), children);
        for (std::size_t b = 0; b < n_; ++b) {
            const double w = children[b] * weight;
            if (!(w > 0.0) || w < options.theta) continue;
            if (++live > options.node_cap) {
                throw Error(Errc::NodeCapExceeded, "probability tree exceeds " + std::to_string(options.node_cap) +
                                                       " live nodes; raise the cap or the pruning threshold");
            }
            prefix[position] = b;
            if (position + 1 == d_) {
                aug.tuples.insert(aug.tuples.end(), prefix.begin(), prefix.end());
                for (std::size_t c = 0; c < d_; ++c) aug.values.push_back(data_->at(prefix[aug.position_of_column[c]], c));
                aug.weights.push_back(w);
            } else {
                self(self, position + 1, w);
            }
        }
    };
    visit(visit, 0, 1.0);
    aug.surviving_nodes = live;

    if (options.renormalize) {
        const double total = total_weight(aug);
        if (total > 0.0) {
            for (auto& w : aug.weights) w /= total;
        }
    }
    return aug;
}

AugmentedDataset fill_prob_tree(const Dataset& data, const Admg& graph, const BandwidthPlan& plan,
                                const AugmentOptions& options) {
    return ProbabilityTree(data, graph, plan).expand(options);
}

std::size_t BruteForceWeights::rank(std::span<const std::size_t> tuple) const {
    std::size_t r = 0;
    for (auto i : tuple) r = r * n + i;
    return r;
}

BruteForceWeights brute_force_weights(const Dataset& data, const Admg& graph, const BandwidthPlan& plan,
                                      std::size_t limit) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const auto column_of_vertex = match_columns(data, graph);
    const auto indexing = validate(graph);
    const auto pillows = markov_pillow(graph, indexing);

    double count = 1.0;
    for (std::size_t j = 0; j < d; ++j) count *= static_cast<double>(n);
    if (count > static_cast<double>(limit)) {
        throw Error(Errc::TooLarge, "n^D = " + format_double(count) + " tuples exceeds the enumeration limit");
    }

    // K(x - y) for one coordinate, evaluated directly
    auto kernel = [&](std::size_t column, double x, double y) {
        const auto& entry = plan.at(column);
        if (entry.kind == KernelKind::Identity) return x == y ? 1.0 : 0.0;
        const double u = (x - y) / entry.bandwidth;
        return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * entry.bandwidth);
    };

    BruteForceWeights out;
    out.n = n;
    out.dims = d;
    out.weights.assign(static_cast<std::size_t>(count), 0.0);
    std::vector<std::size_t> tuple(d, 0);
    for (std::size_t r = 0; r < out.weights.size(); ++r) {
        std::size_t rem = r;
        for (std::size_t j = d; j-- > 0;) {
            tuple[j] = rem % n;
            rem /= n;
        }
        double w = 1.0;
        for (std::size_t j = 0; j < d && w != 0.0; ++j) {
            const auto& pillow = pillows[j];
            double numerator = 1.0;
            double denominator = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double kv = 1.0;
                for (auto p : pillow) {
                    const auto c = column_of_vertex[indexing.order[p]];
                    kv *= kernel(c, data.at(tuple[p], c), data.at(k, c));
                }
                denominator += kv;
                if (k == tuple[j]) numerator = kv;
            }
            w = denominator == 0.0 ? 0.0 : w * (numerator / denominator);
        }
        out.weights[r] = w;
    }
    return out;
}

double total_weight(const AugmentedDataset& aug) {
    double total = 0.0;
    for (double w : aug.weights) total += w;
    return total;
}

std::string format_augmented_csv(const AugmentedDataset& aug, bool with_sources) {
    std::string out;
    for (std::size_t c = 0; c < aug.dims; ++c) {
        out += aug.names[c];
        out += ',';
    }
    out += "__weight";
    if (with_sources) {
        for (std::size_t c = 0; c < aug.dims; ++c) out += ",__src_" + aug.names[c];
    }
    out += '\n';
    for (std::size_t s = 0; s < aug.size(); ++s) {
        const auto row = aug.row(s);
        for (std::size_t c = 0; c < aug.dims; ++c) {
            out += format_double(row[c]);
            out += ',';
        }
        out += format_double(aug.weights[s]);
        if (with_sources) {
            for (std::size_t c = 0; c < aug.dims; ++c) {
                out += ',';
                out += std::to_string(aug.source_row(s, c));
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace admgaug
