#include "admgaug/kernels.hpp"

#include "admgaug/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace admgaug {

namespace {
constexpr double kIqrToSigma = 1.349;
const double kLogInvSqrt2Pi = -0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

const KernelEntry& BandwidthPlan::at(std::size_t column) const {
    if (column >= entries.size()) {
        throw Error(Errc::MissingBandwidth, "no kernel for column " + std::to_string(column));
    }
    return entries[column];
}

double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw Error(Errc::InvalidArgument, "quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

double silverman_bandwidth(std::span<const double> column) {
    const std::size_t n = column.size();
    if (n < 2) throw Error(Errc::InvalidArgument, "bandwidth needs at least two values");
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / nd;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (nd - 1.0));

    std::vector<double> sorted(column.begin(), column.end());
    const double iqr = quantile_linear(sorted, 0.75) - quantile_linear(sorted, 0.25);
    const double a = iqr > 0.0 ? std::min(sd, iqr / kIqrToSigma) : sd;
    if (!(a > 0.0)) throw Error(Errc::DegenerateColumn, "constant column has no spread");
    return std::pow(4.0 / 3.0, 0.2) * a * std::pow(nd, -0.2);
}

BandwidthPlan bandwidth_plan(const Dataset& data, const BandwidthOptions& options) {
    if (!(options.gamma > 0.0) || !std::isfinite(options.gamma)) {
        throw Error(Errc::InvalidArgument, "bandwidth temperature must be positive");
    }
    BandwidthPlan plan;
    plan.entries.reserve(data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (data.is_discrete(c)) {
            plan.entries.push_back({KernelKind::Identity, 1.0});
            continue;
        }
        const auto values = data.column(c);
        double h = 0.0;
        try {
            h = options.gamma * silverman_bandwidth(values);
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateColumn || !options.unit_fallback) {
                throw Error(e.code(), "column '" + data.names()[c] + "': " + e.what());
            }
            h = options.gamma;
        }
        plan.entries.push_back({KernelKind::Gaussian, h});
    }
    return plan;
}

double log_kernel_factor(const KernelEntry& entry, double x, double y) {
    if (entry.kind == KernelKind::Identity) {
        return x == y ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const double u = (x - y) / entry.bandwidth;
    return kLogInvSqrt2Pi - 0.5 * u * u - std::log(entry.bandwidth);
}

double log_product_kernel(const BandwidthPlan& plan, std::span<const std::size_t> columns, std::span<const double> x,
                          std::span<const double> y) {
    if (x.size() != columns.size() || y.size() != columns.size()) {
        throw Error(Errc::DimensionMismatch, "kernel arguments do not match the column set");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        acc += log_kernel_factor(plan.at(columns[k]), x[k], y[k]);
    }
    return acc;
}

double product_kernel_value(const BandwidthPlan& plan, std::span<const std::size_t> columns,
                            std::span<const double> x, std::span<const double> y) {
    return std::exp(log_product_kernel(plan, columns, x, y));
}

}  // namespace admgaug
