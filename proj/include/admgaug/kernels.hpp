#ifndef ADMGAUG_KERNELS_HPP
#define ADMGAUG_KERNELS_HPP

#include "admgaug/dataset.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace admgaug {

enum class KernelKind {
    Gaussian,  // continuous variables
    Identity,  // discrete variables, bandwidth fixed to 1
};

struct KernelEntry {
    KernelKind kind = KernelKind::Gaussian;
    double bandwidth = 1.0;

    bool operator==(const KernelEntry&) const = default;
};

/// One kernel per dataset column, indexed by column.
struct BandwidthPlan {
    std::vector<KernelEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    // Throws MissingBandwidth.
    const KernelEntry& at(std::size_t column) const;
};

struct BandwidthOptions {
    double gamma = 1e-3;
    // Constant continuous columns get bandwidth gamma instead of raising DegenerateColumn.
    bool unit_fallback = false;
};

/// Rule-of-thumb bandwidth (4/3)^(1/5) * A * n^(-1/5), with
/// A = min(sd, IQR / 1.349), sd from the unbiased variance and IQR from
/// linearly interpolated quantiles. When IQR is 0 but sd is not, A = sd.
/// Throws InvalidArgument for fewer than two values and DegenerateColumn for a constant column.
double silverman_bandwidth(std::span<const double> column);

/// Linearly interpolated sample quantile, p in [0, 1].
double quantile_linear(std::vector<double> values, double p);

BandwidthPlan bandwidth_plan(const Dataset& data, const BandwidthOptions& options = {});

/// log of (1/h) K((x - y) / h); -infinity where the kernel vanishes.
double log_kernel_factor(const KernelEntry& entry, double x, double y);

/// Product kernel over the given columns; x and y are aligned with `columns`.
/// Evaluated as a sum of logs; an empty column set yields 1 (log 0).
double log_product_kernel(const BandwidthPlan& plan, std::span<const std::size_t> columns, std::span<const double> x,
                          std::span<const double> y);
double product_kernel_value(const BandwidthPlan& plan, std::span<const std::size_t> columns,
                            std::span<const double> x, std::span<const double> y);

}  // namespace admgaug

#endif  // ADMGAUG_KERNELS_HPP
