#ifndef ADMGAUG_SYNTH_HPP
#define ADMGAUG_SYNTH_HPP

#include "admgaug/admg.hpp"
#include "admgaug/dataset.hpp"
#include "admgaug/gbrt.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace admgaug {

/// Linear structural equation model over an ADMG.
///
/// Each vertex v is sum(coef * parent) + sum(strength * L_pair) + noise_v * e_v,
/// where every bidirected pair owns one latent L_pair ~ N(0, 1) shared by
/// both endpoints. A quantized vertex is replaced by the number of its
/// thresholds lying strictly below the value, and descendants see the code.
struct LinearSem {
    Admg graph;
    std::vector<double> coefficients;  // aligned with graph.directed_edges()
    std::vector<double> confounding;   // aligned with graph.bidirected_edges()
    std::vector<double> noise;         // per vertex
    std::vector<std::vector<double>> thresholds;  // per vertex, empty when continuous
    std::vector<std::string> discrete;
    std::string target;

    // Throws InvalidArgument.
    void check() const;
    bool is_discrete(std::size_t vertex) const;
};

/// The graph format plus `coef a -> b = x`, `conf a <-> b = x`,
/// `noise a = x`, `quantize a = [t1, t2]` and `target: a` lines. Every edge
/// needs exactly one coefficient line; noise defaults to 1.
LinearSem parse_sem(std::string_view content, std::string source_name = "<sem>");
LinearSem read_sem_file(const std::string& path);

/// Ancestral sampling in topological order; columns follow declaration order.
Dataset sample_sem(const LinearSem& sem, std::size_t n, std::uint64_t seed);

struct BenchmarkConfig {
    std::vector<double> fractions{0.1};
    std::size_t seeds = 20;
    std::size_t n_total = 400;
    std::string target;  // empty: the SEM's target
    std::vector<GbrtConfig> grid = default_grid();
    std::size_t folds = 3;
    double lambda = 0.5;
    double gamma = 1e-3;
    std::optional<double> theta;  // unset: 1e-3 / n_train
    std::size_t node_cap = 10'000'000;
    bool bandwidth_fallback = false;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1;
};

struct BenchmarkRow {
    double fraction = 0.0;
    std::size_t n_train = 0;
    std::string method;  // "Proposed" or "Baseline"
    std::size_t seed = 0;
    double mse = 0.0;
};

struct BenchmarkAggregate {
    double fraction = 0.0;
    std::size_t n_train = 0;
    std::size_t seeds = 0;
    double proposed_mean = 0.0;
    double proposed_se = 0.0;
    double baseline_mean = 0.0;
    double baseline_se = 0.0;
    // per-seed (MSE_prop - MSE_base) / MSE_base * 100, averaged
    double rel_improvement_mean = 0.0;
    double rel_improvement_se = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;  // fraction, seed, then Proposed before Baseline
    std::vector<BenchmarkAggregate> aggregates;
};

double relative_improvement(double mse_proposed, double mse_baseline);
/// Sample standard deviation / sqrt(count); 0 for fewer than two values.
double standard_error(const std::vector<double>& values);

/// For every (fraction, seed) cell: sample a dataset, split it, augment the
/// training part, fit Proposed (lambda-combined) and Baseline (original rows
/// only) with the same CV seed, and record both test MSEs. Cells own RNG
/// streams derived from (master seed, fraction index, seed index), so the
/// report does not depend on `jobs`.
BenchmarkReport run_benchmark(const LinearSem& sem, const BenchmarkConfig& config);

std::string format_benchmark_long_csv(const BenchmarkReport& report);
std::string format_benchmark_aggregate_csv(const BenchmarkReport& report);

}  // namespace admgaug

#endif  // ADMGAUG_SYNTH_HPP
