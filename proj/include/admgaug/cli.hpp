#ifndef ADMGAUG_CLI_HPP
#define ADMGAUG_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace admgaug::cli {

struct RunConfig {
    std::string data;
    std::string graph;
    std::string target;
    std::string out;
    std::string report;  // augment: defaults to <out>.report.txt
    std::string model;   // eval
    std::string sem;     // bench
    double lambda = 0.5;
    double gamma = 1e-3;
    std::string theta = "auto";
    std::size_t node_cap = 10'000'000;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::vector<std::string> discrete;
    std::string grid;  // empty: K in {10,50,250,1250} x rho in {1,10,100,1000}
    std::size_t max_leaves = 64;
    double learning_rate = 0.3;
    bool emit_sources = false;
    bool renormalize = false;
    bool bandwidth_fallback = false;
    std::vector<double> fractions{0.1};
    std::size_t seeds = 20;
    std::size_t n_total = 400;
};

// Each command returns the process exit status: 0 success, 2 parse error,
// 3 validation error, 4 node-cap breach, 5 learner error, 1 I/O error.
int cmd_augment(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace admgaug::cli

#endif  // ADMGAUG_CLI_HPP
