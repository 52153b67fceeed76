#include "admgaug/cli.hpp"

#include "admgaug/admg.hpp"
#include "admgaug/augment.hpp"
#include "admgaug/dataset.hpp"
#include "admgaug/error.hpp"
#include "admgaug/gbrt.hpp"
#include "admgaug/kernels.hpp"
#include "admgaug/risk.hpp"
#include "admgaug/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace admgaug::cli {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

void check_common(const RunConfig& config) {
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) throw Error(Errc::LambdaOutOfRange, "--lambda must lie in [0, 1]");
    if (!(config.gamma > 0.0)) throw Error(Errc::InvalidArgument, "--gamma must be positive");
    if (config.node_cap == 0) throw Error(Errc::InvalidArgument, "--node-cap must be positive");
}

// nullopt for "auto"
std::optional<double> parse_theta(const std::string& s) {
    if (s == "auto") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(Errc::ParseError, "--theta expects 'auto' or a number, got '" + s + "'");
    }
    if (!(v >= 0.0 && v < 1.0)) throw Error(Errc::InvalidArgument, "--theta must lie in [0, 1)");
    return v;
}

struct Inputs {
    Dataset data;
    std::optional<GraphSpec> graph;
};

Inputs load_inputs(const RunConfig& config, bool need_graph, bool need_target) {
    if (config.data.empty()) throw Error(Errc::InvalidArgument, "--data is required");
    Inputs in;
    in.data = read_csv(config.data);
    if (need_graph) {
        if (config.graph.empty()) throw Error(Errc::InvalidArgument, "--graph is required");
        in.graph = read_graph_file(config.graph);
        for (const auto& name : in.graph->discrete) in.data.mark_discrete(name);
    } else if (!config.graph.empty()) {
        in.graph = read_graph_file(config.graph);
        for (const auto& name : in.graph->discrete) in.data.mark_discrete(name);
    }
    for (const auto& name : config.discrete) in.data.mark_discrete(name);
    if (need_target) {
        if (config.target.empty()) throw Error(Errc::InvalidArgument, "--target is required");
        in.data.set_target(config.target);
        if (in.data.cols() < 2) throw Error(Errc::InvalidArgument, "need at least one feature column besides the target");
    }
    return in;
}

AugmentedDataset augment_inputs(const RunConfig& config, const Inputs& in, BandwidthPlan& plan, double& theta) {
    plan = bandwidth_plan(in.data, {config.gamma, config.bandwidth_fallback});
    theta = parse_theta(config.theta).value_or(default_theta(in.data.rows()));
    AugmentOptions options;
    options.theta = theta;
    options.node_cap = config.node_cap;
    options.renormalize = config.renormalize;
    return fill_prob_tree(in.data, in.graph->graph, plan, options);
}

std::vector<GbrtConfig> grid_for(const RunConfig& config) {
    GbrtConfig base;
    base.max_leaves = config.max_leaves;
    base.learning_rate = config.learning_rate;
    if (config.grid.empty()) return make_grid({10, 50, 250, 1250}, {1.0, 10.0, 100.0, 1000.0}, base);
    return parse_grid(config.grid, base);
}

std::string kernel_label(const KernelEntry& e) {
    return e.kind == KernelKind::Identity ? "identity 1" : "gaussian " + format_double(e.bandwidth);
}

}  // namespace

int cmd_augment(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_common(config);
        if (config.out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
        const auto started = std::chrono::steady_clock::now();
        const auto in = load_inputs(config, true, false);
        BandwidthPlan plan;
        double theta = 0.0;
        const auto aug = augment_inputs(config, in, plan, theta);
        const auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();

        const auto& g = in.graph->graph;
        const auto indexing = validate(g);
        const auto pillows = markov_pillow(g, indexing);
        std::ostringstream report;
        report << "data: " << config.data << '\n' << "graph: " << config.graph << '\n';
        report << "rows: " << in.data.rows() << '\n' << "columns: " << in.data.cols() << '\n';
        report << "topological_order:";
        for (std::size_t p = 0; p < indexing.size(); ++p) report << (p ? ", " : " ") << g.vertices()[indexing.order[p]];
        report << '\n';
        for (std::size_t p = 0; p < indexing.size(); ++p) {
            report << "markov_pillow " << g.vertices()[indexing.order[p]] << ":";
            for (std::size_t k = 0; k < pillows[p].size(); ++k) {
                report << (k ? ", " : " ") << g.vertices()[indexing.order[pillows[p][k]]];
            }
            report << '\n';
        }
        for (std::size_t c = 0; c < in.data.cols(); ++c) {
            report << "bandwidth " << in.data.names()[c] << ": " << kernel_label(plan.entries[c]) << '\n';
        }
        report << "gamma: " << format_double(config.gamma) << '\n';
        report << "theta: " << format_double(theta) << '\n';
        report << "surviving_nodes: " << aug.surviving_nodes << '\n';
        report << "samples: " << aug.size() << '\n';
        report << "total_weight: " << format_double(total_weight(aug)) << '\n';
        if (aug.size() == 0) report << "note: zero survivors\n";
        report << "elapsed_ms: " << elapsed << '\n';

        write_file_atomic(config.out, format_augmented_csv(aug, config.emit_sources));
        write_file_atomic(config.report.empty() ? config.out + ".report.txt" : config.report, report.str());
        out << "wrote " << aug.size() << " weighted samples (total weight " << format_double(total_weight(aug)) << ") to "
            << config.out << '\n';
        return 0;
    });
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_common(config);
        if (config.out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
        const bool augment = config.lambda > 0.0;
        const auto in = load_inputs(config, augment, true);
        const auto grid = grid_for(config);

        std::optional<AugmentedDataset> aug;
        if (augment) {
            BandwidthPlan plan;
            double theta = 0.0;
            aug = augment_inputs(config, in, plan, theta);
        }
        const auto samples = combined_samples(in.data, aug ? &*aug : nullptr, config.lambda);
        const auto cv = grid_search_cv(samples, grid, 3, config.seed);
        auto model = fit(samples, cv.best());
        const auto target = in.data.require_target();
        model.target_name = in.data.names()[target];
        for (std::size_t c = 0; c < in.data.cols(); ++c) {
            if (c != target) model.feature_names.push_back(in.data.names()[c]);
        }

        std::ostringstream log;
        log << "cell,K,rho,max_leaves,learning_rate";
        for (std::size_t k = 0; k < 3; ++k) log << ",fold" << k << "_mse";
        log << ",mean_mse,selected\n";
        for (std::size_t g = 0; g < cv.cells.size(); ++g) {
            const auto& cell = cv.cells[g];
            log << g << ',' << cell.config.rounds << ',' << format_double(cell.config.l2) << ',' << cell.config.max_leaves
                << ',' << format_double(cell.config.learning_rate);
            for (double m : cell.fold_mse) log << ',' << format_double(m);
            log << ',' << format_double(cell.mean_mse) << ',' << (g == cv.best_index ? 1 : 0) << '\n';
        }
        write_file_atomic(config.out, model_to_json(model));
        write_file_atomic(config.out + ".cv.csv", log.str());
        out << "selected K=" << cv.best().rounds << " rho=" << format_double(cv.best().l2) << " from " << cv.cells.size()
            << " grid cells on " << samples.size() << " weighted samples; model written to " << config.out << '\n';
        return 0;
    });
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (config.model.empty()) throw Error(Errc::InvalidArgument, "--model is required");
        if (config.data.empty()) throw Error(Errc::InvalidArgument, "--data is required");
        const auto model = model_from_json(text::read_file(config.model));
        const auto data = read_csv(config.data);
        const auto target_name = config.target.empty() ? model.target_name : config.target;
        const auto target = data.column_index(target_name);

        std::vector<std::size_t> feature_cols;
        if (!model.feature_names.empty()) {
            for (const auto& name : model.feature_names) feature_cols.push_back(data.column_index(name));
        } else {
            for (std::size_t c = 0; c < data.cols(); ++c) {
                if (c != target) feature_cols.push_back(c);
            }
        }
        if (feature_cols.size() != model.features) throw Error(Errc::DimensionMismatch, "data does not match the model features");
        if (data.rows() == 0) throw Error(Errc::EmptyData, "no rows to evaluate");

        std::vector<double> x(feature_cols.size());
        double sse = 0.0;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            for (std::size_t k = 0; k < feature_cols.size(); ++k) x[k] = data.at(r, feature_cols[k]);
            const double resid = data.at(r, target) - model.predict(x);
            sse += resid * resid;
        }
        out << format_double(sse / static_cast<double>(data.rows())) << '\n';
        return 0;
    });
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        check_common(config);
        if (config.sem.empty()) throw Error(Errc::InvalidArgument, "--sem is required");
        if (config.out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
        const auto sem = read_sem_file(config.sem);
        BenchmarkConfig bench;
        bench.fractions = config.fractions;
        bench.seeds = config.seeds;
        bench.n_total = config.n_total;
        bench.target = config.target;
        bench.grid = grid_for(config);
        bench.lambda = config.lambda;
        bench.gamma = config.gamma;
        bench.theta = parse_theta(config.theta);
        bench.node_cap = config.node_cap;
        bench.bandwidth_fallback = config.bandwidth_fallback;
        bench.master_seed = config.seed;
        bench.jobs = config.jobs;
        const auto report = run_benchmark(sem, bench);
        write_file_atomic(config.out + "_long.csv", format_benchmark_long_csv(report));
        write_file_atomic(config.out + "_aggregate.csv", format_benchmark_aggregate_csv(report));
        for (const auto& a : report.aggregates) {
            out << "fraction " << a.fraction << " (n_train " << a.n_train << "): Proposed " << format_double(a.proposed_mean)
                << ", Baseline " << format_double(a.baseline_mean) << ", relative improvement "
                << format_double(a.rel_improvement_mean) << "% +/- " << format_double(a.rel_improvement_se) << '\n';
        }
        return 0;
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal-graph data augmentation with instance-weighted gradient boosted trees", "admgaug"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    RunConfig config;

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--data", config.data, "Input CSV (header row, comma separated)");
        sub->add_option("--discrete", config.discrete, "Discrete columns (comma separated)")->delimiter(',');
    };
    auto add_graph = [&](CLI::App* sub) {
        sub->add_option("--graph", config.graph, "ADMG text file");
    };
    auto add_augment = [&](CLI::App* sub) {
        sub->add_option("--gamma", config.gamma, "Bandwidth temperature");
        sub->add_option("--theta", config.theta, "Pruning threshold, or 'auto' for 1e-3/n");
        sub->add_option("--node-cap", config.node_cap, "Maximum surviving probability-tree nodes");
        sub->add_flag("--bandwidth-fallback", config.bandwidth_fallback,
                      "Use bandwidth gamma for constant continuous columns instead of failing");
    };
    auto add_learner = [&](CLI::App* sub) {
        sub->add_option("--lambda", config.lambda, "Weight of the augmented risk in [0, 1]");
        sub->add_option("--grid", config.grid, "Grid, e.g. 'K=10,50,250,1250;rho=1,10,100,1000' (empty: that default)");
        sub->add_option("--max-leaves", config.max_leaves, "Leaves per tree");
        sub->add_option("--learning-rate", config.learning_rate, "Boosting shrinkage");
        sub->add_option("--seed", config.seed, "Random seed");
    };

    auto* augment = app.add_subcommand("augment", "Write the weighted augmented dataset");
    add_data(augment);
    add_graph(augment);
    add_augment(augment);
    augment->add_option("--out", config.out, "Augmented CSV path");
    augment->add_option("--report", config.report, "Run report path (default <out>.report.txt)");
    augment->add_option("--target", config.target, "Target column (unused by augmentation)");
    augment->add_flag("--emit-sources", config.emit_sources, "Add __src_<col> source row columns");
    augment->add_flag("--renormalize", config.renormalize, "Rescale surviving weights to sum to 1");

    auto* train = app.add_subcommand("train", "Fit the lambda-combined GBRT model with CV grid search");
    add_data(train);
    add_graph(train);
    add_augment(train);
    add_learner(train);
    train->add_option("--target", config.target, "Target column");
    train->add_option("--out", config.out, "Model JSON path (CV log goes to <out>.cv.csv)");

    auto* eval = app.add_subcommand("eval", "Print the test MSE of a saved model");
    eval->add_option("--model", config.model, "Model JSON path");
    eval->add_option("--data", config.data, "CSV with the target column");
    eval->add_option("--target", config.target, "Target column (default: the model's)");

    auto* bench = app.add_subcommand("bench", "Run the synthetic Proposed-vs-Baseline benchmark");
    bench->add_option("--sem", config.sem, "SEM specification file");
    bench->add_option("--target", config.target, "Target column (default: the SEM's)");
    bench->add_option("--fractions", config.fractions, "Train fractions")->delimiter(',');
    bench->add_option("--seeds", config.seeds, "Random splits per fraction");
    bench->add_option("--n", config.n_total, "Rows sampled per seed");
    bench->add_option("--jobs", config.jobs, "Worker threads");
    bench->add_option("--out", config.out, "Output prefix: <out>_long.csv and <out>_aggregate.csv");
    add_augment(bench);
    add_learner(bench);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    if (augment->parsed()) return cmd_augment(config, out, err);
    if (train->parsed()) return cmd_train(config, out, err);
    if (eval->parsed()) return cmd_eval(config, out, err);
    return cmd_bench(config, out, err);
}

}  // namespace admgaug::cli
