#include "admgaug/admg.hpp"
#include "admgaug/augment.hpp"
#include "admgaug/dataset.hpp"
#include "admgaug/error.hpp"
#include "admgaug/gbrt.hpp"
#include "admgaug/kernels.hpp"
#include "admgaug/risk.hpp"
#include "admgaug/synth.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace admgaug;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(std::span<const double> values, std::size_t rows, std::size_t cols) {
    Matrix out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

Dataset make_dataset(const std::vector<std::string>& names, const Matrix& values, const std::vector<std::string>& discrete,
                     const std::string& target) {
    if (values.ndim() != 2 || static_cast<std::size_t>(values.shape(1)) != names.size()) {
        throw Error(Errc::DimensionMismatch, "values must be a 2-d array with one column per name");
    }
    Dataset data(names, std::vector<double>(values.data(), values.data() + values.size()));
    for (const auto& d : discrete) data.mark_discrete(d);
    if (!target.empty()) data.set_target(target);
    return data;
}

WeightedSamples make_samples(const Matrix& x, const std::vector<double>& y, const std::vector<double>& w) {
    if (x.ndim() != 2) throw Error(Errc::DimensionMismatch, "x must be a 2-d array");
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto p = static_cast<std::size_t>(x.shape(1));
    if (y.size() != n || w.size() != n) throw Error(Errc::DimensionMismatch, "x, y and w disagree on the sample count");
    WeightedSamples s(p);
    for (std::size_t i = 0; i < n; ++i) s.add(std::span(x.data() + i * p, p), y[i], w[i]);
    return s;
}

GbrtConfig make_config(std::size_t max_leaves, std::size_t rounds, double l2, double learning_rate,
                       double min_child_weight) {
    GbrtConfig c;
    c.max_leaves = max_leaves;
    c.rounds = rounds;
    c.l2 = l2;
    c.learning_rate = learning_rate;
    c.min_child_weight = min_child_weight;
    return c;
}

py::dict augmented_dict(const AugmentedDataset& aug) {
    py::dict out;
    out["names"] = aug.names;
    out["values"] = to_matrix(aug.values, aug.size(), aug.dims);
    out["weights"] = py::array_t<double>(static_cast<py::ssize_t>(aug.size()), aug.weights.data());
    py::array_t<std::int64_t> sources({aug.size(), aug.dims});
    auto* dst = sources.mutable_data();
    for (std::size_t s = 0; s < aug.size(); ++s) {
        for (std::size_t c = 0; c < aug.dims; ++c) dst[s * aug.dims + c] = static_cast<std::int64_t>(aug.source_row(s, c));
    }
    out["sources"] = sources;
    out["surviving_nodes"] = aug.surviving_nodes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Causal-graph data augmentation with instance-weighted gradient boosted trees";

    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    m.def(
        "graph_summary",
        [](const std::string& text) {
            const auto spec = parse_graph(text);
            const auto idx = validate(spec.graph);
            const auto pillows = markov_pillow(spec.graph, idx);
            const auto& names = spec.graph.vertices();
            std::vector<std::string> order;
            py::dict pillow;
            for (std::size_t p = 0; p < idx.size(); ++p) {
                order.push_back(names[idx.order[p]]);
                std::vector<std::string> members;
                for (auto q : pillows[p]) members.push_back(names[idx.order[q]]);
                pillow[py::str(names[idx.order[p]])] = members;
            }
            py::dict out;
            out["vertices"] = names;
            out["order"] = order;
            out["markov_pillow"] = pillow;
            out["discrete"] = spec.discrete;
            out["uninformative"] = is_uninformative(spec.graph);
            return out;
        },
        py::arg("text"), "Parse a graph description and report its topological order and Markov pillows.");

    m.def(
        "silverman_bandwidth", [](const std::vector<double>& column) { return silverman_bandwidth(column); },
        py::arg("column"));

    m.def(
        "augment",
        [](const std::vector<std::string>& names, const Matrix& values, const std::string& graph_text,
           const std::vector<std::string>& discrete, double gamma, std::optional<double> theta, std::size_t node_cap,
           bool renormalize) {
            const auto spec = parse_graph(graph_text);
            auto all_discrete = discrete;
            all_discrete.insert(all_discrete.end(), spec.discrete.begin(), spec.discrete.end());
            const auto data = make_dataset(names, values, all_discrete, "");
            const auto plan = bandwidth_plan(data, {gamma, false});
            AugmentOptions options;
            options.theta = theta.value_or(default_theta(data.rows()));
            options.node_cap = node_cap;
            options.renormalize = renormalize;
            AugmentedDataset aug;
            {
                py::gil_scoped_release release;
                aug = fill_prob_tree(data, spec.graph, plan, options);
            }
            return augmented_dict(aug);
        },
        py::arg("names"), py::arg("values"), py::arg("graph"), py::arg("discrete") = std::vector<std::string>{},
        py::arg("gamma") = 1e-3, py::arg("theta") = py::none(), py::arg("node_cap") = std::size_t{10'000'000},
        py::arg("renormalize") = false,
        "Weighted augmented samples for a dataset and graph. theta=None uses 1e-3/n.");

    py::class_<GbrtConfig>(m, "GbrtConfig")
        .def(py::init(&make_config), py::arg("max_leaves") = 64, py::arg("rounds") = 100, py::arg("l2") = 1.0,
             py::arg("learning_rate") = 0.3, py::arg("min_child_weight") = 0.0)
        .def_readwrite("max_leaves", &GbrtConfig::max_leaves)
        .def_readwrite("rounds", &GbrtConfig::rounds)
        .def_readwrite("l2", &GbrtConfig::l2)
        .def_readwrite("learning_rate", &GbrtConfig::learning_rate)
        .def_readwrite("min_child_weight", &GbrtConfig::min_child_weight)
        .def("__repr__", [](const GbrtConfig& c) {
            return "GbrtConfig(max_leaves=" + std::to_string(c.max_leaves) + ", rounds=" + std::to_string(c.rounds) +
                   ", l2=" + format_double(c.l2) + ", learning_rate=" + format_double(c.learning_rate) + ")";
        });

    py::class_<GbrtModel>(m, "GbrtModel")
        .def_readonly("base_score", &GbrtModel::base_score)
        .def_readonly("learning_rate", &GbrtModel::learning_rate)
        .def_property_readonly("n_trees", [](const GbrtModel& model) { return model.trees.size(); })
        .def(
            "predict",
            [](const GbrtModel& model, const Matrix& x) {
                if (x.ndim() != 2) throw Error(Errc::DimensionMismatch, "x must be a 2-d array");
                const auto n = static_cast<std::size_t>(x.shape(0));
                const auto p = static_cast<std::size_t>(x.shape(1));
                py::array_t<double> out(static_cast<py::ssize_t>(n));
                for (std::size_t i = 0; i < n; ++i) out.mutable_data()[i] = model.predict(std::span(x.data() + i * p, p));
                return out;
            },
            py::arg("x"))
        .def("regularization", &GbrtModel::regularization, py::arg("l2"))
        .def("to_json", [](const GbrtModel& model) { return model_to_json(model); })
        .def_static("from_json", &model_from_json, py::arg("text"));

    m.def(
        "fit",
        [](const Matrix& x, const std::vector<double>& y, const std::vector<double>& w, const GbrtConfig& config) {
            const auto samples = make_samples(x, y, w);
            py::gil_scoped_release release;
            return fit(samples, config);
        },
        py::arg("x"), py::arg("y"), py::arg("w"), py::arg("config") = GbrtConfig{});

    m.def("default_grid", &default_grid);
    m.def(
        "grid_search_cv",
        [](const Matrix& x, const std::vector<double>& y, const std::vector<double>& w, const std::vector<GbrtConfig>& grid,
           std::size_t folds, std::uint64_t seed) {
            const auto samples = make_samples(x, y, w);
            CvResult result;
            {
                py::gil_scoped_release release;
                result = grid_search_cv(samples, grid, folds, seed);
            }
            std::vector<double> means;
            for (const auto& c : result.cells) means.push_back(c.mean_mse);
            return py::make_tuple(result.best(), result.best_index, means);
        },
        py::arg("x"), py::arg("y"), py::arg("w"), py::arg("grid"), py::arg("folds") = 3, py::arg("seed") = 0,
        "Returns (best config, best index, mean validation MSE per grid cell).");

    m.def(
        "train",
        [](const std::vector<std::string>& names, const Matrix& values, const std::string& target, const std::string& graph_text,
           const std::vector<std::string>& discrete, double lambda, double gamma, std::optional<double> theta,
           std::optional<std::vector<GbrtConfig>> grid, std::uint64_t seed) {
            std::optional<GraphSpec> spec;
            auto all_discrete = discrete;
            if (!graph_text.empty()) {
                spec = parse_graph(graph_text);
                all_discrete.insert(all_discrete.end(), spec->discrete.begin(), spec->discrete.end());
            }
            const auto data = make_dataset(names, values, all_discrete, target);
            py::gil_scoped_release release;
            std::optional<AugmentedDataset> aug;
            if (lambda > 0.0) {
                if (!spec) throw Error(Errc::InvalidArgument, "lambda > 0 needs a graph");
                AugmentOptions options;
                options.theta = theta.value_or(default_theta(data.rows()));
                aug = fill_prob_tree(data, spec->graph, bandwidth_plan(data, {gamma, false}), options);
            }
            const auto samples = combined_samples(data, aug ? &*aug : nullptr, lambda);
            const auto cv = grid_search_cv(samples, grid.value_or(default_grid()), 3, seed);
            auto model = fit(samples, cv.best());
            const auto t = data.require_target();
            model.target_name = names[t];
            for (std::size_t c = 0; c < names.size(); ++c) {
                if (c != t) model.feature_names.push_back(names[c]);
            }
            return model;
        },
        py::arg("names"), py::arg("values"), py::arg("target"), py::arg("graph") = std::string(),
        py::arg("discrete") = std::vector<std::string>{}, py::arg("lam") = 0.5, py::arg("gamma") = 1e-3,
        py::arg("theta") = py::none(), py::arg("grid") = py::none(), py::arg("seed") = 0,
        "Augment (when lam > 0), select hyper-parameters by 3-fold CV and fit the final model.");

    m.def(
        "sample_sem",
        [](const std::string& text, std::size_t n, std::uint64_t seed) {
            const auto data = sample_sem(parse_sem(text), n, seed);
            std::vector<std::string> discrete;
            for (std::size_t c = 0; c < data.cols(); ++c) {
                if (data.is_discrete(c)) discrete.push_back(data.names()[c]);
            }
            return py::make_tuple(data.names(), to_matrix(data.values(), data.rows(), data.cols()), discrete);
        },
        py::arg("sem"), py::arg("n"), py::arg("seed") = 0, "Returns (names, values, discrete column names).");

    m.def(
        "run_benchmark",
        [](const std::string& text, std::vector<double> fractions, std::size_t seeds, std::size_t n_total, double lambda,
           double gamma, std::optional<double> theta, std::optional<std::vector<GbrtConfig>> grid, std::uint64_t master_seed,
           std::size_t jobs) {
            const auto sem = parse_sem(text);
            BenchmarkConfig c;
            c.fractions = std::move(fractions);
            c.seeds = seeds;
            c.n_total = n_total;
            c.lambda = lambda;
            c.gamma = gamma;
            c.theta = theta;
            if (grid) c.grid = *grid;
            c.master_seed = master_seed;
            c.jobs = jobs;
            BenchmarkReport report;
            {
                py::gil_scoped_release release;
                report = run_benchmark(sem, c);
            }
            return py::make_tuple(format_benchmark_long_csv(report), format_benchmark_aggregate_csv(report));
        },
        py::arg("sem"), py::arg("fractions") = std::vector<double>{0.1}, py::arg("seeds") = 20, py::arg("n_total") = 400,
        py::arg("lam") = 0.5, py::arg("gamma") = 1e-3, py::arg("theta") = py::none(), py::arg("grid") = py::none(),
        py::arg("master_seed") = 0, py::arg("jobs") = 1, "Returns the long and aggregate CSV texts.");
}
