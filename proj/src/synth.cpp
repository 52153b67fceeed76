#include "admgaug/synth.hpp"

#include "admgaug/augment.hpp"
#include "admgaug/error.hpp"
#include "admgaug/risk.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace admgaug {

void LinearSem::check() const {
    const auto d = graph.size();
    if (coefficients.size() != graph.directed_edges().size()) {
        throw Error(Errc::InvalidArgument, "coefficient count does not match directed edges");
    }
    if (confounding.size() != graph.bidirected_edges().size()) {
        throw Error(Errc::InvalidArgument, "confounder count does not match bidirected edges");
    }
    if (noise.size() != d || thresholds.size() != d) throw Error(Errc::InvalidArgument, "per-vertex arrays have wrong size");
    for (double s : noise) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw Error(Errc::InvalidArgument, "noise scales must be finite and >= 0");
    }
    for (const auto& t : thresholds) {
        if (!std::is_sorted(t.begin(), t.end())) throw Error(Errc::InvalidArgument, "quantizer thresholds must be sorted");
    }
    if (!target.empty()) graph.index_of(target);
    validate(graph);
}

bool LinearSem::is_discrete(std::size_t vertex) const {
    return !thresholds[vertex].empty() ||
           std::find(discrete.begin(), discrete.end(), graph.vertices()[vertex]) != discrete.end();
}

namespace {

double parse_number(const GraphTextParser& parser, std::string_view s, std::size_t line_no) {
    s = text::trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        parser.fail(line_no, "invalid number '" + std::string(s) + "'");
    }
    return v;
}

struct PendingValue {
    std::string a;
    std::string b;
    double value;
    std::size_t line_no;
};

bool take_word(std::string_view line, std::string_view word, std::string_view& rest) {
    if (line.size() <= word.size() || line.substr(0, word.size()) != word) return false;
    const char next = line[word.size()];
    if (next != ' ' && next != '\t') return false;
    rest = text::trim(line.substr(word.size()));
    return true;
}

}  // namespace

LinearSem parse_sem(std::string_view content, std::string source_name) {
    GraphTextParser parser(source_name);
    std::vector<PendingValue> coefs;
    std::vector<PendingValue> confs;
    std::vector<PendingValue> noises;
    std::vector<std::pair<std::string, std::pair<std::vector<double>, std::size_t>>> quantizers;
    std::string target;
    std::size_t target_line = 0;

    auto split_assignment = [&](std::string_view rest, std::size_t line_no) {
        const auto eq = rest.rfind('=');
        if (eq == std::string_view::npos) parser.fail(line_no, "expected '='");
        return std::pair{text::trim(rest.substr(0, eq)), text::trim(rest.substr(eq + 1))};
    };
    auto split_edge = [&](std::string_view lhs, std::string_view op, std::size_t line_no) {
        const auto pos = lhs.find(op);
        if (pos == std::string_view::npos) parser.fail(line_no, "expected '" + std::string(op) + "'");
        auto a = std::string(text::trim(lhs.substr(0, pos)));
        auto b = std::string(text::trim(lhs.substr(pos + op.size())));
        if (a.empty() || b.empty()) parser.fail(line_no, "malformed edge");
        return std::pair{a, b};
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        const auto end = content.find('\n', start);
        const auto raw = content.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++line_no;
        const auto line = text::trim(text::strip_comment(raw));
        std::string_view rest;
        if (take_word(line, "coef", rest)) {
            const auto [lhs, rhs] = split_assignment(rest, line_no);
            if (lhs.find("<->") != std::string_view::npos) parser.fail(line_no, "coef needs a directed edge");
            auto [a, b] = split_edge(lhs, "->", line_no);
            coefs.push_back({a, b, parse_number(parser, rhs, line_no), line_no});
        } else if (take_word(line, "conf", rest)) {
            const auto [lhs, rhs] = split_assignment(rest, line_no);
            auto [a, b] = split_edge(lhs, "<->", line_no);
            confs.push_back({a, b, parse_number(parser, rhs, line_no), line_no});
        } else if (take_word(line, "noise", rest)) {
            const auto [lhs, rhs] = split_assignment(rest, line_no);
            noises.push_back({std::string(lhs), {}, parse_number(parser, rhs, line_no), line_no});
        } else if (take_word(line, "quantize", rest)) {
            const auto [lhs, rhs] = split_assignment(rest, line_no);
            if (rhs.size() < 2 || rhs.front() != '[' || rhs.back() != ']') parser.fail(line_no, "expected [t1, t2, ...]");
            std::vector<double> ts;
            for (const auto& t : text::split_list(rhs.substr(1, rhs.size() - 2))) ts.push_back(parse_number(parser, t, line_no));
            if (ts.empty()) parser.fail(line_no, "quantizer needs at least one threshold");
            if (!std::is_sorted(ts.begin(), ts.end())) parser.fail(line_no, "quantizer thresholds must be ascending");
            quantizers.push_back({std::string(lhs), {std::move(ts), line_no}});
        } else if (line.substr(0, 7) == "target:") {
            target = std::string(text::trim(line.substr(7)));
            target_line = line_no;
        } else if (!parser.feed(line, line_no)) {
            parser.fail(line_no, "unrecognized line '" + std::string(line) + "'");
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }

    auto spec = parser.finish();
    LinearSem sem;
    sem.graph = std::move(spec.graph);
    sem.discrete = std::move(spec.discrete);
    const auto d = sem.graph.size();
    const auto& g = sem.graph;
    auto locate = [&](const std::string& name, std::size_t at) {
        if (auto v = g.find(name)) return *v;
        throw Error(Errc::UnknownVertex, source_name + ":" + std::to_string(at) + ": vertex '" + name + "' is not declared");
    };

    sem.coefficients.assign(g.directed_edges().size(), std::nan(""));
    for (const auto& c : coefs) {
        const Edge e{locate(c.a, c.line_no), locate(c.b, c.line_no)};
        const auto it = std::find(g.directed_edges().begin(), g.directed_edges().end(), e);
        if (it == g.directed_edges().end()) parser.fail(c.line_no, "coef for undeclared edge " + c.a + " -> " + c.b);
        auto& slot = sem.coefficients[static_cast<std::size_t>(it - g.directed_edges().begin())];
        if (!std::isnan(slot)) parser.fail(c.line_no, "duplicate coef for " + c.a + " -> " + c.b);
        slot = c.value;
    }
    sem.confounding.assign(g.bidirected_edges().size(), std::nan(""));
    for (const auto& c : confs) {
        const auto a = locate(c.a, c.line_no);
        const auto b = locate(c.b, c.line_no);
        const Edge e{std::min(a, b), std::max(a, b)};
        const auto it = std::find(g.bidirected_edges().begin(), g.bidirected_edges().end(), e);
        if (it == g.bidirected_edges().end()) parser.fail(c.line_no, "conf for undeclared edge " + c.a + " <-> " + c.b);
        auto& slot = sem.confounding[static_cast<std::size_t>(it - g.bidirected_edges().begin())];
        if (!std::isnan(slot)) parser.fail(c.line_no, "duplicate conf for " + c.a + " <-> " + c.b);
        slot = c.value;
    }
    for (std::size_t k = 0; k < sem.coefficients.size(); ++k) {
        if (std::isnan(sem.coefficients[k])) {
            const auto [a, b] = g.directed_edges()[k];
            throw Error(Errc::ParseError, source_name + ": missing coef for " + g.vertices()[a] + " -> " + g.vertices()[b]);
        }
    }
    for (std::size_t k = 0; k < sem.confounding.size(); ++k) {
        if (std::isnan(sem.confounding[k])) {
            const auto [a, b] = g.bidirected_edges()[k];
            throw Error(Errc::ParseError, source_name + ": missing conf for " + g.vertices()[a] + " <-> " + g.vertices()[b]);
        }
    }
    sem.noise.assign(d, 1.0);
    for (const auto& nz : noises) {
        if (nz.value < 0.0) parser.fail(nz.line_no, "noise scale must be nonnegative");
        sem.noise[locate(nz.a, nz.line_no)] = nz.value;
    }
    sem.thresholds.assign(d, {});
    for (auto& [name, q] : quantizers) sem.thresholds[locate(name, q.second)] = std::move(q.first);
    if (!target.empty()) {
        locate(target, target_line);
        sem.target = target;
    }
    sem.check();
    return sem;
}

LinearSem read_sem_file(const std::string& path) { return parse_sem(text::read_file(path), path); }

Dataset sample_sem(const LinearSem& sem, std::size_t n, std::uint64_t seed) {
    sem.check();
    const auto& g = sem.graph;
    const auto d = g.size();
    const auto order = validate(g).order;

    std::vector<std::vector<std::pair<std::size_t, double>>> parents(d);
    for (std::size_t k = 0; k < g.directed_edges().size(); ++k) {
        const auto [a, b] = g.directed_edges()[k];
        parents[b].emplace_back(a, sem.coefficients[k]);
    }
    std::vector<std::vector<std::pair<std::size_t, double>>> latents(d);
    for (std::size_t k = 0; k < g.bidirected_edges().size(); ++k) {
        const auto [a, b] = g.bidirected_edges()[k];
        latents[a].emplace_back(k, sem.confounding[k]);
        latents[b].emplace_back(k, sem.confounding[k]);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(n * d);
    std::vector<double> latent(g.bidirected_edges().size());
    for (std::size_t r = 0; r < n; ++r) {
        double* row = values.data() + r * d;
        for (auto& l : latent) l = normal(rng);
        for (auto v : order) {
            double x = 0.0;
            for (const auto& [p, c] : parents[v]) x += c * row[p];
            for (const auto& [k, s] : latents[v]) x += s * latent[k];
            x += sem.noise[v] * normal(rng);
            if (!sem.thresholds[v].empty()) {
                const auto& t = sem.thresholds[v];
                x = static_cast<double>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
            }
            row[v] = x;
        }
    }
    Dataset data(g.vertices(), std::move(values));
    for (std::size_t v = 0; v < d; ++v) {
        if (sem.is_discrete(v)) data.set_kind(v, VarKind::Discrete);
    }
    if (!sem.target.empty()) data.set_target(sem.target);
    return data;
}

double relative_improvement(double mse_proposed, double mse_baseline) {
    return (mse_proposed - mse_baseline) / mse_baseline * 100.0;
}

double standard_error(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double k = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
}

namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kCvStream = 3;

struct CellResult {
    std::size_t n_train = 0;
    double proposed = 0.0;
    double baseline = 0.0;
};

double test_mse(const GbrtModel& model, const Dataset& test) { return empirical_risk(model.predictor(), test); }

CellResult run_cell(const LinearSem& sem, const BenchmarkConfig& config, std::size_t fraction_index,
                    std::size_t seed_index) {
    auto data = sample_sem(sem, config.n_total, derive_seed(config.master_seed, kDataStream, seed_index, 0));
    data.set_target(config.target.empty() ? sem.target : config.target);

    std::vector<std::size_t> perm(data.rows());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 split_rng(derive_seed(config.master_seed, kSplitStream, fraction_index, seed_index));
    std::shuffle(perm.begin(), perm.end(), split_rng);
    const double fraction = config.fractions[fraction_index];
    auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.rows())));
    n_train = std::clamp<std::size_t>(n_train, 2, data.rows() - 1);
    const auto train = data.select_rows(std::span(perm.data(), n_train));
    const auto test = data.select_rows(std::span(perm.data() + n_train, perm.size() - n_train));

    const auto cv_seed = derive_seed(config.master_seed, kCvStream, fraction_index, seed_index);
    auto train_and_score = [&](const WeightedSamples& samples) {
        const auto cv = grid_search_cv(samples, config.grid, config.folds, cv_seed);
        return test_mse(fit(samples, cv.best()), test);
    };

    CellResult out;
    out.n_train = n_train;
    if (config.lambda > 0.0) {
        const auto plan = bandwidth_plan(train, {config.gamma, config.bandwidth_fallback});
        AugmentOptions options;
        options.theta = config.theta.value_or(default_theta(train.rows()));
        options.node_cap = config.node_cap;
        const auto aug = fill_prob_tree(train, sem.graph, plan, options);
        out.proposed = train_and_score(combined_samples(train, &aug, config.lambda));
    } else {
        out.proposed = train_and_score(combined_samples(train, nullptr, 0.0));
    }
    out.baseline = train_and_score(empirical_samples(train));
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const LinearSem& sem, const BenchmarkConfig& config) {
    sem.check();
    if (config.fractions.empty() || config.seeds == 0) throw Error(Errc::InvalidArgument, "empty benchmark");
    for (double f : config.fractions) {
        if (!(f > 0.0 && f < 1.0)) throw Error(Errc::InvalidArgument, "train fractions must lie in (0, 1)");
    }
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) throw Error(Errc::LambdaOutOfRange, "lambda must lie in [0, 1]");
    if (config.n_total < 3) throw Error(Errc::InvalidArgument, "benchmark needs at least 3 rows");
    const auto target = config.target.empty() ? sem.target : config.target;
    if (target.empty()) throw Error(Errc::InvalidArgument, "no target column: set one in the SEM file or the config");
    sem.graph.index_of(target);

    const std::size_t cells = config.fractions.size() * config.seeds;
    std::vector<CellResult> results(cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const auto cell = next.fetch_add(1);
            if (cell >= cells) return;
            try {
                results[cell] = run_cell(sem, config, cell / config.seeds, cell % config.seeds);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells;
            }
        }
    };
    const auto jobs = std::clamp<std::size_t>(config.jobs, 1, cells);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    BenchmarkReport report;
    for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
        std::vector<double> prop;
        std::vector<double> base;
        std::vector<double> rel;
        BenchmarkAggregate agg;
        agg.fraction = config.fractions[fi];
        agg.seeds = config.seeds;
        for (std::size_t s = 0; s < config.seeds; ++s) {
            const auto& r = results[fi * config.seeds + s];
            agg.n_train = r.n_train;
            report.rows.push_back({agg.fraction, r.n_train, "Proposed", s, r.proposed});
            report.rows.push_back({agg.fraction, r.n_train, "Baseline", s, r.baseline});
            prop.push_back(r.proposed);
            base.push_back(r.baseline);
            rel.push_back(relative_improvement(r.proposed, r.baseline));
        }
        const double k = static_cast<double>(config.seeds);
        agg.proposed_mean = std::accumulate(prop.begin(), prop.end(), 0.0) / k;
        agg.baseline_mean = std::accumulate(base.begin(), base.end(), 0.0) / k;
        agg.rel_improvement_mean = std::accumulate(rel.begin(), rel.end(), 0.0) / k;
        agg.proposed_se = standard_error(prop);
        agg.baseline_se = standard_error(base);
        agg.rel_improvement_se = standard_error(rel);
        report.aggregates.push_back(agg);
    }
    return report;
}

namespace {
std::string short_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}
}  // namespace

std::string format_benchmark_long_csv(const BenchmarkReport& report) {
    std::string out = "fraction,n_train,method,seed,mse\n";
    for (const auto& r : report.rows) {
        out += short_double(r.fraction) + ',' + std::to_string(r.n_train) + ',' + r.method + ',' + std::to_string(r.seed) +
               ',' + format_double(r.mse) + '\n';
    }
    return out;
}

std::string format_benchmark_aggregate_csv(const BenchmarkReport& report) {
    std::string out =
        "fraction,n_train,seeds,proposed_mean_mse,proposed_se_mse,baseline_mean_mse,baseline_se_mse,"
        "rel_improvement_mean_pct,rel_improvement_se_pct\n";
    for (const auto& a : report.aggregates) {
        out += short_double(a.fraction) + ',' + std::to_string(a.n_train) + ',' + std::to_string(a.seeds) + ',' +
               format_double(a.proposed_mean) + ',' + format_double(a.proposed_se) + ',' + format_double(a.baseline_mean) +
               ',' + format_double(a.baseline_se) + ',' + format_double(a.rel_improvement_mean) + ',' +
               format_double(a.rel_improvement_se) + '\n';
    }
    return out;
}

}  // namespace admgaug
