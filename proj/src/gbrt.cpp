#include "admgaug/gbrt.hpp"

#include "admgaug/admg.hpp"
#include "admgaug/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace admgaug {

void GbrtConfig::check() const {
    if (max_leaves < 2) throw Error(Errc::DegenerateConfig, "max_leaves must be at least 2");
    if (rounds < 1) throw Error(Errc::DegenerateConfig, "rounds must be at least 1");
    if (!(l2 >= 0.0)) throw Error(Errc::DegenerateConfig, "l2 must be nonnegative");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw Error(Errc::DegenerateConfig, "learning_rate must lie in (0, 1]");
    }
    if (!(min_child_weight >= 0.0)) throw Error(Errc::DegenerateConfig, "min_child_weight must be nonnegative");
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
        const auto& node = nodes[k];
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
    }
    return nodes[k].value;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double GbrtModel::predict(std::span<const double> x) const { return predict_rounds(x, trees.size()); }

double GbrtModel::predict_rounds(std::span<const double> x, std::size_t rounds) const {
    if (x.size() != features) {
        throw Error(Errc::DimensionMismatch,
                    "expected " + std::to_string(features) + " features, got " + std::to_string(x.size()));
    }
    double acc = 0.0;
    const auto limit = std::min(rounds, trees.size());
    for (std::size_t k = 0; k < limit; ++k) acc += trees[k].predict(x);
    return base_score + learning_rate * acc;
}

double GbrtModel::regularization(double rho) const {
    double acc = 0.0;
    for (const auto& tree : trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) acc += (learning_rate * node.value) * (learning_rate * node.value);
        }
    }
    return 0.5 * rho * acc;
}

Predictor GbrtModel::predictor() const {
    return [this](std::span<const double> x) { return predict(x); };
}

namespace {

// Positive-weight samples with identical (x, y) merged; rows sorted lexicographically.
WeightedSamples canonicalize(const WeightedSamples& in) {
    std::vector<std::size_t> idx;
    idx.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in.w[i] < 0.0 || std::isnan(in.w[i])) throw Error(Errc::InvalidArgument, "negative sample weight");
        if (in.w[i] > 0.0) idx.push_back(i);
    }
    auto less = [&](std::size_t a, std::size_t b) {
        const auto ra = in.row(a);
        const auto rb = in.row(b);
        for (std::size_t f = 0; f < in.features; ++f) {
            if (ra[f] != rb[f]) return ra[f] < rb[f];
        }
        if (in.y[a] != in.y[b]) return in.y[a] < in.y[b];
        return a < b;
    };
    std::sort(idx.begin(), idx.end(), less);
    WeightedSamples out(in.features);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto i = idx[k];
        const auto n = out.size();
        if (n > 0 && out.y[n - 1] == in.y[i] && std::equal(in.row(i).begin(), in.row(i).end(), out.row(n - 1).begin())) {
            out.w[n - 1] += in.w[i];
        } else {
            out.add(in.row(i), in.y[i], in.w[i]);
        }
    }
    return out;
}

struct SplitCandidate {
    double gain = 0.0;
    std::int32_t feature = -1;
    std::uint32_t bin = 0;  // samples with bin <= this go left
    double threshold = 0.0;
};

struct Leaf {
    std::int32_t node = 0;
    std::vector<std::uint32_t> members;
    double g = 0.0;
    double h = 0.0;
    SplitCandidate best;
};

class TreeGrower {
public:
    TreeGrower(const WeightedSamples& data, const GbrtConfig& config) : data_(data), config_(config) {
        const std::size_t p = data.features;
        const std::size_t n = data.size();
        distinct_.resize(p);
        bins_.resize(p);
        hist_g_.resize(p);
        hist_h_.resize(p);
        for (std::size_t f = 0; f < p; ++f) {
            auto& values = distinct_[f];
            values.reserve(n);
            for (std::size_t i = 0; i < n; ++i) values.push_back(data.x[i * p + f]);
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            bins_[f].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto it = std::lower_bound(values.begin(), values.end(), data.x[i * p + f]);
                bins_[f][i] = static_cast<std::uint32_t>(it - values.begin());
            }
            hist_g_[f].assign(values.size(), 0.0);
            hist_h_[f].assign(values.size(), 0.0);
        }
    }

    // grad[i] = w_i (f_i - y_i), hess[i] = w_i
    RegressionTree grow(const std::vector<double>& grad, const std::vector<double>& hess,
                        std::vector<std::int32_t>& leaf_of_sample) {
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<Leaf> leaves;
        Leaf root;
        root.members.resize(data_.size());
        std::iota(root.members.begin(), root.members.end(), 0u);
        summarize(root, grad, hess);
        leaves.push_back(std::move(root));

        while (leaves.size() < config_.max_leaves) {
            std::size_t pick = leaves.size();
            for (std::size_t k = 0; k < leaves.size(); ++k) {
                if (leaves[k].best.feature < 0 || !(leaves[k].best.gain > 0.0)) continue;
                if (pick == leaves.size() || leaves[k].best.gain > leaves[pick].best.gain ||
                    (leaves[k].best.gain == leaves[pick].best.gain && leaves[k].node < leaves[pick].node)) {
                    pick = k;
                }
            }
            if (pick == leaves.size()) break;

            Leaf parent = std::move(leaves[pick]);
            const auto f = static_cast<std::size_t>(parent.best.feature);
            Leaf left;
            Leaf right;
            for (auto i : parent.members) {
                (bins_[f][i] <= parent.best.bin ? left.members : right.members).push_back(i);
            }
            left.node = static_cast<std::int32_t>(tree.nodes.size());
            right.node = left.node + 1;
            auto& node = tree.nodes[static_cast<std::size_t>(parent.node)];
            node.feature = parent.best.feature;
            node.threshold = parent.best.threshold;
            node.left = left.node;
            node.right = right.node;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            summarize(left, grad, hess);
            summarize(right, grad, hess);
            leaves[pick] = std::move(left);
            leaves.push_back(std::move(right));
        }

        for (const auto& leaf : leaves) {
            tree.nodes[static_cast<std::size_t>(leaf.node)].value = -leaf.g / (leaf.h + config_.l2);
            for (auto i : leaf.members) leaf_of_sample[i] = leaf.node;
        }
        return tree;
    }

private:
    double score(double g, double h) const { return g * g / (h + config_.l2); }

    void summarize(Leaf& leaf, const std::vector<double>& grad, const std::vector<double>& hess) {
        leaf.g = 0.0;
        leaf.h = 0.0;
        for (auto i : leaf.members) {
            leaf.g += grad[i];
            leaf.h += hess[i];
        }
        leaf.best = {};
        if (leaf.members.size() < 2) return;
        const double parent_score = score(leaf.g, leaf.h);

        for (std::size_t f = 0; f < data_.features; ++f) {
            auto& hg = hist_g_[f];
            auto& hh = hist_h_[f];
            touched_.clear();
            for (auto i : leaf.members) {
                const auto b = bins_[f][i];
                if (hh[b] == 0.0) touched_.push_back(b);
                hg[b] += grad[i];
                hh[b] += hess[i];
            }
            std::sort(touched_.begin(), touched_.end());
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t k = 0; k + 1 < touched_.size(); ++k) {
                const auto b = touched_[k];
                gl += hg[b];
                hl += hh[b];
                const double gr = leaf.g - gl;
                const double hr = leaf.h - hl;
                if (hl < config_.min_child_weight || hr < config_.min_child_weight) continue;
                const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent_score);
                if (gain > leaf.best.gain) {
                    const double lo = distinct_[f][b];
                    const double hi = distinct_[f][touched_[k + 1]];
                    double thr = lo + (hi - lo) / 2.0;
                    if (!(thr > lo)) thr = hi;
                    leaf.best = {gain, static_cast<std::int32_t>(f), b, thr};
                }
            }
            for (auto b : touched_) {
                hg[b] = 0.0;
                hh[b] = 0.0;
            }
        }
    }

    const WeightedSamples& data_;
    const GbrtConfig& config_;
    std::vector<std::vector<double>> distinct_;
    std::vector<std::vector<std::uint32_t>> bins_;
    std::vector<std::vector<double>> hist_g_;
    std::vector<std::vector<double>> hist_h_;
    std::vector<std::uint32_t> touched_;
};

}  // namespace

GbrtModel fit(const WeightedSamples& samples, const GbrtConfig& config, const RoundCallback& on_round) {
    config.check();
    if (samples.x.size() != samples.size() * samples.features || samples.w.size() != samples.size()) {
        throw Error(Errc::DimensionMismatch, "sample arrays have inconsistent sizes");
    }
    const auto data = canonicalize(samples);
    if (data.size() == 0) throw Error(Errc::NoPositiveWeight, "no sample carries positive weight");

    const std::size_t n = data.size();
    double wy = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wy += data.w[i] * data.y[i];
        wsum += data.w[i];
    }

    GbrtModel model;
    model.base_score = wy / wsum;
    model.learning_rate = config.learning_rate;
    model.features = data.features;
    model.trees.reserve(config.rounds);

    std::vector<double> pred(n, model.base_score);
    std::vector<double> grad(n);
    std::vector<std::int32_t> leaf_of(n, 0);
    TreeGrower grower(data, config);
    for (std::size_t round = 1; round <= config.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = data.w[i] * (pred[i] - data.y[i]);
        auto tree = grower.grow(grad, data.w, leaf_of);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] += config.learning_rate * tree.nodes[static_cast<std::size_t>(leaf_of[i])].value;
        }
        model.trees.push_back(std::move(tree));
        if (on_round) on_round(round, model);
    }
    return model;
}

std::vector<GbrtConfig> make_grid(const std::vector<std::size_t>& rounds, const std::vector<double>& l2,
                                  const GbrtConfig& base) {
    std::vector<GbrtConfig> grid;
    for (double rho : l2) {
        for (auto k : rounds) {
            GbrtConfig c = base;
            c.rounds = k;
            c.l2 = rho;
            grid.push_back(c);
        }
    }
    return grid;
}

std::vector<GbrtConfig> default_grid() {
    GbrtConfig base;
    base.max_leaves = 64;
    return make_grid({10, 50, 250, 1250}, {1.0, 10.0, 100.0, 1000.0}, base);
}

std::vector<GbrtConfig> parse_grid(const std::string& spec, const GbrtConfig& base) {
    std::vector<std::size_t> rounds{base.rounds};
    std::vector<double> l2{base.l2};
    for (const auto& part : text::split_list(spec, ';')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw Error(Errc::ParseError, "grid part '" + part + "' lacks '='");
        const auto key = std::string(text::trim(std::string_view(part).substr(0, eq)));
        const auto values = text::split_list(std::string_view(part).substr(eq + 1));
        if (values.empty()) throw Error(Errc::ParseError, "grid part '" + part + "' has no values");
        if (key == "K") {
            rounds.clear();
            for (const auto& v : values) {
                std::size_t k = 0;
                const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
                if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(Errc::ParseError, "bad K value '" + v + "'");
                rounds.push_back(k);
            }
        } else if (key == "rho") {
            l2.clear();
            for (const auto& v : values) {
                double r = 0.0;
                const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), r);
                if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(Errc::ParseError, "bad rho value '" + v + "'");
                l2.push_back(r);
            }
        } else {
            throw Error(Errc::ParseError, "unknown grid key '" + key + "' (expected K or rho)");
        }
    }
    auto grid = make_grid(rounds, l2, base);
    for (const auto& c : grid) c.check();
    return grid;
}

std::vector<std::size_t> assign_folds(std::span<const double> weights, std::size_t folds, std::uint64_t seed) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    std::vector<std::size_t> fold(weights.size());
    for (std::size_t k = 0; k < order.size(); ++k) fold[order[k]] = k % folds;
    return fold;
}

namespace {

// Which fold validates each sample and which folds it must stay out of.
// Without provenance every sample is its own unit. With provenance the
// folds partition the original rows: a sample is validated in fold k only
// when all of its source rows lie in k, and it trains fold k only when none
// of them do, so no held-out row reaches a training set.
struct FoldPlan {
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> valid_fold;       // per sample, kNone when it straddles folds
    std::vector<std::uint64_t> touched_folds;  // per sample, bit k set when a source row is in fold k

    bool touches(std::size_t i, std::size_t k) const { return (touched_folds[i] >> k) & 1u; }
};

FoldPlan plan_folds(const WeightedSamples& data, std::size_t folds, std::uint64_t seed) {
    if (folds > 64) throw Error(Errc::DegenerateConfig, "at most 64 folds are supported");
    FoldPlan plan;
    plan.valid_fold.resize(data.size());
    plan.touched_folds.resize(data.size());
    if (data.source_width == 0) {
        const auto fold_of = assign_folds(data.w, folds, seed);
        for (std::size_t i = 0; i < data.size(); ++i) {
            plan.valid_fold[i] = fold_of[i];
            plan.touched_folds[i] = std::uint64_t{1} << fold_of[i];
        }
        return plan;
    }

    // original rows weighted by the samples drawn entirely from them
    std::size_t rows = 0;
    for (auto r : data.sources) rows = std::max(rows, r + 1);
    std::vector<double> row_weight(rows, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto src = data.source(i);
        if (std::all_of(src.begin(), src.end(), [&](std::size_t r) { return r == src[0]; })) row_weight[src[0]] += data.w[i];
    }
    std::vector<std::size_t> used;
    std::vector<double> used_weight;
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_weight[r] > 0.0) {
            used.push_back(r);
            used_weight.push_back(row_weight[r]);
        }
    }
    if (used.size() < folds) {
        throw Error(Errc::TooFewSamples, std::to_string(used.size()) + " original rows for " + std::to_string(folds) + " folds");
    }
    const auto used_fold = assign_folds(used_weight, folds, seed);
    // rows that only appear inside augmented samples get dealt after the weighted ones
    std::vector<std::size_t> row_fold(rows, FoldPlan::kNone);
    for (std::size_t k = 0; k < used.size(); ++k) row_fold[used[k]] = used_fold[k];
    std::size_t next = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_fold[r] == FoldPlan::kNone) row_fold[r] = (used.size() + next++) % folds;
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t mask = 0;
        for (auto r : data.source(i)) mask |= std::uint64_t{1} << row_fold[r];
        plan.touched_folds[i] = mask;
        plan.valid_fold[i] = std::popcount(mask) == 1 ? static_cast<std::size_t>(std::countr_zero(mask)) : FoldPlan::kNone;
    }
    return plan;
}

}  // namespace

CvResult grid_search_cv(const WeightedSamples& samples, const std::vector<GbrtConfig>& grid, std::size_t folds,
                        std::uint64_t seed) {
    if (grid.empty()) throw Error(Errc::DegenerateConfig, "empty hyper-parameter grid");
    if (folds < 2) throw Error(Errc::DegenerateConfig, "cross-validation needs at least two folds");
    for (const auto& c : grid) c.check();

    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples.w[i] > 0.0) positive.push_back(i);
    }
    if (positive.size() < folds) {
        throw Error(Errc::TooFewSamples, std::to_string(positive.size()) + " positive-weight samples for " +
                                             std::to_string(folds) + " folds");
    }
    const auto data = samples.select(positive);
    const auto plan = plan_folds(data, folds, seed);
    CvResult result;
    result.cells.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        result.cells[g].config = grid[g];
        result.cells[g].fold_mse.assign(folds, 0.0);
    }

    // configs equal up to `rounds` share one boosting run
    using Key = std::tuple<std::size_t, double, double, double>;
    std::map<Key, std::vector<std::size_t>> groups;
    std::vector<Key> group_order;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Key key{grid[g].max_leaves, grid[g].l2, grid[g].learning_rate, grid[g].min_child_weight};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) group_order.push_back(key);
        it->second.push_back(g);
    }

    for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> valid_idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (plan.valid_fold[i] == k) valid_idx.push_back(i);
            if (!plan.touches(i, k)) train_idx.push_back(i);
        }
        const auto train = data.select(train_idx);
        const auto valid = data.select(valid_idx);
        double valid_w = 0.0;
        for (double w : valid.w) valid_w += w;
        if (train.size() == 0 || !(valid_w > 0.0)) {
            throw Error(Errc::TooFewSamples, "fold " + std::to_string(k) + " has no training or validation samples");
        }

        for (const auto& key : group_order) {
            const auto& members = groups[key];
            GbrtConfig config = grid[members.front()];
            std::size_t max_rounds = 0;
            for (auto g : members) max_rounds = std::max(max_rounds, grid[g].rounds);
            config.rounds = max_rounds;

            std::vector<double> pred;
            auto on_round = [&](std::size_t round, const GbrtModel& model) {
                if (round == 1) pred.assign(valid.size(), model.base_score);
                const auto& tree = model.trees.back();
                for (std::size_t i = 0; i < valid.size(); ++i) pred[i] += model.learning_rate * tree.predict(valid.row(i));
                bool wanted = false;
                for (auto g : members) wanted = wanted || grid[g].rounds == round;
                if (!wanted) return;
                double sse = 0.0;
                for (std::size_t i = 0; i < valid.size(); ++i) {
                    const double r = valid.y[i] - pred[i];
                    sse += valid.w[i] * r * r;
                }
                for (auto g : members) {
                    if (grid[g].rounds == round) result.cells[g].fold_mse[k] = sse / valid_w;
                }
            };
            fit(train, config, on_round);
        }
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& cell = result.cells[g];
        cell.mean_mse = std::accumulate(cell.fold_mse.begin(), cell.fold_mse.end(), 0.0) / static_cast<double>(folds);
        if (cell.mean_mse < result.cells[result.best_index].mean_mse) result.best_index = g;
    }
    return result;
}

// ---------------------------------------------------------------------------
// serialization

namespace {
constexpr const char* kModelFormat = "admgaug-gbrt";
constexpr int kModelVersion = 1;
}  // namespace

std::string model_to_json(const GbrtModel& model) {
    using nlohmann::json;
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) {
                nodes.push_back({{"leaf", node.value}});
            } else {
                nodes.push_back(
                    {{"feature", node.feature}, {"threshold", node.threshold}, {"left", node.left}, {"right", node.right}});
            }
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    json doc = {
        {"format", kModelFormat},
        {"version", kModelVersion},
        {"target", model.target_name},
        {"features", model.feature_names},
        {"n_features", model.features},
        {"base_score", model.base_score},
        {"learning_rate", model.learning_rate},
        {"trees", std::move(trees)},
    };
    return doc.dump(1) + "\n";
}

GbrtModel model_from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const auto doc = json::parse(text);
        if (doc.at("format").get<std::string>() != kModelFormat) throw Error(Errc::ParseError, "not a GBRT model file");
        if (doc.at("version").get<int>() != kModelVersion) throw Error(Errc::ParseError, "unsupported model version");
        GbrtModel model;
        model.target_name = doc.at("target").get<std::string>();
        model.feature_names = doc.at("features").get<std::vector<std::string>>();
        model.features = doc.at("n_features").get<std::size_t>();
        model.base_score = doc.at("base_score").get<double>();
        model.learning_rate = doc.at("learning_rate").get<double>();
        for (const auto& t : doc.at("trees")) {
            RegressionTree tree;
            const auto& nodes = t.at("nodes");
            for (const auto& n : nodes) {
                TreeNode node;
                if (n.contains("leaf")) {
                    node.value = n.at("leaf").get<double>();
                } else {
                    node.feature = n.at("feature").get<std::int32_t>();
                    node.threshold = n.at("threshold").get<double>();
                    node.left = n.at("left").get<std::int32_t>();
                    node.right = n.at("right").get<std::int32_t>();
                    const auto count = static_cast<std::int32_t>(nodes.size());
                    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= model.features || node.left <= 0 ||
                        node.right <= 0 || node.left >= count || node.right >= count) {
                        throw Error(Errc::ParseError, "tree node references are out of range");
                    }
                }
                tree.nodes.push_back(node);
            }
            if (tree.nodes.empty()) throw Error(Errc::ParseError, "empty tree");
            // children must follow their parent, which also rules out cycles
            for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
                const auto& node = tree.nodes[k];
                if (!node.is_leaf() && (static_cast<std::size_t>(node.left) <= k || static_cast<std::size_t>(node.right) <= k)) {
                    throw Error(Errc::ParseError, "tree node order is not topological");
                }
            }
            model.trees.push_back(std::move(tree));
        }
        if (!model.feature_names.empty() && model.feature_names.size() != model.features) {
            throw Error(Errc::ParseError, "feature name count does not match n_features");
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("malformed model file: ") + e.what());
    }
}

}  // namespace admgaug
