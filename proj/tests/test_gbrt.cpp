#include "admgaug/error.hpp"
#include "admgaug/gbrt.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace admgaug;

namespace {

WeightedSamples one_feature(const std::vector<double>& x, const std::vector<double>& y, double w = 0.25) {
    WeightedSamples s(1);
    for (std::size_t i = 0; i < x.size(); ++i) s.add(std::vector<double>{x[i]}, y[i], w);
    return s;
}

WeightedSamples random_samples(std::uint64_t seed, std::size_t n, std::size_t p) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> weight(0.01, 1.0);
    WeightedSamples s(p);
    std::vector<double> x(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = std::round(normal(rng) * 4.0) / 4.0;
        const double y = std::sin(x[0]) + (p > 1 ? 0.5 * x[1] : 0.0) + 0.1 * normal(rng);
        s.add(x, y, weight(rng));
    }
    return s;
}

GbrtConfig config(std::size_t leaves, std::size_t rounds, double l2, double lr = 1.0) {
    GbrtConfig c;
    c.max_leaves = leaves;
    c.rounds = rounds;
    c.l2 = l2;
    c.learning_rate = lr;
    return c;
}

double weighted_sse(const GbrtModel& m, const WeightedSamples& s) { return weighted_risk(m.predictor(), s); }

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an admgaug::Error");
    return Errc::IoError;
}

}  // namespace

TEST_CASE("constant targets give a constant model") {
    const auto s = one_feature({0, 1, 2, 3}, {2.5, 2.5, 2.5, 2.5});
    const auto m = fit(s, config(2, 1, 0.0));
    for (double x : {-3.0, 0.5, 10.0}) CHECK(m.predict(std::vector<double>{x}) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(m.trees.at(0).leaf_count() == 1);
}

TEST_CASE("huge l2 keeps the base score") {
    const auto s = one_feature({0, 1, 2, 3}, {0, 0, 1, 1});
    const auto m = fit(s, config(2, 1, 1e300));
    CHECK(m.base_score == 0.5);
    for (double x : {0.0, 3.0}) CHECK(m.predict(std::vector<double>{x}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("four-point fixture recovers the hand-derived split") {
    // candidate gains (G, H over uniform weights): t=0.5 -> 1/6, t=1.5 -> 1/2, t=2.5 -> 1/6 (in units of w)
    const auto s = one_feature({0, 1, 2, 3}, {0, 0, 1, 1});
    const auto m = fit(s, config(2, 1, 0.0));
    REQUIRE(m.trees.size() == 1);
    const auto& root = m.trees[0].nodes.at(0);
    CHECK(root.feature == 0);
    CHECK(root.threshold > 1.0);
    CHECK(root.threshold <= 2.0);
    CHECK(root.threshold == 1.5);
    CHECK(m.predict(std::vector<double>{0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.predict(std::vector<double>{1}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.predict(std::vector<double>{2}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.predict(std::vector<double>{3}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("split ties go to the lowest feature, then the smallest threshold") {
    WeightedSamples s(2);
    s.add(std::vector<double>{0, 0}, 0, 1);
    s.add(std::vector<double>{1, 1}, 1, 1);
    const auto m = fit(s, config(2, 1, 0.0));
    CHECK(m.trees[0].nodes[0].feature == 0);

    const auto sym = one_feature({0, 1, 2}, {0, 1, 0});
    // t=0.5 and t=1.5 isolate one point each with the same gain
    CHECK(fit(sym, config(2, 1, 0.0)).trees[0].nodes[0].threshold == 0.5);
}

TEST_CASE("predict") {
    GbrtModel m;
    m.base_score = 0.5;
    m.learning_rate = 0.5;
    m.features = 2;
    CHECK(m.predict(std::vector<double>{1, 1}) == 0.5);

    RegressionTree stump;
    stump.nodes = {{0, 2.0, 1, 2, 0.0}, {-1, 0, -1, -1, -1.0}, {-1, 0, -1, -1, 3.0}};
    m.trees.push_back(stump);
    CHECK(m.predict(std::vector<double>{1, 1}) == 0.5 + 0.5 * -1.0);

    RegressionTree deeper;
    deeper.nodes = {{1, 0.0, 1, 2, 0.0}, {-1, 0, -1, -1, 4.0}, {0, 5.0, 3, 4, 0.0}, {-1, 0, -1, -1, 0.5},
                    {-1, 0, -1, -1, -2.0}};
    m.trees.push_back(deeper);
    // x = (1, 1): stump -> -1; deeper: 1 >= 0 -> node 2, 1 < 5 -> 0.5; 0.5 + 0.5 * (-1 + 0.5)
    CHECK(m.predict(std::vector<double>{1, 1}) == 0.25);
    // x = (6, -1): stump -> 3; deeper -> 4
    CHECK(m.predict(std::vector<double>{6, -1}) == 0.5 + 0.5 * 7.0);
    CHECK(m.predict_rounds(std::vector<double>{6, -1}, 1) == 0.5 + 0.5 * 3.0);
    CHECK(code_of([&] { m.predict(std::vector<double>{1}); }) == Errc::DimensionMismatch);
}

TEST_CASE("duplicating a sample equals doubling its weight") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto s = random_samples(seed, 60, 2);
        WeightedSamples doubled(2);
        WeightedSamples copies(2);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i % 3 == 0) {
                doubled.add(s.row(i), s.y[i], 2.0 * s.w[i]);
                copies.add(s.row(i), s.y[i], s.w[i]);
                copies.add(s.row(i), s.y[i], s.w[i]);
            } else {
                doubled.add(s.row(i), s.y[i], s.w[i]);
                copies.add(s.row(i), s.y[i], s.w[i]);
            }
        }
        const auto c = config(8, 20, 0.5, 0.3);
        CHECK(fit(doubled, c) == fit(copies, c));
    }
}

TEST_CASE("zero-weight samples never affect the model") {
    const auto s = random_samples(9, 50, 2);
    auto padded = s;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 25; ++k) padded.add(std::vector<double>{normal(rng), normal(rng)}, 100.0 * normal(rng), 0.0);
    const auto c = config(6, 15, 1.0, 0.3);
    CHECK(fit(s, c) == fit(padded, c));
}

TEST_CASE("training loss grows with l2 for a fixed structure") {
    const auto s = one_feature({0, 1, 2, 3}, {0, 0, 1, 1});
    double last = -1.0;
    for (double rho : {0.0, 0.1, 1.0, 10.0, 100.0}) {
        const auto m = fit(s, config(2, 1, rho));
        CHECK(m.trees[0].nodes[0].threshold == 1.5);
        const double loss = weighted_sse(m, s);
        CHECK(loss >= last);
        last = loss;
    }
}

TEST_CASE("regularized training objective never increases across rounds") {
    for (double lr : {0.3, 1.0}) {
        for (std::size_t leaves : {2u, 4u, 16u}) {
            for (double rho : {0.0, 1.0, 10.0}) {
                const auto s = random_samples(17 + leaves, 80, 2);
                std::vector<double> objective;
                GbrtModel empty;
                auto cfg = config(leaves, 30, rho, lr);
                fit(s, cfg, [&](std::size_t round, const GbrtModel& m) {
                    if (round == 1) {
                        empty = m;
                        empty.trees.clear();
                        objective.push_back(weighted_sse(empty, s));
                    }
                    objective.push_back(weighted_sse(m, s) + m.regularization(rho));
                });
                for (std::size_t k = 1; k < objective.size(); ++k) {
                    CHECK(objective[k] <= objective[k - 1] * (1 + 1e-12) + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("trees respect max_leaves") {
    const auto s = random_samples(5, 200, 2);
    for (std::size_t leaves : {2u, 3u, 7u, 64u}) {
        const auto m = fit(s, config(leaves, 5, 0.0, 0.3));
        for (const auto& t : m.trees) CHECK(t.leaf_count() <= leaves);
    }
}

TEST_CASE("fit errors") {
    const auto s = one_feature({0, 1}, {0, 1});
    CHECK(code_of([&] { fit(s, config(1, 1, 0.0)); }) == Errc::DegenerateConfig);
    CHECK(code_of([&] { fit(s, config(2, 0, 0.0)); }) == Errc::DegenerateConfig);
    CHECK(code_of([&] { fit(s, config(2, 1, -1.0)); }) == Errc::DegenerateConfig);
    CHECK(code_of([&] { fit(s, config(2, 1, 0.0, 1.5)); }) == Errc::DegenerateConfig);
    CHECK(code_of([&] { fit(one_feature({0, 1}, {0, 1}, 0.0), config(2, 1, 0.0)); }) == Errc::NoPositiveWeight);
}

TEST_CASE("grid search") {
    const auto s = random_samples(31, 90, 2);
    SUBCASE("single element") {
        const auto r = grid_search_cv(s, {config(4, 5, 1.0, 0.3)}, 3, 0);
        CHECK(r.best_index == 0);
        CHECK(r.cells.size() == 1);
        CHECK(r.cells[0].fold_mse.size() == 3);
    }
    SUBCASE("absurd regularization loses") {
        const auto good = config(8, 50, 0.01, 0.3);
        const auto absurd = config(8, 50, 1e9, 0.3);
        CHECK(grid_search_cv(s, {absurd, good}, 3, 7).best() == good);
        CHECK(grid_search_cv(s, {good, absurd}, 3, 7).best() == good);
    }
    SUBCASE("duplicates resolve to the first") {
        const auto c = config(4, 10, 1.0, 0.3);
        const auto r = grid_search_cv(s, {c, c}, 3, 0);
        CHECK(r.best_index == 0);
        CHECK(r.cells[0].mean_mse == r.cells[1].mean_mse);
    }
    SUBCASE("shared boosting runs equal separate fits") {
        const auto grid = make_grid({3, 12}, {0.5}, config(4, 1, 0.0, 0.3));
        const auto joint = grid_search_cv(s, grid, 3, 5);
        const auto only3 = grid_search_cv(s, {grid[0]}, 3, 5);
        const auto only12 = grid_search_cv(s, {grid[1]}, 3, 5);
        CHECK(joint.cells[0].fold_mse == only3.cells[0].fold_mse);
        CHECK(joint.cells[1].fold_mse == only12.cells[0].fold_mse);
    }
    SUBCASE("too few samples") {
        CHECK(code_of([&] { grid_search_cv(one_feature({0, 1}, {0, 1}), {config(2, 1, 0)}, 3, 0); }) ==
              Errc::TooFewSamples);
    }
}

TEST_CASE("fold assignment balances weight") {
    std::vector<double> w{5, 1, 1, 1, 5, 5, 1, 1, 1};
    const auto folds = assign_folds(w, 3, 42);
    std::vector<int> heavy(3, 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 5) ++heavy[folds[i]];
    }
    CHECK(heavy == std::vector<int>{1, 1, 1});
    CHECK(assign_folds(w, 3, 42) == folds);
}

TEST_CASE("grid parsing") {
    const auto g = parse_grid("K=10,50;rho=1,1000");
    REQUIRE(g.size() == 4);
    CHECK(g[0].rounds == 10);
    CHECK(g[1].rounds == 50);
    CHECK(g[2].l2 == 1000.0);
    CHECK(default_grid().size() == 16);
    CHECK(default_grid()[0].max_leaves == 64);
    CHECK(code_of([] { parse_grid("K=ten"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_grid("depth=3"); }) == Errc::ParseError);
}

TEST_CASE("model json round trip") {
    const auto s = random_samples(4, 40, 2);
    auto m = fit(s, config(5, 4, 0.3, 0.3));
    m.feature_names = {"a", "b"};
    m.target_name = "t";
    const auto text = model_to_json(m);
    const auto back = model_from_json(text);
    CHECK(back == m);
    CHECK(model_to_json(back) == text);
    CHECK(code_of([] { model_from_json("{\"format\": \"other\"}"); }) == Errc::ParseError);
    CHECK(code_of([] { model_from_json("not json"); }) == Errc::ParseError);
}

TEST_CASE("provenance folds") {
    const auto plain = random_samples(12, 45, 2);
    WeightedSamples traced(2, 3);
    for (std::size_t i = 0; i < plain.size(); ++i) {
        const std::vector<std::size_t> src(3, i);
        traced.add(plain.row(i), plain.y[i], plain.w[i], src);
    }
    const auto grid = make_grid({5, 20}, {1.0}, config(4, 1, 0.0, 0.3));

    SUBCASE("one source row per sample matches plain folds") {
        const auto a = grid_search_cv(plain, grid, 3, 8);
        const auto b = grid_search_cv(traced, grid, 3, 8);
        for (std::size_t g = 0; g < grid.size(); ++g) CHECK(a.cells[g].fold_mse == b.cells[g].fold_mse);
    }
    SUBCASE("a sample touching every fold neither trains nor validates") {
        const std::size_t n = plain.size();
        WeightedSamples wide(2, n);
        std::vector<std::size_t> src(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(src.begin(), src.end(), i);
            wide.add(plain.row(i), plain.y[i], plain.w[i], src);
        }
        const auto clean = grid_search_cv(wide, grid, 3, 8);
        std::iota(src.begin(), src.end(), std::size_t{0});
        for (int k = 0; k < 5; ++k) wide.add(plain.row(k), 1e6, 10.0, src);
        const auto poisoned = grid_search_cv(wide, grid, 3, 8);
        for (std::size_t g = 0; g < grid.size(); ++g) CHECK(clean.cells[g].fold_mse == poisoned.cells[g].fold_mse);
    }
    SUBCASE("source width is checked") {
        CHECK(code_of([&] { traced.add(plain.row(0), 0.0, 1.0); }) == Errc::DimensionMismatch);
    }
}
