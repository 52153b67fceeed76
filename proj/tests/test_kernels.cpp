#include "admgaug/error.hpp"
#include "admgaug/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace admgaug;

namespace {
// (4/3)^(1/5) * (2/1.349) * 5^(-1/5) for [0,1,2,3,4]: sd = sqrt(2.5), IQR = 3 - 1 = 2,
// frozen from an independent numpy evaluation (percentile default is linear interpolation)
constexpr double kSilverman01234 = 1.1381822079685024;

Dataset one_column(std::vector<double> v) { return Dataset({"x"}, std::move(v)); }
}  // namespace

TEST_CASE("silverman bandwidth") {
    const std::vector<double> col{0, 1, 2, 3, 4};
    CHECK(silverman_bandwidth(col) == doctest::Approx(kSilverman01234).epsilon(1e-12));
    CHECK(std::abs(silverman_bandwidth(col) - kSilverman01234) < 1e-9);

    SUBCASE("degree-1 homogeneous in the data scale") {
        for (double c : {2.0, 0.25, 1024.0}) {
            std::vector<double> scaled;
            for (double v : col) scaled.push_back(c * v);
            CHECK(silverman_bandwidth(scaled) == c * silverman_bandwidth(col));
        }
        for (double c : {3.0, 0.1}) {
            std::vector<double> scaled;
            for (double v : col) scaled.push_back(c * v);
            CHECK(silverman_bandwidth(scaled) == doctest::Approx(c * silverman_bandwidth(col)).epsilon(1e-13));
        }
    }
    SUBCASE("order of the sample is irrelevant") {
        CHECK(silverman_bandwidth(std::vector<double>{4, 0, 3, 1, 2}) == silverman_bandwidth(col));
    }
    SUBCASE("constant column") {
        CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>{5, 5, 5}), Error);
        try {
            silverman_bandwidth(std::vector<double>{5, 5, 5});
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DegenerateColumn);
        }
    }
    SUBCASE("zero IQR falls back to the standard deviation") {
        const std::vector<double> spike{0, 0, 0, 0, 0, 0, 0, 10};
        const double sd = std::sqrt((7 * 1.25 * 1.25 + 8.75 * 8.75) / 7.0);
        CHECK(silverman_bandwidth(spike) == doctest::Approx(std::pow(4.0 / 3.0, 0.2) * sd * std::pow(8.0, -0.2)));
    }
    CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>{1.0}), Error);
}

TEST_CASE("linear quantiles") {
    CHECK(quantile_linear({0, 1, 2, 3, 4}, 0.25) == 1.0);
    CHECK(quantile_linear({0, 1, 2, 3}, 0.25) == 0.75);
    CHECK(quantile_linear({7}, 0.9) == 7.0);
    CHECK(quantile_linear({1, 2}, 1.0) == 2.0);
}

TEST_CASE("bandwidth plan") {
    SUBCASE("gamma scales the rule of thumb") {
        const auto plan1 = bandwidth_plan(one_column({0, 1, 2, 3, 4}), {1.0, false});
        CHECK(plan1.entries[0].kind == KernelKind::Gaussian);
        CHECK(plan1.entries[0].bandwidth == doctest::Approx(kSilverman01234).epsilon(1e-12));
        const auto plan3 = bandwidth_plan(one_column({0, 1, 2, 3, 4}));
        CHECK(plan3.entries[0].bandwidth == doctest::Approx(kSilverman01234 * 1e-3).epsilon(1e-12));
    }
    SUBCASE("discrete columns get the identity kernel") {
        Dataset d({"a", "b"}, {0, 1, 1, 2, 0, 2});
        d.mark_discrete("a");
        d.mark_discrete("b");
        const auto plan = bandwidth_plan(d);
        for (const auto& e : plan.entries) CHECK(e == KernelEntry{KernelKind::Identity, 1.0});
    }
    SUBCASE("constant continuous column") {
        CHECK_THROWS_AS(bandwidth_plan(one_column({3, 3, 3})), Error);
        const auto plan = bandwidth_plan(one_column({3, 3, 3}), {0.5, true});
        CHECK(plan.entries[0].bandwidth == 0.5);
    }
    SUBCASE("scaling the data scales continuous bandwidths exactly") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> normal;
        std::vector<double> v(60);
        for (auto& x : v) x = normal(rng);
        Dataset base({"a", "b", "c"}, v);
        base.mark_discrete("b");
        std::vector<double> scaled = v;
        for (std::size_t i = 0; i < scaled.size(); ++i) {
            if (i % 3 != 1) scaled[i] *= 8.0;
        }
        Dataset big({"a", "b", "c"}, scaled);
        big.mark_discrete("b");
        const auto p = bandwidth_plan(base);
        const auto q = bandwidth_plan(big);
        CHECK(q.entries[0].bandwidth == 8.0 * p.entries[0].bandwidth);
        CHECK(q.entries[2].bandwidth == 8.0 * p.entries[2].bandwidth);
        CHECK(q.entries[1].bandwidth == 1.0);
    }
    CHECK_THROWS_AS(bandwidth_plan(one_column({0, 1}), {0.0, false}), Error);
}

TEST_CASE("product kernel") {
    BandwidthPlan plan{{{KernelKind::Gaussian, 1.0}, {KernelKind::Identity, 1.0}, {KernelKind::Identity, 1.0},
                        {KernelKind::Gaussian, 0.5}}};
    const std::vector<std::size_t> none;
    CHECK(product_kernel_value(plan, none, {}, {}) == 1.0);

    const std::vector<std::size_t> g0{0};
    const std::vector<double> zero{0.0};
    CHECK(product_kernel_value(plan, g0, zero, zero) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));

    const std::vector<std::size_t> ids{1, 2};
    CHECK(product_kernel_value(plan, ids, std::vector<double>{1, 2}, std::vector<double>{1, 3}) == 0.0);
    CHECK(product_kernel_value(plan, ids, std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 1.0);

    SUBCASE("mixed product matches the factorwise formula") {
        const std::vector<std::size_t> cols{0, 1, 3};
        const std::vector<double> x{0.3, 2, -1.0};
        const std::vector<double> y{-0.4, 2, -0.2};
        const double u0 = 0.7;
        const double u3 = 0.8 / 0.5;
        const double expect = std::exp(-u0 * u0 / 2) / std::sqrt(2 * std::numbers::pi) * std::exp(-u3 * u3 / 2) /
                              (std::sqrt(2 * std::numbers::pi) * 0.5);
        CHECK(product_kernel_value(plan, cols, x, y) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(product_kernel_value(plan, cols, x, y) == product_kernel_value(plan, cols, y, x));
    }
    SUBCASE("log space avoids underflow for tiny bandwidths") {
        BandwidthPlan tiny{{{KernelKind::Gaussian, 1e-6}}};
        const double lk = log_product_kernel(tiny, g0, std::vector<double>{0.0}, std::vector<double>{1e-4});
        CHECK(std::isfinite(lk));
        CHECK(product_kernel_value(tiny, g0, std::vector<double>{0.0}, std::vector<double>{1e-4}) == 0.0);
    }
    SUBCASE("missing bandwidth") {
        const std::vector<std::size_t> bad{9};
        try {
            product_kernel_value(plan, bad, zero, zero);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MissingBandwidth);
        }
    }
}

TEST_CASE("property: gaussian factor is symmetric, positive and integrates to one") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5, 5);
    std::uniform_real_distribution<double> hs(0.05, 3);
    for (int k = 0; k < 500; ++k) {
        const KernelEntry e{KernelKind::Gaussian, hs(rng)};
        const double x = u(rng);
        const double y = u(rng);
        CHECK(log_kernel_factor(e, x, y) == log_kernel_factor(e, y, x));
        CHECK(std::isfinite(log_kernel_factor(e, x, y)));
    }
    for (double h : {0.1, 0.7, 2.5}) {
        const KernelEntry e{KernelKind::Gaussian, h};
        const double lo = -12 * h;
        const double hi = 12 * h;
        const int steps = 20000;
        const double dx = (hi - lo) / steps;
        double integral = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            integral += w * std::exp(log_kernel_factor(e, lo + i * dx, 0.0));
        }
        CHECK(std::abs(integral * dx - 1.0) < 1e-6);
    }
}
