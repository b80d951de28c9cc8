#include <doctest.h>

#include <cmath>

#include "advrob/attacks.hpp"
#include "advrob/errors.hpp"
#include "advrob/metrics.hpp"
#include "advrob/rng.hpp"
#include "test_helpers.hpp"

using namespace advrob;

namespace {

RobustnessCurve make_curve(std::vector<double> eps, std::vector<double> acc) {
    RobustnessCurve c;
    c.epsilons = std::move(eps);
    c.accuracies = std::move(acc);
    return c;
}

std::vector<double> linspace10() {
    return EpsilonGrid::linspace(0.3, 10).values;
}

}  // namespace

TEST_CASE("robustness_index oracle values") {
    const std::vector<double> grid = linspace10();

    SUBCASE("constant curve returns the constant") {
        std::vector<double> acc(grid.size(), 0.74);
        CHECK(std::abs(robustness_index(grid, acc) - 0.74) <= 1e-12);
    }
    SUBCASE("linear decay 1 - eps/0.3 integrates to 0.5 exactly") {
        std::vector<double> acc;
        for (const double e : grid) acc.push_back(1.0 - e / 0.3);
        CHECK(std::abs(robustness_index(grid, acc) - 0.5) <= 1e-12);
    }
    SUBCASE("result bounded by curve extremes") {
        SplitMix64 rng(1);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> acc;
            double lo = 1.0, hi = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                acc.push_back(rng.next_double());
                lo = std::min(lo, acc.back());
                hi = std::max(hi, acc.back());
            }
            const double ri = robustness_index(grid, acc);
            CHECK(ri >= lo - 1e-15);
            CHECK(ri <= hi + 1e-15);
        }
    }
    SUBCASE("error paths") {
        CHECK_THROWS_AS(robustness_index({0.0}, {1.0}), ConfigError);
        CHECK_THROWS_AS(robustness_index({0.0, 0.2, 0.1}, {1.0, 0.9, 0.8}), ConfigError);
        CHECK_THROWS_AS(robustness_index({0.1, 0.2}, {1.0, 0.9}), ConfigError);
        CHECK_THROWS_AS(robustness_index({0.0, 0.2}, {1.0}), ConfigError);
    }
}

TEST_CASE("robustness_index properties on random curves") {
    SplitMix64 rng(2);
    const std::vector<double> grid = linspace10();

    SUBCASE("grid refinement on piecewise-linear curves changes nothing") {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> acc;
            for (std::size_t i = 0; i < grid.size(); ++i) acc.push_back(rng.next_double());
            const double coarse = robustness_index(grid, acc);
            std::vector<double> fine_eps, fine_acc;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                fine_eps.push_back(grid[i]);
                fine_acc.push_back(acc[i]);
                if (i + 1 < grid.size()) {
                    fine_eps.push_back(0.5 * (grid[i] + grid[i + 1]));
                    fine_acc.push_back(0.5 * (acc[i] + acc[i + 1]));
                }
            }
            CHECK(std::abs(robustness_index(fine_eps, fine_acc) - coarse) < 1e-12);
        }
    }
    SUBCASE("pointwise dominance implies RI dominance") {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> lower, upper;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double b = 0.8 * rng.next_double();
                lower.push_back(b);
                upper.push_back(b + 0.2 * rng.next_double());
            }
            CHECK(robustness_index(grid, upper) >= robustness_index(grid, lower));
        }
    }
    SUBCASE("scaling the curve scales the index") {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> acc, scaled;
            const double c = rng.next_double();
            for (std::size_t i = 0; i < grid.size(); ++i) {
                acc.push_back(rng.next_double());
                scaled.push_back(c * acc.back());
            }
            CHECK(std::abs(robustness_index(grid, scaled) - c * robustness_index(grid, acc)) <=
                  1e-12);
        }
    }
}

TEST_CASE("precision_recall") {
    SUBCASE("perfect predictions") {
        const auto [p, r] = precision_recall({1, 0, 1, 0}, {1, 0, 1, 0}, 1);
        CHECK(p == 1.0);
        CHECK(r == 1.0);
    }
    SUBCASE("no positive predictions uses the zero convention") {
        const auto [p, r] = precision_recall({0, 0, 0}, {1, 1, 0}, 1);
        CHECK(p == 0.0);
        CHECK(r == 0.0);
    }
    SUBCASE("mixed case, hand-counted") {
        // tp = 2, fp = 1, fn = 1 -> precision 2/3, recall 2/3
        const auto [p, r] = precision_recall({1, 1, 1, 0, 0}, {1, 1, 0, 1, 0}, 1);
        CHECK(p == doctest::Approx(2.0 / 3.0));
        CHECK(r == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(precision_recall({}, {}, 1), ConfigError);
    }
}

TEST_CASE("roc_auc") {
    SUBCASE("perfect ranking") {
        CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    }
    SUBCASE("reversed ranking") {
        CHECK(roc_auc({0.9, 0.8, 0.1, 0.2}, {0, 0, 1, 1}) == 0.0);
    }
    SUBCASE("all scores tied gives one half") {
        CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    }
    SUBCASE("invariant under strictly monotone transforms") {
        SplitMix64 rng(4);
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 200; ++i) {
            scores.push_back(rng.next_uniform(-3.0, 3.0));
            labels.push_back(static_cast<int>(rng.next_below(2)));
        }
        const double base = roc_auc(scores, labels);
        std::vector<double> transformed;
        for (const double s : scores) transformed.push_back(std::tanh(2.0 * s) * 10.0 + 3.0);
        CHECK(roc_auc(transformed, labels) == base);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
    }
    SUBCASE("single-class input rejected") {
        CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), DataError);
    }
}

TEST_CASE("taylor_ri_estimate and curve_slope_at_zero") {
    SUBCASE("flat curve keeps the clean accuracy") {
        CHECK(taylor_ri_estimate(0.74, 0.0, 0.3) == 0.74);
    }
    SUBCASE("unit decay matches the exact linear RI") {
        CHECK(taylor_ri_estimate(1.0, -1.0 / 0.3, 0.3) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("clamped to [0, 1]") {
        CHECK(taylor_ri_estimate(0.1, -10.0, 0.3) == 0.0);
        CHECK(taylor_ri_estimate(0.9, 10.0, 0.3) == 1.0);
        CHECK_THROWS_AS(taylor_ri_estimate(0.5, 0.0, 0.0), ConfigError);
    }
    SUBCASE("slope of flat and linear curves") {
        const std::vector<double> grid = linspace10();
        std::vector<double> flat(grid.size(), 0.9), lin;
        for (const double e : grid) lin.push_back(1.0 - e / 0.3);
        CHECK(curve_slope_at_zero(make_curve(grid, flat)) == 0.0);
        CHECK(std::abs(curve_slope_at_zero(make_curve(grid, lin)) + 1.0 / 0.3) <= 1e-12);
        CHECK_THROWS_AS(curve_slope_at_zero(make_curve({0.0}, {1.0})), ConfigError);
    }
    SUBCASE("estimate equals RI exactly on affine curves") {
        SplitMix64 rng(5);
        const std::vector<double> grid = linspace10();
        for (int trial = 0; trial < 200; ++trial) {
            const double a0 = rng.next_uniform(0.3, 1.0);
            const double slope = rng.next_uniform(-1.0, 0.5);
            std::vector<double> acc;
            for (const double e : grid) acc.push_back(a0 + slope * e);
            bool in_range = true;
            for (const double v : acc) in_range = in_range && v >= 0.0 && v <= 1.0;
            if (!in_range) continue;
            const double ri = robustness_index(grid, acc);
            const double est = taylor_ri_estimate(a0, slope, grid.back());
            CHECK(std::abs(ri - est) <= 1e-12);
        }
    }
}

TEST_CASE("pearson and spearman correlation helpers") {
    CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {6, 4, 2}) == doctest::Approx(-1.0));
    CHECK(std::isnan(pearson({1, 1, 1}, {1, 2, 3})));
    CHECK(std::isnan(pearson({1.0}, {2.0})));

    // Monotone but nonlinear: rank correlation is exactly 1.
    CHECK(spearman({1, 2, 3, 4}, {1, 8, 27, 64}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    // Ties get average ranks.
    CHECK(spearman({1, 1, 2}, {1, 1, 2}) == doctest::Approx(1.0));
}
