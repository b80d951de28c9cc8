#include <doctest.h>

#include <cmath>

#include "advrob/errors.hpp"
#include "advrob/explain.hpp"
#include "advrob/rng.hpp"
#include "test_helpers.hpp"

using namespace advrob;
using testutil::linear_softmax;
using testutil::random_matrix;
using testutil::standardized_gaussian;

namespace {

PredictFn linear_fn(const std::vector<double>& w, double intercept) {
    return [w, intercept](const Matrix& rows) {
        std::vector<double> out(rows.rows, intercept);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            for (std::size_t j = 0; j < rows.cols; ++j) out[i] += w[j] * rows(i, j);
        }
        return out;
    };
}

std::vector<double> column_means(const Matrix& m) {
    std::vector<double> mu(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) mu[j] += m(i, j);
    }
    for (double& v : mu) v /= static_cast<double>(m.rows);
    return mu;
}

ModelParams binary_linear(const std::vector<double>& w_eff) {
    Matrix w(w_eff.size(), 2);
    for (std::size_t j = 0; j < w_eff.size(); ++j) {
        w(j, 0) = 0.0;
        w(j, 1) = w_eff[j];
    }
    return linear_softmax(w, {0.0, 0.0});
}

}  // namespace

TEST_CASE("feature_sensitivity") {
    SUBCASE("dead input has zero sensitivity") {
        ModelParams p = init_params(4, 2, 3, {5});
        for (std::size_t k = 0; k < p.layers[0].w.cols; ++k) p.layers[0].w(3, k) = 0.0;
        const Dataset data = standardized_gaussian(60, 4, 1.0, 5);
        const SensitivityReport report = feature_sensitivity(p, data, 30, 11);
        CHECK(report.s[3] == 0.0);
        CHECK(report.s.size() == 4);
        CHECK(report.sample_indices.size() == 30);
        for (const double v : report.s) CHECK(v >= 0.0);
    }
    SUBCASE("linear model sensitivity is proportional to |w|") {
        const std::vector<double> w_eff{1.4, -0.6, 2.2, 0.3};
        const ModelParams p = binary_linear(w_eff);
        const Dataset data = standardized_gaussian(80, 4, 1.0, 6);
        const SensitivityReport report = feature_sensitivity(p, data, 80, 2);
        const double ratio0 = report.s[0] / std::abs(w_eff[0]);
        for (std::size_t j = 1; j < 4; ++j) {
            CHECK(std::abs(report.s[j] / std::abs(w_eff[j]) - ratio0) <= 1e-9);
        }
    }
    SUBCASE("subsampling is seeded and bounded") {
        const ModelParams p = init_params(3, 2, 1, {4});
        const Dataset data = standardized_gaussian(20, 3, 1.0, 7);
        const SensitivityReport a = feature_sensitivity(p, data, 10, 5);
        const SensitivityReport b = feature_sensitivity(p, data, 10, 5);
        CHECK(a.sample_indices == b.sample_indices);
        CHECK(a.s == b.s);
        CHECK_THROWS_AS(feature_sensitivity(p, data, 21, 5), ConfigError);
    }
}

TEST_CASE("shapley_exact oracle identities") {
    SplitMix64 rng(13);

    SUBCASE("single feature: phi = f(x) - mean f(background)") {
        const PredictFn f = linear_fn({3.0}, 1.0);
        const Matrix background = random_matrix(25, 1, rng);
        const std::vector<double> x{0.8};
        const Attribution attr = shapley_exact(f, x, background);
        double mean_fb = 0.0;
        for (std::size_t i = 0; i < 25; ++i) mean_fb += 3.0 * background(i, 0) + 1.0;
        mean_fb /= 25.0;
        CHECK(attr.phi[0] == doctest::Approx(3.0 * 0.8 + 1.0 - mean_fb).epsilon(1e-12));
        CHECK(attr.base_value == doctest::Approx(mean_fb).epsilon(1e-12));
    }
    SUBCASE("linear closed form w_i (x_i - mu_i)") {
        const std::vector<double> w{1.0, -2.0, 0.5, 3.0, -0.25};
        const PredictFn f = linear_fn(w, 0.4);
        const Matrix background = random_matrix(30, 5, rng, -2.0, 2.0);
        const std::vector<double> mu = column_means(background);
        std::vector<double> x(5);
        for (double& v : x) v = rng.next_uniform(-1.0, 1.0);
        const Attribution attr = shapley_exact(f, x, background);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(std::abs(attr.phi[j] - w[j] * (x[j] - mu[j])) <= 1e-9);
        }
    }
    SUBCASE("efficiency on a real model predictor") {
        const ModelParams p = init_params(6, 2, 19, {8, 4});
        const PredictFn f = make_predictor(p, AttributionTarget::Probability, 1);
        const Matrix background = random_matrix(40, 6, rng);
        std::vector<double> x(6);
        for (double& v : x) v = rng.next_uniform(-1.5, 1.5);
        const Attribution attr = shapley_exact(f, x, background);
        Matrix xm(1, 6);
        xm.set_row(0, x);
        const double fx = f(xm)[0];
        double total = attr.base_value;
        for (const double phi : attr.phi) total += phi;
        CHECK(std::abs(total - fx) <= 1e-9);
    }
    SUBCASE("symmetry: duplicated features share credit equally") {
        // Features 0 and 1 enter identically (same weight, same values).
        const PredictFn f = linear_fn({2.0, 2.0, -1.0}, 0.0);
        Matrix background = random_matrix(20, 3, rng);
        for (std::size_t i = 0; i < background.rows; ++i) background(i, 1) = background(i, 0);
        const std::vector<double> x{0.7, 0.7, -0.4};
        const Attribution attr = shapley_exact(f, x, background);
        CHECK(attr.phi[0] == doctest::Approx(attr.phi[1]).epsilon(1e-12));
    }
    SUBCASE("dummy feature gets exactly zero") {
        const PredictFn f = linear_fn({1.5, 0.0}, 2.0);
        const Matrix background = random_matrix(15, 2, rng);
        const Attribution attr = shapley_exact(f, {0.3, 0.9}, background);
        CHECK(attr.phi[1] == 0.0);
    }
    SUBCASE("too many features advises the sampling estimator") {
        const PredictFn f = linear_fn(std::vector<double>(13, 1.0), 0.0);
        const Matrix background = random_matrix(5, 13, rng);
        CHECK_THROWS_WITH_AS(shapley_exact(f, std::vector<double>(13, 0.0), background),
                             doctest::Contains("sampling estimator"), ConfigError);
    }
    SUBCASE("empty background rejected") {
        const PredictFn f = linear_fn({1.0}, 0.0);
        CHECK_THROWS_AS(shapley_exact(f, {0.5}, Matrix(0, 1)), ConfigError);
    }
}

TEST_CASE("shapley_sample estimator") {
    SplitMix64 rng(101);

    SUBCASE("close to the exact values on a d=10 model") {
        const ModelParams p = init_params(10, 2, 55, {12, 6});
        const PredictFn f = make_predictor(p, AttributionTarget::Probability, 1);
        const Matrix background = random_matrix(25, 10, rng);
        double total_err = 0.0;
        int count = 0;
        for (int s = 0; s < 3; ++s) {
            std::vector<double> x(10);
            for (double& v : x) v = rng.next_uniform(-1.5, 1.5);
            const Attribution exact = shapley_exact(f, x, background);
            const Attribution sampled = shapley_sample(f, x, background, 2000, 70 + s);
            for (std::size_t j = 0; j < 10; ++j) {
                total_err += std::abs(exact.phi[j] - sampled.phi[j]);
                ++count;
            }
        }
        CHECK(total_err / count <= 0.02);
    }
    SUBCASE("deterministic given the seed") {
        const PredictFn f = linear_fn({1.0, -1.0, 0.5}, 0.0);
        const Matrix background = random_matrix(10, 3, rng);
        const std::vector<double> x{0.2, -0.4, 0.9};
        const Attribution a = shapley_sample(f, x, background, 50, 8);
        const Attribution b = shapley_sample(f, x, background, 50, 8);
        CHECK(a.phi == b.phi);
        CHECK(a.std_err == b.std_err);
    }
    SUBCASE("efficiency holds within three summed standard errors") {
        const ModelParams p = init_params(7, 2, 77, {9});
        const PredictFn f = make_predictor(p, AttributionTarget::Probability, 1);
        const Matrix background = random_matrix(20, 7, rng);
        std::vector<double> x(7);
        for (double& v : x) v = rng.next_uniform(-1.0, 1.0);
        const Attribution attr = shapley_sample(f, x, background, 200, 15);
        Matrix xm(1, 7);
        xm.set_row(0, x);
        double total = attr.base_value, stderr_sum = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            total += attr.phi[j];
            stderr_sum += attr.std_err[j];
        }
        // Full permutation walks telescope, so the residual is rounding-level.
        CHECK(std::abs(total - f(xm)[0]) <= std::max(3.0 * stderr_sum, 1e-12));
    }
    SUBCASE("dummy feature stays within three standard errors of zero") {
        const PredictFn f = linear_fn({2.0, 0.0, -1.0}, 0.5);
        const Matrix background = random_matrix(15, 3, rng);
        const Attribution attr = shapley_sample(f, {0.4, 1.2, -0.8}, background, 100, 21);
        CHECK(std::abs(attr.phi[1]) <= std::max(3.0 * attr.std_err[1], 1e-12));
    }
}

TEST_CASE("attribution_drift") {
    const std::vector<double> w_eff{1.2, -0.8, 0.5, 2.0};
    const ModelParams lin = binary_linear(w_eff);
    const Dataset data = standardized_gaussian(60, 4, 1.0, 23);

    ShapleyConfig config;
    config.n_permutations = 16;
    config.target = AttributionTarget::Logit;
    config.class_index = 1;
    SplitMix64 rng(3);
    config.background = random_matrix(20, 4, rng);

    SUBCASE("identity attack produces exactly zero drift") {
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        spec.epsilon = 0.0;
        const std::vector<double> drift = attribution_drift(lin, data, spec, config, 20, 31);
        for (const double v : drift) CHECK(v == 0.0);
    }
    SUBCASE("linear model with nonzero gradients drifts by |w| * eps") {
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        spec.epsilon = 0.08;
        const std::vector<double> drift = attribution_drift(lin, data, spec, config, 25, 31);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(drift[j] - std::abs(w_eff[j]) * spec.epsilon) <= 1e-6);
        }
    }
    SUBCASE("exact estimator agrees with the sampler on the linear oracle") {
        ShapleyConfig exact_config = config;
        exact_config.exact = true;
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        spec.epsilon = 0.05;
        const std::vector<double> a = attribution_drift(lin, data, spec, config, 10, 5);
        const std::vector<double> b = attribution_drift(lin, data, spec, exact_config, 10, 5);
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-9);
    }
}

TEST_CASE("drift_grid") {
    const std::vector<double> w_eff{0.5, -1.5, 1.0};
    const ModelParams lin = binary_linear(w_eff);
    const Dataset data = standardized_gaussian(40, 3, 1.0, 29);

    ShapleyConfig config;
    config.n_permutations = 12;
    config.target = AttributionTarget::Logit;
    config.class_index = 1;
    SplitMix64 rng(4);
    config.background = random_matrix(15, 3, rng);

    AttackSpec spec;
    spec.kind = AttackKind::Fgsm;
    const EpsilonGrid grid = EpsilonGrid::linspace(0.2, 5);

    const DriftReport report = drift_grid(lin, data, spec, grid, 2, config, 12, 17, 0.1);

    SUBCASE("first row is exactly zero and rows scale linearly") {
        REQUIRE(report.grid.rows == 5);
        for (std::size_t j = 0; j < 3; ++j) CHECK(report.grid(0, j) == 0.0);
        for (std::size_t r = 1; r < 5; ++r) {
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(std::abs(report.grid(r, j) - std::abs(w_eff[j]) * grid.values[r]) <= 1e-6);
            }
        }
    }
    SUBCASE("ranking follows |w| and top_k truncates") {
        REQUIRE(report.top_features.size() == 2);
        CHECK(report.top_features[0] == 1);  // |w| = 1.5
        CHECK(report.top_features[1] == 2);  // |w| = 1.0
    }
    SUBCASE("headline drift at the requested epsilon") {
        CHECK(report.drift_epsilon == 0.1);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(report.delta_phi[j] - std::abs(w_eff[j]) * 0.1) <= 1e-6);
        }
    }
    SUBCASE("sensitivity-drift rank correlation is positive on the linear oracle") {
        const SensitivityReport sens = feature_sensitivity(lin, data, 40, 17);
        const double rho = spearman(sens.s, report.delta_phi);
        CHECK(rho > 0.0);
    }
    SUBCASE("single-point zero grid yields an all-zero grid") {
        EpsilonGrid zero_grid;
        zero_grid.values = {0.0};
        const DriftReport r = drift_grid(lin, data, spec, zero_grid, 3, config, 8, 17, 0.0);
        REQUIRE(r.grid.rows == 1);
        for (std::size_t j = 0; j < 3; ++j) CHECK(r.grid(0, j) == 0.0);
        for (std::size_t j = 0; j < 3; ++j) CHECK(r.delta_phi[j] == 0.0);
    }
}
