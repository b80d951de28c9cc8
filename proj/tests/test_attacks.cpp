#include <doctest.h>

#include <cmath>

#include "advrob/attacks.hpp"
#include "advrob/errors.hpp"
#include "advrob/rng.hpp"
#include "test_helpers.hpp"

using namespace advrob;
using testutil::linear_softmax;
using testutil::random_matrix;
using testutil::standardized_gaussian;

namespace {

// Binary linear-softmax model whose loss gradient sign at any input equals
// sign(w1 - w0) for true label 0 (and flips for label 1), making attack
// directions fully predictable.
ModelParams directional_linear(const std::vector<double>& w_eff) {
    Matrix w(w_eff.size(), 2);
    for (std::size_t j = 0; j < w_eff.size(); ++j) {
        w(j, 0) = 0.0;
        w(j, 1) = w_eff[j];
    }
    return linear_softmax(w, {0.0, 0.0});
}

double sample_loss(const ModelParams& params, const Matrix& x, int y, std::size_t row) {
    Matrix xi(1, x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) xi(0, j) = x(row, j);
    return loss(params, xi, {y});
}

}  // namespace

TEST_CASE("epsilon grid construction") {
    const EpsilonGrid grid = EpsilonGrid::linspace(0.3, 10);
    REQUIRE(grid.values.size() == 10);
    CHECK(grid.values.front() == 0.0);
    CHECK(grid.values.back() == 0.3);
    for (std::size_t i = 1; i < 10; ++i) CHECK(grid.values[i] > grid.values[i - 1]);
    grid.validate();

    CHECK_THROWS_AS(EpsilonGrid::linspace(0.0, 10), ConfigError);
    EpsilonGrid bad;
    bad.values = {0.1, 0.2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.values = {0.0, 0.2, 0.2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("fgsm") {
    SUBCASE("epsilon 0 returns the input values") {
        const Dataset data = standardized_gaussian(50, 4, 2.0, 3);
        const ModelParams p = init_params(4, 2, 10, {6});
        const Matrix adv = fgsm(p, data.x, data.y, 0.0);
        for (std::size_t i = 0; i < adv.data.size(); ++i) CHECK(adv.data[i] == data.x.data[i]);
    }
    SUBCASE("moves by epsilon along the gradient sign, sign(0) = 0") {
        // For label 0, grad = p1 * (w1 - w0); choose w1 - w0 = (+2, -0.5, 0).
        const ModelParams p = directional_linear({2.0, -0.5, 0.0});
        Matrix x(1, 3);
        x(0, 0) = 0.3;
        x(0, 1) = -0.7;
        x(0, 2) = 1.1;
        const Matrix adv = fgsm(p, x, {0}, 0.1);
        CHECK(adv(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(adv(0, 1) == doctest::Approx(-0.8).epsilon(1e-15));
        CHECK(adv(0, 2) == x(0, 2));  // zero gradient coordinate is untouched
    }
    SUBCASE("nonzero-gradient coordinates sit exactly on the ball surface") {
        const Dataset data = standardized_gaussian(100, 5, 2.0, 4);
        TrainConfig tc;
        tc.epochs = 3;
        tc.seed = 2;
        const ModelParams p = train(data, tc).params;
        const double eps = 0.07;
        const Matrix g = grad_input(p, data.x, data.y);
        const Matrix adv = fgsm(p, data.x, data.y, eps);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            const double moved = std::abs(adv.data[i] - data.x.data[i]);
            if (g.data[i] != 0.0) CHECK(std::abs(moved - eps) <= 1e-12);
            else CHECK(moved == 0.0);
        }
    }
    SUBCASE("decreases the true-class margin by eps * l1(w_eff) on a linear model") {
        const std::vector<double> w_eff{1.5, -2.0, 0.7, -0.3};
        const ModelParams p = directional_linear(w_eff);
        double l1 = 0.0;
        for (const double w : w_eff) l1 += std::abs(w);
        SplitMix64 rng(8);
        const Matrix x = random_matrix(20, 4, rng, -2.0, 2.0);
        const double eps = 0.05;
        for (const int label : {0, 1}) {
            const std::vector<int> y(20, label);
            const Matrix adv = fgsm(p, x, y, eps);
            const Matrix z0 = logits(p, x);
            const Matrix z1 = logits(p, adv);
            for (std::size_t i = 0; i < 20; ++i) {
                const double sign = label == 1 ? 1.0 : -1.0;
                const double margin_before = sign * (z0(i, 1) - z0(i, 0));
                const double margin_after = sign * (z1(i, 1) - z1(i, 0));
                CHECK(margin_before - margin_after == doctest::Approx(eps * l1).epsilon(1e-12));
            }
        }
    }
    SUBCASE("negative epsilon rejected") {
        const ModelParams p = directional_linear({1.0});
        CHECK_THROWS_AS(fgsm(p, Matrix(1, 1), {0}, -0.1), ConfigError);
    }
}

TEST_CASE("project_linf") {
    SUBCASE("points inside the ball are unchanged") {
        const std::vector<double> center{1.0, -2.0, 0.5};
        const std::vector<double> point{1.05, -2.02, 0.44};
        CHECK(project_linf(center, point, 0.1) == point);
    }
    SUBCASE("clamps to the surface") {
        const std::vector<double> out = project_linf({0.0, 0.0}, {0.5, -0.5}, 0.1);
        CHECK(out[0] == 0.1);
        CHECK(out[1] == -0.1);
    }
    SUBCASE("idempotent on random points") {
        SplitMix64 rng(5);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> center(4), point(4);
            for (std::size_t j = 0; j < 4; ++j) {
                center[j] = rng.next_uniform(-3.0, 3.0);
                point[j] = rng.next_uniform(-3.0, 3.0);
            }
            const double eps = rng.next_double();
            const std::vector<double> once = project_linf(center, point, eps);
            CHECK(project_linf(center, once, eps) == once);
        }
    }
}

TEST_CASE("pgd") {
    const Dataset data = standardized_gaussian(200, 5, 2.0, 6);
    TrainConfig tc;
    tc.epochs = 3;
    tc.seed = 4;
    const ModelParams p = train(data, tc).params;

    SUBCASE("epsilon 0 returns the input regardless of iterations") {
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.0;
        spec.iters = 5;
        const Matrix adv = pgd(p, data.x, data.y, spec);
        for (std::size_t i = 0; i < adv.data.size(); ++i) CHECK(adv.data[i] == data.x.data[i]);
    }
    SUBCASE("one saturating step equals fgsm bitwise") {
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.08;
        spec.alpha = 0.1;
        spec.iters = 1;
        const Matrix a = pgd(p, data.x, data.y, spec);
        const Matrix b = fgsm(p, data.x, data.y, 0.08);
        CHECK(a.data == b.data);
    }
    SUBCASE("all iterates stay inside the ball") {
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.15;
        std::vector<Matrix> trace;
        pgd(p, data.x, data.y, spec, &trace);
        REQUIRE(trace.size() == 10);
        for (const Matrix& iterate : trace) {
            for (std::size_t i = 0; i < iterate.data.size(); ++i) {
                CHECK(std::abs(iterate.data[i] - data.x.data[i]) <= 0.15 + 1e-12);
            }
        }
    }
    SUBCASE("reaches the linear-model ball corner within ceil(eps/alpha) iterations") {
        const ModelParams lin = directional_linear({1.0, -0.5, 2.0});
        SplitMix64 rng(7);
        const Matrix x = random_matrix(10, 3, rng);
        const std::vector<int> y(10, 0);
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.1;
        spec.alpha = 0.03;
        spec.iters = static_cast<int>(std::ceil(spec.epsilon / spec.alpha));
        const Matrix adv = pgd(lin, x, y, spec);
        const Matrix corner = fgsm(lin, x, y, spec.epsilon);
        CHECK(adv.data == corner.data);
    }
    SUBCASE("random start stays in the ball and is seed-deterministic") {
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.1;
        spec.random_start = true;
        spec.seed = 99;
        std::vector<Matrix> trace;
        const Matrix a = pgd(p, data.x, data.y, spec, &trace);
        for (const Matrix& iterate : trace) {
            for (std::size_t i = 0; i < iterate.data.size(); ++i) {
                CHECK(std::abs(iterate.data[i] - data.x.data[i]) <= 0.1 + 1e-12);
            }
        }
        const Matrix b = pgd(p, data.x, data.y, spec);
        CHECK(a.data == b.data);
        spec.seed = 100;
        const Matrix c = pgd(p, data.x, data.y, spec);
        CHECK(a.data != c.data);
    }
    SUBCASE("invalid specs rejected") {
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        CHECK_THROWS_AS(pgd(p, data.x, data.y, spec), ConfigError);
        spec.kind = AttackKind::Pgd;
        spec.iters = 0;
        CHECK_THROWS_AS(pgd(p, data.x, data.y, spec), ConfigError);
    }
}

TEST_CASE("attacks never decrease per-sample loss on a linear model") {
    const ModelParams lin = directional_linear({0.8, -1.2, 0.4});
    SplitMix64 rng(9);
    const Matrix x = random_matrix(50, 3, rng, -2.0, 2.0);
    std::vector<int> y(50);
    for (int& c : y) c = static_cast<int>(rng.next_below(2));
    const Matrix adv = fgsm(lin, x, y, 0.05);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(sample_loss(lin, adv, y[i], i) >= sample_loss(lin, x, y[i], i));
    }
}

TEST_CASE("attacks increase loss on most samples of a trained model") {
    const Dataset data = standardized_gaussian(400, 6, 1.5, 11);
    TrainConfig tc;
    tc.seed = 5;
    const ModelParams p = train(data, tc).params;
    const Matrix adv = fgsm(p, data.x, data.y, 0.05);
    int increased = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (sample_loss(p, adv, data.y[i], i) >= sample_loss(p, data.x, data.y[i], i)) {
            ++increased;
        }
    }
    CHECK(increased >= static_cast<int>(0.95 * static_cast<double>(data.size())));
}

TEST_CASE("sweep") {
    const Dataset data = standardized_gaussian(120, 4, 2.5, 13);
    TrainConfig tc;
    tc.epochs = 5;
    tc.seed = 3;
    const ModelParams p = train(data, tc).params;

    SUBCASE("degenerate single-point grid carries clean accuracy") {
        EpsilonGrid grid;
        grid.values = {0.0};
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        const RobustnessCurve curve = sweep(p, data, spec, grid);
        REQUIRE(curve.accuracies.size() == 1);
        const double clean = evaluate(p, data.x, data.y).accuracy;
        CHECK(curve.accuracies[0] == clean);
        CHECK(curve.ri == clean);
    }
    SUBCASE("epsilon 0 entry reproduces evaluate() bit-exactly") {
        const EpsilonGrid grid = EpsilonGrid::linspace(0.3, 10);
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        const RobustnessCurve curve = sweep(p, data, spec, grid);
        CHECK(curve.accuracies.front() == evaluate(p, data.x, data.y).accuracy);
        CHECK(curve.ri >= 0.0);
        CHECK(curve.ri <= 1.0);
    }
    SUBCASE("deterministic") {
        const EpsilonGrid grid = EpsilonGrid::linspace(0.2, 5);
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.2;
        const RobustnessCurve a = sweep(p, data, spec, grid, "x", 1);
        const RobustnessCurve b = sweep(p, data, spec, grid, "x", 1);
        CHECK(a.accuracies == b.accuracies);
        CHECK(a.ri == b.ri);
    }
    SUBCASE("empty dataset rejected") {
        Dataset empty;
        empty.x = Matrix(0, 4);
        empty.n_classes = 2;
        AttackSpec spec;
        CHECK_THROWS_AS(sweep(p, empty, spec, EpsilonGrid::linspace(0.3, 5)), DataError);
    }
}
