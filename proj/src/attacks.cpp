#include "advrob/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "advrob/errors.hpp"
#include "advrob/rng.hpp"

namespace advrob {

namespace {

double sign0(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

void check_gradient_finite(const Matrix& g) {
    for (double v : g.data) {
        if (!std::isfinite(v)) {
            throw NumericError("attack aborted: non-finite input gradient (unstable model)");
        }
    }
}

}  // namespace

EpsilonGrid EpsilonGrid::linspace(double eps_max, int steps) {
    if (steps < 1) throw ConfigError("epsilon grid: need at least 1 step");
    if (steps > 1 && !(eps_max > 0.0)) {
        throw ConfigError("epsilon grid: eps_max must be > 0");
    }
    EpsilonGrid grid;
    grid.values.reserve(static_cast<std::size_t>(steps));
    if (steps == 1) {
        grid.values.push_back(0.0);
        return grid;
    }
    for (int i = 0; i < steps; ++i) {
        grid.values.push_back(eps_max * static_cast<double>(i) /
                              static_cast<double>(steps - 1));
    }
    return grid;
}

void EpsilonGrid::validate() const {
    if (values.empty()) throw ConfigError("epsilon grid: empty");
    if (values.front() != 0.0) throw ConfigError("epsilon grid: must start at 0");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw ConfigError("epsilon grid: non-finite value");
        if (i > 0 && !(values[i] > values[i - 1])) {
            throw ConfigError("epsilon grid: values must be strictly increasing");
        }
    }
}

Matrix fgsm(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
            double epsilon) {
    if (epsilon < 0.0) throw ConfigError("fgsm: epsilon must be >= 0");
    const Matrix g = grad_input(params, x, y);
    check_gradient_finite(g);
    Matrix adv = x;
    for (std::size_t i = 0; i < adv.data.size(); ++i) {
        adv.data[i] = x.data[i] + epsilon * sign0(g.data[i]);
    }
    return adv;
}

Matrix pgd(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
           const AttackSpec& spec, std::vector<Matrix>* trace) {
    if (spec.kind != AttackKind::Pgd) throw ConfigError("pgd: spec.kind must be PGD");
    if (spec.epsilon < 0.0) throw ConfigError("pgd: epsilon must be >= 0");
    if (spec.iters < 1 || !(spec.alpha > 0.0)) {
        throw ConfigError("pgd: need iters >= 1 and alpha > 0");
    }

    // The perturbation is stored separately from x and clamped each step, so
    // ball containment never depends on cancellation in x + delta - x.
    Matrix delta(x.rows, x.cols);
    if (spec.random_start && spec.epsilon > 0.0) {
        // One derived stream per sample keeps results independent of batch
        // composition and evaluation order.
        for (std::size_t i = 0; i < x.rows; ++i) {
            SplitMix64 rng(derive_seed(spec.seed, i));
            for (std::size_t j = 0; j < x.cols; ++j) {
                delta(i, j) = rng.next_uniform(-spec.epsilon, spec.epsilon);
            }
        }
    }

    Matrix current(x.rows, x.cols);
    for (int t = 0; t < spec.iters; ++t) {
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            current.data[i] = x.data[i] + delta.data[i];
        }
        const Matrix g = grad_input(params, current, y);
        check_gradient_finite(g);
        for (std::size_t i = 0; i < delta.data.size(); ++i) {
            const double stepped = delta.data[i] + spec.alpha * sign0(g.data[i]);
            delta.data[i] = std::clamp(stepped, -spec.epsilon, spec.epsilon);
        }
        if (trace) {
            Matrix iterate(x.rows, x.cols);
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                iterate.data[i] = x.data[i] + delta.data[i];
            }
            trace->push_back(std::move(iterate));
        }
    }

    Matrix adv(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        adv.data[i] = x.data[i] + delta.data[i];
    }
    return adv;
}

std::vector<double> project_linf(const std::vector<double>& center,
                                 const std::vector<double>& point, double epsilon) {
    if (epsilon < 0.0) throw ConfigError("project_linf: epsilon must be >= 0");
    if (center.size() != point.size()) throw ConfigError("project_linf: dimension mismatch");
    std::vector<double> out(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        out[i] = center[i] + std::clamp(point[i] - center[i], -epsilon, epsilon);
    }
    return out;
}

Matrix attack_at(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
                 const AttackSpec& spec, double epsilon) {
    if (spec.kind == AttackKind::Fgsm) return fgsm(params, x, y, epsilon);
    AttackSpec at = spec;
    at.epsilon = epsilon;
    return pgd(params, x, y, at);
}

RobustnessCurve sweep(const ModelParams& params, const Dataset& data, const AttackSpec& spec,
                      const EpsilonGrid& grid, const std::string& label,
                      std::uint64_t model_seed) {
    grid.validate();
    if (data.size() == 0) throw DataError("sweep: empty dataset");

    RobustnessCurve curve;
    curve.attack = spec.kind;
    curve.label = label;
    curve.seed = model_seed;
    curve.epsilons = grid.values;
    curve.accuracies.reserve(grid.values.size());
    for (const double eps : grid.values) {
        const Matrix adv = attack_at(params, data.x, data.y, spec, eps);
        curve.accuracies.push_back(evaluate(params, adv, data.y).accuracy);
    }
    curve.ri = grid.values.size() >= 2 ? robustness_index(curve) : curve.accuracies.front();
    return curve;
}

}  // namespace advrob
