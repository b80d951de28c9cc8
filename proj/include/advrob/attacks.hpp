#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advrob/data.hpp"
#include "advrob/matrix.hpp"
#include "advrob/metrics.hpp"
#include "advrob/model.hpp"

namespace advrob {

// L-infinity attack parameters. Epsilon and alpha are in standardized
// (z-score) feature units. `seed` feeds the PGD random start only; with
// random_start = false (the default) both attacks are fully deterministic.
struct AttackSpec {
    AttackKind kind = AttackKind::Fgsm;
    double epsilon = 0.0;
    double alpha = 0.01;
    int iters = 10;
    bool random_start = false;
    std::uint64_t seed = 0;
};

// Strictly increasing perturbation budgets starting at 0.
struct EpsilonGrid {
    std::vector<double> values;

    static EpsilonGrid linspace(double eps_max, int steps);
    void validate() const;
};

// Single-step attack x' = x + eps * sign(grad_x loss), with sign(0) = 0, so
// every coordinate with a nonzero gradient lands exactly on the ball surface.
// Gradients are taken per sample, never batch-averaged.
Matrix fgsm(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
            double epsilon);

// Iterated sign steps of size alpha projected back into the eps-ball around
// x. The perturbation is tracked directly, so every iterate satisfies the
// ball constraint exactly; with iters = 1, alpha >= eps, and no random start
// the result is bitwise identical to fgsm. If `trace` is non-null it receives
// every intermediate iterate.
Matrix pgd(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
           const AttackSpec& spec, std::vector<Matrix>* trace = nullptr);

// Per-coordinate clamp of (point - center) to [-eps, +eps]; idempotent.
std::vector<double> project_linf(const std::vector<double>& center,
                                 const std::vector<double>& point, double epsilon);

// Runs the attack described by `spec` at each grid value over the whole
// dataset and records accuracy. The entry at eps = 0 equals clean accuracy
// bit-exactly. The curve's Robustness Index is filled in via the trapezoidal
// rule; a degenerate single-point grid carries its lone accuracy as the RI
// (the eps_max -> 0 limit).
RobustnessCurve sweep(const ModelParams& params, const Dataset& data, const AttackSpec& spec,
                      const EpsilonGrid& grid, const std::string& label = "",
                      std::uint64_t model_seed = 0);

// The attacked dataset for one budget: dispatches on spec.kind with
// spec.epsilon overridden by `epsilon`.
Matrix attack_at(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
                 const AttackSpec& spec, double epsilon);

}  // namespace advrob
