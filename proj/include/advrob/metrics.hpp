#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace advrob {

enum class AttackKind { Fgsm, Pgd };

std::string attack_name(AttackKind kind);

// Accuracy-versus-epsilon curve plus its Robustness Index (normalized area
// under the curve). `label` and `seed` identify the model the curve came from.
struct RobustnessCurve {
    std::vector<double> epsilons;    // strictly increasing, starting at 0
    std::vector<double> accuracies;  // same length, values in [0, 1]
    double ri = 0.0;
    AttackKind attack = AttackKind::Fgsm;
    std::string label;
    std::uint64_t seed = 0;
};

// Composite trapezoidal rule over the sampled points divided by eps_max.
// Requires >= 2 points, a strictly increasing grid, and epsilons[0] == 0.
double robustness_index(const std::vector<double>& epsilons,
                        const std::vector<double>& accuracies);
double robustness_index(const RobustnessCurve& curve);

// Precision/recall for a binary task. Zero-denominator convention: a metric
// whose denominator is empty is 0, so aggregate tables stay total.
std::pair<double, double> precision_recall(const std::vector<int>& predictions,
                                           const std::vector<int>& labels,
                                           int positive_class);

// Rank-based (Mann-Whitney) AUC; tied scores count 1/2. Throws on
// single-class input.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
               int positive_class = 1);

// First-order estimate acc0 + eps_max/2 * slope, clamped to [0, 1]. Equals the
// trapezoidal Robustness Index exactly on affine accuracy curves.
double taylor_ri_estimate(double acc0, double slope, double eps_max);

// Forward difference (acc[1] - acc[0]) / (eps[1] - eps[0]).
double curve_slope_at_zero(const RobustnessCurve& curve);

// Correlation diagnostics. Both return NaN when undefined (fewer than two
// points or zero variance); callers report that as null.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace advrob
