#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "advrob/attacks.hpp"
#include "advrob/data.hpp"
#include "advrob/matrix.hpp"
#include "advrob/model.hpp"

namespace advrob {

// Batch scalar predictor: one output per input row. Attribution code is
// model-agnostic through this interface, which is what lets the tests swap in
// closed-form linear predictors.
using PredictFn = std::function<std::vector<double>(const Matrix&)>;

enum class AttributionTarget { Probability, Logit };

// Mean absolute loss gradient per feature over a seeded test subsample.
struct SensitivityReport {
    std::vector<double> s;
    std::vector<std::string> feature_names;
    std::vector<std::size_t> sample_indices;  // recorded for reproducibility
    std::uint64_t seed = 0;
};

// Shapley attribution of one prediction. For the sampled estimator,
// std_err[i] is the Monte-Carlo standard error of phi[i] (zero for the exact
// enumerator and for fewer than two permutations).
struct Attribution {
    std::vector<double> phi;
    double base_value = 0.0;
    std::vector<double> std_err;
    int n_permutations = 0;  // 0 for the exact enumerator
};

// Settings shared by all attribution entry points. The background matrix
// defines the "feature absent" baseline: out-of-coalition features are
// replaced by each background row's values and averaged (interventional
// marginal expectation).
struct ShapleyConfig {
    Matrix background;
    int n_permutations = 64;
    AttributionTarget target = AttributionTarget::Probability;
    int class_index = 1;
    bool exact = false;
};

struct DriftReport {
    std::vector<double> delta_phi;            // headline drift at drift_epsilon
    double drift_epsilon = 0.0;
    std::vector<double> grid_epsilons;
    Matrix grid;                              // |grid| x d mean absolute drift
    std::vector<std::size_t> top_features;    // ranked by drift at eps_max
    std::vector<std::string> feature_names;
    std::vector<std::size_t> sample_indices;
};

PredictFn make_predictor(const ModelParams& params, AttributionTarget target,
                         int class_index);

// Seeded without-replacement sample of training rows used as the Shapley
// background set.
Matrix sample_background(const Dataset& data, std::size_t size, std::uint64_t seed);

SensitivityReport feature_sensitivity(const ModelParams& params, const Dataset& data,
                                      std::size_t n_samples, std::uint64_t seed);

// Exact Shapley values by enumerating all 2^d coalitions; d is capped at 12.
Attribution shapley_exact(const PredictFn& predict, const std::vector<double>& x,
                          const Matrix& background);

// Permutation-sampling Monte-Carlo estimate of the same game. Walking full
// permutations makes the efficiency identity hold to rounding error
// regardless of the permutation count.
Attribution shapley_sample(const PredictFn& predict, const std::vector<double>& x,
                           const Matrix& background, int n_permutations,
                           std::uint64_t seed);

// Mean absolute per-feature attribution change between each subsampled input
// and its attacked version. Clean and attacked attributions share one
// estimator seed per sample, so at eps = 0 the result is exactly zero.
std::vector<double> attribution_drift(const ModelParams& params, const Dataset& data,
                                      const AttackSpec& spec, const ShapleyConfig& config,
                                      std::size_t n_samples, std::uint64_t seed);

// Full drift analysis: one attribution_drift row per grid value (clean
// attributions computed once and shared), a headline row at headline_eps,
// and features ranked by drift at eps_max.
DriftReport drift_grid(const ModelParams& params, const Dataset& data, const AttackSpec& spec,
                       const EpsilonGrid& grid, std::size_t top_k, const ShapleyConfig& config,
                       std::size_t n_samples, std::uint64_t seed, double headline_eps);

}  // namespace advrob
