#include "advrob/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "advrob/errors.hpp"
#include "advrob/rng.hpp"

namespace advrob {

namespace {

constexpr std::size_t kMaxExactFeatures = 12;

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

void check_background(const Matrix& background, std::size_t d) {
    if (background.rows == 0) throw ConfigError("shapley: empty background set");
    if (background.cols != d) throw ConfigError("shapley: background width mismatch");
}

Attribution attribute_one(const PredictFn& predict, const std::vector<double>& x,
                          const ShapleyConfig& config, std::uint64_t sample_seed) {
    if (config.exact) return shapley_exact(predict, x, config.background);
    return shapley_sample(predict, x, config.background, config.n_permutations, sample_seed);
}

struct Subsample {
    Matrix x;
    std::vector<int> y;
    std::vector<std::size_t> indices;
};

Subsample take_subsample(const Dataset& data, std::size_t n_samples, std::uint64_t seed) {
    if (data.size() == 0) throw DataError("explain: empty dataset");
    if (n_samples < 1 || n_samples > data.size()) {
        throw ConfigError("explain: n_samples must be in [1, dataset size]");
    }
    SplitMix64 rng(seed);
    Subsample sub;
    sub.indices = rng.sample_indices(data.size(), n_samples);
    sub.x = Matrix(n_samples, data.dim());
    sub.y.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::size_t src = sub.indices[i];
        for (std::size_t j = 0; j < data.dim(); ++j) sub.x(i, j) = data.x(src, j);
        sub.y[i] = data.y[src];
    }
    return sub;
}

}  // namespace

PredictFn make_predictor(const ModelParams& params, AttributionTarget target,
                         int class_index) {
    if (class_index < 0 || class_index >= static_cast<int>(params.output_dim())) {
        throw ConfigError("make_predictor: class index out of range");
    }
    const auto col = static_cast<std::size_t>(class_index);
    return [params, target, col](const Matrix& x) {
        const Matrix out =
            target == AttributionTarget::Probability ? forward(params, x) : logits(params, x);
        std::vector<double> scores(out.rows);
        for (std::size_t i = 0; i < out.rows; ++i) scores[i] = out(i, col);
        return scores;
    };
}

Matrix sample_background(const Dataset& data, std::size_t size, std::uint64_t seed) {
    if (data.size() == 0) throw DataError("sample_background: empty dataset");
    if (size < 1) throw ConfigError("sample_background: size must be >= 1");
    SplitMix64 rng(seed);
    const std::vector<std::size_t> idx = rng.sample_indices(data.size(), size);
    Matrix bg(idx.size(), data.dim());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) bg(i, j) = data.x(idx[i], j);
    }
    return bg;
}

SensitivityReport feature_sensitivity(const ModelParams& params, const Dataset& data,
                                      std::size_t n_samples, std::uint64_t seed) {
    const Subsample sub = take_subsample(data, n_samples, seed);
    const Matrix g = grad_input(params, sub.x, sub.y);

    SensitivityReport report;
    report.feature_names = data.feature_names;
    report.sample_indices = sub.indices;
    report.seed = seed;
    report.s.assign(data.dim(), 0.0);
    for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < g.cols; ++j) report.s[j] += std::abs(g(i, j));
    }
    for (double& v : report.s) v /= static_cast<double>(n_samples);
    return report;
}

Attribution shapley_exact(const PredictFn& predict, const std::vector<double>& x,
                          const Matrix& background) {
    const std::size_t d = x.size();
    if (d == 0) throw ConfigError("shapley_exact: empty input");
    if (d > kMaxExactFeatures) {
        throw ConfigError("shapley_exact: " + std::to_string(d) +
                          " features exceeds the exact-enumeration limit of " +
                          std::to_string(kMaxExactFeatures) +
                          "; use the sampling estimator");
    }
    check_background(background, d);
    const std::size_t m = background.rows;
    const std::size_t n_masks = std::size_t{1} << d;

    // Coalition values: mean model output with in-coalition features taken
    // from x and the rest from each background row.
    std::vector<double> value(n_masks);
    Matrix buf(m, d);
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                buf(i, j) = (mask >> j) & 1 ? x[j] : background(i, j);
            }
        }
        value[mask] = mean_of(predict(buf));
    }

    std::vector<double> fact(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    Attribution attr;
    attr.phi.assign(d, 0.0);
    attr.std_err.assign(d, 0.0);
    attr.base_value = value[0];
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        double phi = 0.0;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double weight = fact[s] * fact[d - 1 - s] / fact[d];
            phi += weight * (value[mask | bit] - value[mask]);
        }
        attr.phi[j] = phi;
    }
    return attr;
}

Attribution shapley_sample(const PredictFn& predict, const std::vector<double>& x,
                           const Matrix& background, int n_permutations,
                           std::uint64_t seed) {
    const std::size_t d = x.size();
    if (d == 0) throw ConfigError("shapley_sample: empty input");
    if (n_permutations < 1) throw ConfigError("shapley_sample: need n_permutations >= 1");
    check_background(background, d);
    const std::size_t m = background.rows;

    Attribution attr;
    attr.n_permutations = n_permutations;
    attr.base_value = mean_of(predict(background));

    std::vector<double> mean(d, 0.0), m2(d, 0.0), contrib(d, 0.0);
    std::vector<std::size_t> perm(d);
    SplitMix64 rng(seed);
    Matrix buf(m, d);

    for (int p = 0; p < n_permutations; ++p) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);
        buf.data = background.data;
        double v_prev = attr.base_value;
        for (const std::size_t j : perm) {
            for (std::size_t i = 0; i < m; ++i) buf(i, j) = x[j];
            const double v = mean_of(predict(buf));
            contrib[j] = v - v_prev;
            v_prev = v;
        }
        // Welford update per feature.
        const double count = static_cast<double>(p + 1);
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = contrib[j] - mean[j];
            mean[j] += delta / count;
            m2[j] += delta * (contrib[j] - mean[j]);
        }
    }

    attr.phi = mean;
    attr.std_err.assign(d, 0.0);
    if (n_permutations >= 2) {
        const double n = static_cast<double>(n_permutations);
        for (std::size_t j = 0; j < d; ++j) {
            attr.std_err[j] = std::sqrt(m2[j] / (n - 1.0) / n);
        }
    }
    return attr;
}

std::vector<double> attribution_drift(const ModelParams& params, const Dataset& data,
                                      const AttackSpec& spec, const ShapleyConfig& config,
                                      std::size_t n_samples, std::uint64_t seed) {
    const Subsample sub = take_subsample(data, n_samples, seed);
    const PredictFn predict = make_predictor(params, config.target, config.class_index);
    const Matrix adv = attack_at(params, sub.x, sub.y, spec, spec.epsilon);

    std::vector<double> drift(data.dim(), 0.0);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::uint64_t sample_seed = derive_seed(seed, i);
        const Attribution clean = attribute_one(predict, sub.x.row_vector(i), config, sample_seed);
        const Attribution attacked =
            attribute_one(predict, adv.row_vector(i), config, sample_seed);
        for (std::size_t j = 0; j < drift.size(); ++j) {
            drift[j] += std::abs(attacked.phi[j] - clean.phi[j]);
        }
    }
    for (double& v : drift) v /= static_cast<double>(n_samples);
    return drift;
}

DriftReport drift_grid(const ModelParams& params, const Dataset& data, const AttackSpec& spec,
                       const EpsilonGrid& grid, std::size_t top_k, const ShapleyConfig& config,
                       std::size_t n_samples, std::uint64_t seed, double headline_eps) {
    grid.validate();
    if (headline_eps < 0.0) throw ConfigError("drift_grid: headline epsilon must be >= 0");
    const Subsample sub = take_subsample(data, n_samples, seed);
    const PredictFn predict = make_predictor(params, config.target, config.class_index);
    const std::size_t d = data.dim();

    // Clean attributions are shared across every epsilon (common random
    // numbers: the attacked side of each pair reuses the same sample seed).
    std::vector<Attribution> clean(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        clean[i] = attribute_one(predict, sub.x.row_vector(i), config, derive_seed(seed, i));
    }

    auto drift_at = [&](double eps) {
        std::vector<double> row(d, 0.0);
        if (eps == 0.0) return row;  // identity attack, exact zeros
        const Matrix adv = attack_at(params, sub.x, sub.y, spec, eps);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const Attribution attacked =
                attribute_one(predict, adv.row_vector(i), config, derive_seed(seed, i));
            for (std::size_t j = 0; j < d; ++j) {
                row[j] += std::abs(attacked.phi[j] - clean[i].phi[j]);
            }
        }
        for (double& v : row) v /= static_cast<double>(n_samples);
        return row;
    };

    DriftReport report;
    report.feature_names = data.feature_names;
    report.sample_indices = sub.indices;
    report.grid_epsilons = grid.values;
    report.grid = Matrix(grid.values.size(), d);
    for (std::size_t r = 0; r < grid.values.size(); ++r) {
        report.grid.set_row(r, drift_at(grid.values[r]));
    }
    report.drift_epsilon = headline_eps;
    report.delta_phi = drift_at(headline_eps);

    // Rank features by drift at eps_max; ties resolve to the lower index.
    const std::vector<double> last = report.grid.row_vector(grid.values.size() - 1);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return last[a] > last[b]; });
    order.resize(std::min(top_k, d));
    report.top_features = std::move(order);
    return report;
}

}  // namespace advrob
