#include "advrob/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "advrob/errors.hpp"

namespace advrob {

std::string attack_name(AttackKind kind) {
    return kind == AttackKind::Fgsm ? "fgsm" : "pgd";
}

double robustness_index(const std::vector<double>& epsilons,
                        const std::vector<double>& accuracies) {
    if (epsilons.size() < 2) throw ConfigError("robustness_index: need at least 2 points");
    if (epsilons.size() != accuracies.size()) {
        throw ConfigError("robustness_index: grid and accuracy lengths differ");
    }
    if (epsilons.front() != 0.0) throw ConfigError("robustness_index: grid must start at 0");
    for (std::size_t i = 1; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > epsilons[i - 1])) {
            throw ConfigError("robustness_index: grid must be strictly increasing");
        }
    }
    double area = 0.0;
    for (std::size_t i = 1; i < epsilons.size(); ++i) {
        area += 0.5 * (accuracies[i] + accuracies[i - 1]) * (epsilons[i] - epsilons[i - 1]);
    }
    return area / epsilons.back();
}

double robustness_index(const RobustnessCurve& curve) {
    return robustness_index(curve.epsilons, curve.accuracies);
}

std::pair<double, double> precision_recall(const std::vector<int>& predictions,
                                           const std::vector<int>& labels,
                                           int positive_class) {
    if (predictions.empty() || predictions.size() != labels.size()) {
        throw ConfigError("precision_recall: empty or mismatched inputs");
    }
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i] == positive_class;
        const bool is_pos = labels[i] == positive_class;
        if (pred_pos && is_pos) ++tp;
        else if (pred_pos) ++fp;
        else if (is_pos) ++fn;
    }
    const double precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    return {precision, recall};
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
               int positive_class) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw ConfigError("roc_auc: empty or mismatched inputs");
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });

    // Mann-Whitney statistic via average ranks over tie groups.
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == positive_class) {
                pos_rank_sum += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: both classes must be present");
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double taylor_ri_estimate(double acc0, double slope, double eps_max) {
    if (!(eps_max > 0.0)) throw ConfigError("taylor_ri_estimate: eps_max must be > 0");
    const double estimate = acc0 + 0.5 * eps_max * slope;
    return std::clamp(estimate, 0.0, 1.0);
}

double curve_slope_at_zero(const RobustnessCurve& curve) {
    if (curve.epsilons.size() < 2) {
        throw ConfigError("curve_slope_at_zero: need at least 2 points");
    }
    return (curve.accuracies[1] - curve.accuracies[0]) /
           (curve.epsilons[1] - curve.epsilons[0]);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() != ys.size() || xs.size() < 2) return nan;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return nan;
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return pearson(average_ranks(xs), average_ranks(ys));
}

}  // namespace advrob
