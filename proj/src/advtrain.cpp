#include "advrob/advtrain.hpp"

#include <cmath>
#include <cstdlib>

#include "advrob/errors.hpp"
#include "advrob/rng.hpp"

namespace advrob {

namespace {

// Augmentation draws from its own seed stream, far away from the init and
// epoch-shuffle streams in model.cpp, so enabling it never perturbs the base
// trajectory's randomness.
constexpr std::uint64_t kStreamAugmentBase = 1'000'000;

Matrix attack_batch(const ModelParams& params, const Matrix& x, const std::vector<int>& y,
                    const AdvTrainConfig& config) {
    if (config.attack == AttackKind::Fgsm) {
        return fgsm(params, x, y, config.adv_epsilon);
    }
    AttackSpec spec;
    spec.kind = AttackKind::Pgd;
    spec.epsilon = config.adv_epsilon;
    spec.alpha = config.pgd_alpha;
    spec.iters = config.pgd_iters;
    return pgd(params, x, y, spec);
}

void check_ball(const Matrix& clean, const Matrix& adv, double epsilon) {
    for (std::size_t i = 0; i < clean.data.size(); ++i) {
        if (std::abs(adv.data[i] - clean.data[i]) > epsilon + 1e-12) {
            throw NumericError("adversarial training: augmented sample left the epsilon ball");
        }
    }
}

}  // namespace

TrainResult adv_train(const Dataset& data, const AdvTrainConfig& config) {
    if (config.adv_fraction < 0.0 || config.adv_fraction > 1.0) {
        throw ConfigError("adv_train: adv_fraction must be in [0, 1]");
    }
    if (config.adv_epsilon < 0.0) throw ConfigError("adv_train: adv_epsilon must be >= 0");

    const BatchHook hook = [&config](std::size_t epoch, std::size_t batch_index,
                                     const ModelParams& params, Matrix& xb,
                                     std::vector<int>& yb) {
        const auto k = static_cast<std::size_t>(
            std::floor(config.adv_fraction * static_cast<double>(xb.rows)));
        if (k == 0) return;

        SplitMix64 rng(derive_seed(derive_seed(config.base.seed, kStreamAugmentBase + epoch),
                                   batch_index));
        const std::vector<std::size_t> chosen = rng.sample_indices(xb.rows, k);

        Matrix clean(k, xb.cols);
        std::vector<int> labels(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < xb.cols; ++j) clean(i, j) = xb(chosen[i], j);
            labels[i] = yb[chosen[i]];
        }
        const Matrix adv = attack_batch(params, clean, labels, config);
        check_ball(clean, adv, config.adv_epsilon);

        if (config.mode == AugmentMode::Replace) {
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < xb.cols; ++j) xb(chosen[i], j) = adv(i, j);
            }
        } else {
            Matrix grown(xb.rows + k, xb.cols);
            std::copy(xb.data.begin(), xb.data.end(), grown.data.begin());
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < xb.cols; ++j) grown(xb.rows + i, j) = adv(i, j);
                yb.push_back(labels[i]);
            }
            xb = std::move(grown);
        }
    };

    return train(data, config.base, hook);
}

AblationRecord run_ablation(const Dataset& train_data, const Dataset& test_data,
                            const TrainConfig& base_config, const AdvTrainConfig& adv_config,
                            const AttackSpec& spec_fgsm, const AttackSpec& spec_pgd,
                            const EpsilonGrid& grid, const std::string& dataset_name,
                            bool baseline_only) {
    if (spec_fgsm.kind != AttackKind::Fgsm || spec_pgd.kind != AttackKind::Pgd) {
        throw ConfigError("run_ablation: attack specs are swapped");
    }

    auto evaluate_variant = [&](const ModelParams& params, const std::string& name) {
        AblationVariant variant;
        variant.name = name;
        variant.clean_accuracy = evaluate(params, test_data.x, test_data.y).accuracy;
        variant.curve_fgsm = sweep(params, test_data, spec_fgsm, grid, name, base_config.seed);
        variant.curve_pgd = sweep(params, test_data, spec_pgd, grid, name, base_config.seed);
        return variant;
    };

    AblationRecord record;
    record.dataset_name = dataset_name;

    // Both variants share base_config.seed, so the clean-accuracy gap is
    // attributable to the augmentation alone.
    const TrainResult baseline = train(train_data, base_config);
    record.baseline = evaluate_variant(baseline.params, "baseline");

    if (!baseline_only) {
        AdvTrainConfig adv = adv_config;
        adv.base = base_config;
        const TrainResult hardened = adv_train(train_data, adv);
        record.hardened = evaluate_variant(hardened.params, "adv_trained");
    }
    return record;
}

}  // namespace advrob
