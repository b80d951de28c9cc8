#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "advrob/attacks.hpp"
#include "advrob/data.hpp"
#include "advrob/model.hpp"

namespace advrob {

// How adversarial samples enter a training batch. Replace keeps the batch
// size and step count identical to plain training, which makes the
// baseline-vs-hardened comparison controlled; Append grows the batch.
enum class AugmentMode { Replace, Append };

struct AdvTrainConfig {
    TrainConfig base;
    double adv_fraction = 0.2;
    double adv_epsilon = 0.05;
    AttackKind attack = AttackKind::Fgsm;
    AugmentMode mode = AugmentMode::Replace;
    double pgd_alpha = 0.01;  // used only when attack == Pgd
    int pgd_iters = 10;       // used only when attack == Pgd
};

struct AblationVariant {
    std::string name;
    double clean_accuracy = 0.0;
    RobustnessCurve curve_fgsm;
    RobustnessCurve curve_pgd;
};

// Baseline-vs-hardened comparison for one dataset. delta_ri() is derived
// from the two PGD Robustness Indices so the table stays consistent by
// construction.
struct AblationRecord {
    std::string dataset_name;
    AblationVariant baseline;
    std::optional<AblationVariant> hardened;

    double delta_ri() const {
        return hardened ? hardened->curve_pgd.ri - baseline.curve_pgd.ri : 0.0;
    }
};

// Online adversarial training: each batch, a seeded selection of
// floor(adv_fraction * batch) samples is attacked against the current
// parameters at adv_epsilon and swapped in (or appended) before the gradient
// step. With adv_fraction = 0 or adv_epsilon = 0 the trajectory is
// bit-identical to train() under the same seed. Every augmented sample is
// checked online against the epsilon ball of its clean original.
TrainResult adv_train(const Dataset& data, const AdvTrainConfig& config);

// Trains both variants with the shared seed from base_config, sweeps both
// attacks on the test split, and assembles the comparison record. With
// baseline_only the hardened variant is skipped.
AblationRecord run_ablation(const Dataset& train_data, const Dataset& test_data,
                            const TrainConfig& base_config, const AdvTrainConfig& adv_config,
                            const AttackSpec& spec_fgsm, const AttackSpec& spec_pgd,
                            const EpsilonGrid& grid, const std::string& dataset_name,
                            bool baseline_only = false);

}  // namespace advrob
