#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "advrob/advtrain.hpp"
#include "advrob/report.hpp"

namespace advrob {

// Explainability settings. `n_samples` drives the headline sensitivity/drift
// numbers; `grid_samples` is a separate (smaller) budget for the per-epsilon
// drift grid, which costs one attribution pass per grid value. With the same
// seed the grid subset is a prefix of the headline subset.
struct ExplainSettings {
    std::size_t n_samples = 256;
    std::size_t background_size = 100;
    int n_permutations = 64;
    double drift_epsilon = 0.1;
    AttackKind drift_attack = AttackKind::Fgsm;
    std::size_t top_k = 10;
    std::size_t grid_samples = 64;
    bool exact = false;
    AttributionTarget target = AttributionTarget::Probability;
    std::uint64_t seed = 7;
};

// Everything a full run needs. Defaults reproduce the standard protocol:
// 80/20 split, z-score standardization fit on train, Adam lr 0.001 batch 128
// for 20 epochs, epsilon in linspace(0, 0.3, 10), PGD alpha 0.01 with 10
// iterations, three seeds, FGSM batch augmentation of 20% at epsilon 0.05.
struct RunConfig {
    std::string data_path;
    std::string label_column = "label";
    std::string dataset_name;  // defaults to the data file's stem

    double split_fraction = 0.8;
    std::uint64_t split_seed = 42;

    TrainConfig train;  // per-run seed comes from `seeds`
    std::vector<std::uint64_t> seeds = {1, 2, 3};

    std::vector<AttackKind> attacks = {AttackKind::Fgsm, AttackKind::Pgd};
    double alpha = 0.01;
    int iters = 10;
    bool random_start = false;
    double eps_max = 0.3;
    int eps_steps = 10;

    int positive_class = 1;
    ExplainSettings explain;

    double adv_fraction = 0.2;
    double adv_epsilon = 0.05;
    AttackKind adv_attack = AttackKind::Fgsm;
    AugmentMode augment_mode = AugmentMode::Replace;

    bool with_ablation = false;
    bool baseline_only = false;
    std::string out_dir = "advrob_out";
    bool stamp = false;  // include a wall-clock timestamp (breaks byte-reproducibility)
};

enum Stage : unsigned {
    kStageTrain = 1u,
    kStageSweep = 2u,
    kStageExplain = 4u,
    kStageAblation = 8u,
    kStageAll = kStageTrain | kStageSweep | kStageExplain | kStageAblation,
};

AttackKind attack_from_name(const std::string& name);
AttributionTarget target_from_name(const std::string& name);
AugmentMode augment_mode_from_name(const std::string& name);

// Effective-config echo, written next to every report so runs are
// reproducible from the output directory alone.
nlohmann::json config_to_json(const RunConfig& config);

// Applies a JSON config file on top of defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& doc);

struct PipelineResult {
    RunReport report;
    std::vector<TrainResult> models;  // one per seed, when a model stage ran
};

// Executes the requested stages and assembles the report. Writes nothing.
PipelineResult run_pipeline(const RunConfig& config, unsigned stages);

// Writes report.json, effective_config.json, checkpoints, histories, and all
// CSV views into config.out_dir.
void write_outputs(const PipelineResult& result, const RunConfig& config, unsigned stages);

// Built-in oracle checks on synthetic data (finite differences, exact
// Shapley, trapezoid rule, ball containment, single-step PGD/FGSM
// equivalence). Prints one line per check; returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace advrob
