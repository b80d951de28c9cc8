// advrob - adversarial robustness and explanation-drift evaluation for small
// tabular MLP classifiers.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data error,
// 4 internal check or numeric failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "advrob/data.hpp"
#include "advrob/errors.hpp"
#include "advrob/pipeline.hpp"
#include "advrob/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

advrob::RunConfig load_base_config(int argc, char** argv) {
    advrob::RunConfig base;
    if (const char* env_out = std::getenv("ADVROB_OUT")) base.out_dir = env_out;

    for (int i = 1; i + 1 < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" || arg == "-c") {
            const std::string path = argv[i + 1];
            std::ifstream in(path, std::ios::binary);
            if (!in) throw advrob::ConfigError("cannot open config file: " + path);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw advrob::ConfigError("malformed config file " + path + ": " + e.what());
            }
            const std::string saved_out = base.out_dir;
            base = advrob::config_from_json(doc);
            if (!doc.contains("out") && saved_out != advrob::RunConfig{}.out_dir) {
                base.out_dir = saved_out;  // keep the ADVROB_OUT fallback
            }
            break;
        }
    }
    return base;
}

// Registers the shared pipeline options on a subcommand, with defaults taken
// from `cfg` (already merged from ADVROB_OUT and --config). Flags override.
void add_pipeline_options(CLI::App* cmd, advrob::RunConfig& cfg,
                          std::vector<std::string>& attack_names, std::string& target,
                          std::string& augment_mode, std::string& drift_attack) {
    cmd->add_option("-c,--config", "JSON config file (applied before flags)")
        ->type_name("FILE");
    cmd->add_option("--data", cfg.data_path, "input CSV (header row, numeric features)");
    cmd->add_option("--label-col", cfg.label_column, "label column name");
    cmd->add_option("--dataset-name", cfg.dataset_name, "name used in tables and reports");
    cmd->add_option("--split", cfg.split_fraction, "train fraction of the 80/20-style split");
    cmd->add_option("--split-seed", cfg.split_seed, "seed for the shuffled split");
    cmd->add_option("--lr", cfg.train.learning_rate, "Adam learning rate");
    cmd->add_option("--batch", cfg.train.batch_size, "mini-batch size");
    cmd->add_option("--epochs", cfg.train.epochs, "training epochs");
    cmd->add_option("--seeds", cfg.seeds, "training seeds (per-seed plus mean reporting)")
        ->delimiter(',');
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&cfg](const std::uint64_t& s) { cfg.seeds = {s}; },
        "single training seed (shorthand for --seeds)");
    cmd->add_option("--attack", attack_names, "attacks to sweep (fgsm, pgd)")->delimiter(',');
    cmd->add_option("--alpha", cfg.alpha, "PGD step size");
    cmd->add_option("--iters", cfg.iters, "PGD iterations");
    cmd->add_flag("--random-start", cfg.random_start, "start PGD from a random point in the ball");
    cmd->add_option("--eps-max", cfg.eps_max, "largest perturbation budget");
    cmd->add_option("--eps-steps", cfg.eps_steps, "number of grid points from 0 to eps-max");
    cmd->add_option("--positive-class", cfg.positive_class, "class index treated as positive");
    cmd->add_option("--explain-samples", cfg.explain.n_samples,
                    "test subsample for sensitivity and headline drift");
    cmd->add_option("--background", cfg.explain.background_size,
                    "training rows in the Shapley background set");
    cmd->add_option("--permutations", cfg.explain.n_permutations,
                    "permutations per sampled attribution");
    cmd->add_option("--drift-eps", cfg.explain.drift_epsilon,
                    "budget for headline drift and extended metrics");
    cmd->add_option("--drift-attack", drift_attack, "attack used for drift (fgsm or pgd)");
    cmd->add_option("--top-k", cfg.explain.top_k, "features kept in the drift heatmap");
    cmd->add_option("--grid-samples", cfg.explain.grid_samples,
                    "test subsample per drift-grid row");
    cmd->add_flag("--exact", cfg.explain.exact, "exact Shapley enumeration (d <= 12)");
    cmd->add_option("--target", target, "attributed quantity (probability or logit)");
    cmd->add_option("--explain-seed", cfg.explain.seed, "seed for explainability subsampling");
    cmd->add_option("--adv-frac", cfg.adv_fraction, "fraction of each batch attacked");
    cmd->add_option("--adv-eps", cfg.adv_epsilon, "budget for training-time attacks");
    cmd->add_option("--adv-attack", "attack used for augmentation (fgsm or pgd)")
        ->each([&cfg](const std::string& s) { cfg.adv_attack = advrob::attack_from_name(s); });
    cmd->add_option("--augment-mode", augment_mode, "replace or append");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_flag("--stamp", cfg.stamp,
                  "record a wall-clock timestamp (breaks byte-reproducibility)");
}

void finalize_config(advrob::RunConfig& cfg, const std::vector<std::string>& attack_names,
                     const std::string& target, const std::string& augment_mode,
                     const std::string& drift_attack) {
    if (!attack_names.empty()) {
        cfg.attacks.clear();
        for (const std::string& name : attack_names) {
            cfg.attacks.push_back(advrob::attack_from_name(name));
        }
    }
    cfg.explain.target = advrob::target_from_name(target);
    cfg.augment_mode = advrob::augment_mode_from_name(augment_mode);
    cfg.explain.drift_attack = advrob::attack_from_name(drift_attack);
}

int run_stages(const advrob::RunConfig& cfg, unsigned stages) {
    const advrob::PipelineResult result = advrob::run_pipeline(cfg, stages);
    advrob::write_outputs(result, cfg, stages);
    std::cout << "report written to " << cfg.out_dir << "/report.json\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        advrob::RunConfig cfg = load_base_config(argc, argv);
        std::string target = "probability";
        std::string augment_mode = "replace";
        std::string drift_attack = "fgsm";
        std::vector<std::string> attack_names;
        {  // re-derive string defaults from a loaded config file
            const nlohmann::json echo = advrob::config_to_json(cfg);
            target = echo["target"].get<std::string>();
            augment_mode = echo["augment_mode"].get<std::string>();
            drift_attack = echo["drift_attack"].get<std::string>();
        }

        CLI::App app{"adversarial robustness and explanation-drift evaluation for tabular "
                     "MLP classifiers"};
        app.require_subcommand(1);

        // synth
        std::size_t synth_n = 2000, synth_d = 10;
        double synth_sep = 1.0;
        std::uint64_t synth_seed = 1;
        std::string synth_out = "synth.csv";
        CLI::App* synth = app.add_subcommand("synth", "generate a two-class Gaussian CSV");
        synth->add_option("--n", synth_n, "total samples");
        synth->add_option("--d", synth_d, "features");
        synth->add_option("--sep", synth_sep, "distance between class means");
        synth->add_option("--seed", synth_seed, "generator seed");
        synth->add_option("--out", synth_out, "output CSV path");

        CLI::App* cmd_train = app.add_subcommand("train", "train per-seed models, write "
                                                          "checkpoints and histories");
        CLI::App* cmd_sweep = app.add_subcommand("sweep", "train plus FGSM/PGD epsilon sweeps "
                                                          "with Robustness Index");
        CLI::App* cmd_explain = app.add_subcommand("explain", "train plus sensitivity, "
                                                              "attribution drift, and drift grid");
        CLI::App* cmd_ablation =
            app.add_subcommand("ablation", "baseline versus adversarially trained comparison");
        cmd_ablation->add_flag("--baseline-only", cfg.baseline_only,
                               "skip the adversarially trained variant");
        CLI::App* cmd_run = app.add_subcommand("run", "full pipeline and aggregated report");
        cmd_run->add_flag("--ablation", cfg.with_ablation, "include the ablation stage");
        CLI::App* cmd_selftest =
            app.add_subcommand("selftest", "run built-in numeric oracle checks");

        for (CLI::App* cmd : {cmd_train, cmd_sweep, cmd_explain, cmd_ablation, cmd_run}) {
            add_pipeline_options(cmd, cfg, attack_names, target, augment_mode, drift_attack);
        }

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return kExitConfig;
        }

        if (synth->parsed()) {
            const advrob::RawDataset ds =
                advrob::synth_gaussian(synth_n, synth_d, synth_sep, synth_seed);
            advrob::write_csv(ds, synth_out);
            std::cout << "wrote " << ds.size() << " rows x " << ds.dim() << " features to "
                      << synth_out << "\n";
            return kExitOk;
        }
        if (cmd_selftest->parsed()) {
            return advrob::run_selftest(std::cout) == 0 ? kExitOk : kExitInternal;
        }

        finalize_config(cfg, attack_names, target, augment_mode, drift_attack);
        if (cmd_train->parsed()) return run_stages(cfg, advrob::kStageTrain);
        if (cmd_sweep->parsed()) {
            return run_stages(cfg, advrob::kStageTrain | advrob::kStageSweep);
        }
        if (cmd_explain->parsed()) {
            return run_stages(cfg, advrob::kStageTrain | advrob::kStageExplain);
        }
        if (cmd_ablation->parsed()) return run_stages(cfg, advrob::kStageAblation);
        unsigned stages = advrob::kStageTrain | advrob::kStageSweep | advrob::kStageExplain;
        if (cfg.with_ablation) stages |= advrob::kStageAblation;
        return run_stages(cfg, stages);
    } catch (const advrob::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const advrob::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const advrob::NumericError& e) {
        std::cerr << "internal check failed: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
