#include "advrob/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <ostream>

#include "advrob/attacks.hpp"
#include "advrob/data.hpp"
#include "advrob/errors.hpp"
#include "advrob/explain.hpp"
#include "advrob/metrics.hpp"
#include "advrob/rng.hpp"

namespace advrob {

AttackKind attack_from_name(const std::string& name) {
    if (name == "fgsm") return AttackKind::Fgsm;
    if (name == "pgd") return AttackKind::Pgd;
    throw ConfigError("unknown attack '" + name + "' (expected fgsm or pgd)");
}

AttributionTarget target_from_name(const std::string& name) {
    if (name == "probability") return AttributionTarget::Probability;
    if (name == "logit") return AttributionTarget::Logit;
    throw ConfigError("unknown attribution target '" + name +
                      "' (expected probability or logit)");
}

AugmentMode augment_mode_from_name(const std::string& name) {
    if (name == "replace") return AugmentMode::Replace;
    if (name == "append") return AugmentMode::Append;
    throw ConfigError("unknown augment mode '" + name + "' (expected replace or append)");
}

namespace {

std::string target_name(AttributionTarget t) {
    return t == AttributionTarget::Probability ? "probability" : "logit";
}

std::string mode_name(AugmentMode m) {
    return m == AugmentMode::Replace ? "replace" : "append";
}

std::string path_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

AttackSpec make_spec(const RunConfig& config, AttackKind kind, double epsilon) {
    AttackSpec spec;
    spec.kind = kind;
    spec.epsilon = epsilon;
    spec.alpha = config.alpha;
    spec.iters = config.iters;
    spec.random_start = config.random_start;
    spec.seed = config.split_seed;
    return spec;
}

std::string iso_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double mean_grad_l1(const ModelParams& params, const Dataset& data) {
    const Matrix g = grad_input(params, data.x, data.y);
    double total = 0.0;
    for (double v : g.data) total += std::abs(v);
    return total / static_cast<double>(g.rows);
}

RobustnessCurve mean_curve(const std::vector<RobustnessCurve>& curves, AttackKind kind) {
    RobustnessCurve mean;
    mean.attack = kind;
    mean.label = "mean";
    mean.seed = 0;
    bool first = true;
    std::size_t count = 0;
    for (const RobustnessCurve& c : curves) {
        if (c.attack != kind || c.label == "mean") continue;
        if (first) {
            mean.epsilons = c.epsilons;
            mean.accuracies.assign(c.accuracies.size(), 0.0);
            first = false;
        }
        for (std::size_t i = 0; i < c.accuracies.size(); ++i) mean.accuracies[i] += c.accuracies[i];
        ++count;
    }
    for (double& a : mean.accuracies) a /= static_cast<double>(count);
    mean.ri = robustness_index(mean);
    return mean;
}

}  // namespace

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json attacks = nlohmann::json::array();
    for (AttackKind k : c.attacks) attacks.push_back(attack_name(k));
    return {{"data", c.data_path},
            {"label_col", c.label_column},
            {"dataset_name", c.dataset_name.empty() ? path_stem(c.data_path) : c.dataset_name},
            {"split", c.split_fraction},
            {"split_seed", c.split_seed},
            {"lr", c.train.learning_rate},
            {"batch", c.train.batch_size},
            {"epochs", c.train.epochs},
            {"seeds", c.seeds},
            {"attacks", attacks},
            {"alpha", c.alpha},
            {"iters", c.iters},
            {"random_start", c.random_start},
            {"eps_max", c.eps_max},
            {"eps_steps", c.eps_steps},
            {"positive_class", c.positive_class},
            {"explain_samples", c.explain.n_samples},
            {"background", c.explain.background_size},
            {"permutations", c.explain.n_permutations},
            {"drift_eps", c.explain.drift_epsilon},
            {"drift_attack", attack_name(c.explain.drift_attack)},
            {"top_k", c.explain.top_k},
            {"grid_samples", c.explain.grid_samples},
            {"exact", c.explain.exact},
            {"target", target_name(c.explain.target)},
            {"explain_seed", c.explain.seed},
            {"adv_frac", c.adv_fraction},
            {"adv_eps", c.adv_epsilon},
            {"adv_attack", attack_name(c.adv_attack)},
            {"augment_mode", mode_name(c.augment_mode)},
            {"ablation", c.with_ablation},
            {"baseline_only", c.baseline_only},
            {"out", c.out_dir},
            {"stamp", c.stamp}};
}

RunConfig config_from_json(const nlohmann::json& doc) {
    RunConfig c;
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& key = it.key();
            const nlohmann::json& v = it.value();
            if (key == "data") c.data_path = v.get<std::string>();
            else if (key == "label_col") c.label_column = v.get<std::string>();
            else if (key == "dataset_name") c.dataset_name = v.get<std::string>();
            else if (key == "split") c.split_fraction = v.get<double>();
            else if (key == "split_seed") c.split_seed = v.get<std::uint64_t>();
            else if (key == "lr") c.train.learning_rate = v.get<double>();
            else if (key == "batch") c.train.batch_size = v.get<std::size_t>();
            else if (key == "epochs") c.train.epochs = v.get<std::size_t>();
            else if (key == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
            else if (key == "attacks") {
                c.attacks.clear();
                for (const auto& a : v) c.attacks.push_back(attack_from_name(a.get<std::string>()));
            } else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "iters") c.iters = v.get<int>();
            else if (key == "random_start") c.random_start = v.get<bool>();
            else if (key == "eps_max") c.eps_max = v.get<double>();
            else if (key == "eps_steps") c.eps_steps = v.get<int>();
            else if (key == "positive_class") c.positive_class = v.get<int>();
            else if (key == "explain_samples") c.explain.n_samples = v.get<std::size_t>();
            else if (key == "background") c.explain.background_size = v.get<std::size_t>();
            else if (key == "permutations") c.explain.n_permutations = v.get<int>();
            else if (key == "drift_eps") c.explain.drift_epsilon = v.get<double>();
            else if (key == "drift_attack")
                c.explain.drift_attack = attack_from_name(v.get<std::string>());
            else if (key == "top_k") c.explain.top_k = v.get<std::size_t>();
            else if (key == "grid_samples") c.explain.grid_samples = v.get<std::size_t>();
            else if (key == "exact") c.explain.exact = v.get<bool>();
            else if (key == "target") c.explain.target = target_from_name(v.get<std::string>());
            else if (key == "explain_seed") c.explain.seed = v.get<std::uint64_t>();
            else if (key == "adv_frac") c.adv_fraction = v.get<double>();
            else if (key == "adv_eps") c.adv_epsilon = v.get<double>();
            else if (key == "adv_attack") c.adv_attack = attack_from_name(v.get<std::string>());
            else if (key == "augment_mode") c.augment_mode = augment_mode_from_name(v.get<std::string>());
            else if (key == "ablation") c.with_ablation = v.get<bool>();
            else if (key == "baseline_only") c.baseline_only = v.get<bool>();
            else if (key == "out") c.out_dir = v.get<std::string>();
            else if (key == "stamp") c.stamp = v.get<bool>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

PipelineResult run_pipeline(const RunConfig& config, unsigned stages) {
    if (config.data_path.empty()) throw ConfigError("no dataset given (--data)");
    if (config.seeds.empty()) throw ConfigError("at least one seed is required");
    if (config.eps_steps < 2) {
        throw ConfigError("epsilon grid needs at least 2 points for the Robustness Index");
    }
    if (config.attacks.empty()) throw ConfigError("at least one attack is required");

    const RawDataset raw = load_csv(config.data_path, config.label_column);
    const auto [train_raw, test_raw] = split(raw, config.split_fraction, config.split_seed);
    const Normalizer norm = fit_normalizer(train_raw);
    const Dataset train_set = apply_normalizer(norm, train_raw);
    const Dataset test_set = apply_normalizer(norm, test_raw);

    PipelineResult result;
    RunReport& report = result.report;
    std::vector<TrainResult>& models = result.models;
    report.dataset.path = config.data_path;
    report.dataset.sha256 = sha256_file(config.data_path);
    report.dataset.n_rows = raw.size();
    report.dataset.n_features = raw.dim();
    report.dataset.label_column = config.label_column;
    report.dataset.class_names = raw.class_names;
    report.dataset.feature_names = raw.feature_names;
    report.split.fraction = config.split_fraction;
    report.split.seed = config.split_seed;
    report.split.train_size = train_set.size();
    report.split.test_size = test_set.size();
    report.rng_version = kRngVersion;
    report.seeds = config.seeds;
    report.config = config_to_json(config);
    if (config.stamp) report.timestamp = iso_utc_now();

    const EpsilonGrid grid = EpsilonGrid::linspace(config.eps_max, config.eps_steps);
    const bool binary = test_set.n_classes == 2;

    const bool need_models = stages & (kStageTrain | kStageSweep | kStageExplain);
    if (need_models) {
        for (const std::uint64_t seed : config.seeds) {
            TrainConfig tc = config.train;
            tc.seed = seed;
            models.push_back(train(train_set, tc));
            const EvalResult clean = evaluate(models.back().params, test_set.x, test_set.y,
                                              binary ? config.positive_class : 0);
            report.clean.push_back({seed, clean.accuracy});
        }
        double acc_sum = 0.0;
        for (const CleanResult& c : report.clean) acc_sum += c.accuracy;
        report.clean_mean_accuracy = acc_sum / static_cast<double>(report.clean.size());
    }

    if (stages & kStageSweep) {
        for (AttackKind kind : config.attacks) {
            for (std::size_t i = 0; i < models.size(); ++i) {
                const std::uint64_t seed = config.seeds[i];
                const AttackSpec spec = make_spec(config, kind, config.eps_max);
                report.curves.push_back(sweep(models[i].params, test_set, spec, grid,
                                              "seed-" + std::to_string(seed), seed));
            }
            report.curves.push_back(mean_curve(report.curves, kind));
        }

        if (binary) {
            std::vector<MetricsBlock> blocks;
            for (AttackKind kind : config.attacks) {
                MetricsBlock block;
                block.attack = attack_name(kind);
                block.epsilon = config.explain.drift_epsilon;
                for (std::size_t i = 0; i < models.size(); ++i) {
                    const AttackSpec spec = make_spec(config, kind, block.epsilon);
                    const Matrix adv =
                        attack_at(models[i].params, test_set.x, test_set.y, spec, block.epsilon);
                    const EvalResult eval =
                        evaluate(models[i].params, adv, test_set.y, config.positive_class);
                    const auto [precision, recall] =
                        precision_recall(eval.predictions, test_set.y, config.positive_class);
                    MetricsRow row;
                    row.seed = config.seeds[i];
                    row.accuracy = eval.accuracy;
                    row.precision = precision;
                    row.recall = recall;
                    row.auc = roc_auc(eval.scores, test_set.y, config.positive_class);
                    block.per_seed.push_back(row);
                }
                MetricsRow mean;
                for (const MetricsRow& r : block.per_seed) {
                    mean.accuracy += r.accuracy;
                    mean.precision += r.precision;
                    mean.recall += r.recall;
                    mean.auc += r.auc;
                }
                const double n = static_cast<double>(block.per_seed.size());
                mean.accuracy /= n;
                mean.precision /= n;
                mean.recall /= n;
                mean.auc /= n;
                block.mean = mean;
                blocks.push_back(std::move(block));
            }
            report.metrics = std::move(blocks);
        }

        // Diagnostics: initial decay rate versus mean clean input-gradient L1
        // norm across seed models, and the first-order RI estimate's gap on
        // the mean FGSM curve. Reported, never asserted.
        std::vector<double> grad_norms;
        for (const TrainResult& m : models) grad_norms.push_back(mean_grad_l1(m.params, test_set));
        for (AttackKind kind : config.attacks) {
            std::vector<double> slopes;
            for (const RobustnessCurve& c : report.curves) {
                if (c.attack == kind && c.label != "mean") {
                    slopes.push_back(curve_slope_at_zero(c));
                }
            }
            const double r = pearson(grad_norms, slopes);
            if (std::isfinite(r)) {
                if (kind == AttackKind::Fgsm) report.diagnostics.gradnorm_slope_pearson_fgsm = r;
                else report.diagnostics.gradnorm_slope_pearson_pgd = r;
            }
        }
        for (const RobustnessCurve& c : report.curves) {
            if (c.attack == AttackKind::Fgsm && c.label == "mean") {
                const double estimate = taylor_ri_estimate(
                    c.accuracies.front(), curve_slope_at_zero(c), c.epsilons.back());
                report.diagnostics.taylor_ri_gap_fgsm = std::abs(estimate - c.ri);
            }
        }
    }

    if (stages & kStageExplain) {
        const ModelParams& params = models.front().params;
        const ExplainSettings& ex = config.explain;

        auto clamp_count = [](std::size_t requested, std::size_t available, const char* what) {
            if (requested <= available) return requested;
            std::cerr << "note: " << what << " reduced from " << requested << " to " << available
                      << " (dataset size)\n";
            return available;
        };
        const std::size_t n_samples =
            clamp_count(ex.n_samples, test_set.size(), "explain sample count");
        const std::size_t grid_samples =
            clamp_count(std::min(ex.grid_samples, ex.n_samples), test_set.size(),
                        "drift grid sample count");

        if (ex.exact && test_set.dim() > 12) {
            throw ConfigError("exact Shapley enumeration supports at most 12 features (got " +
                              std::to_string(test_set.dim()) + "); use the sampling estimator");
        }

        report.sensitivity = feature_sensitivity(params, test_set, n_samples, ex.seed);

        ShapleyConfig shap;
        shap.background = sample_background(
            train_set, clamp_count(ex.background_size, train_set.size(), "background size"),
            derive_seed(ex.seed, 9001));
        shap.n_permutations = ex.n_permutations;
        shap.target = ex.target;
        shap.class_index = config.positive_class;
        shap.exact = ex.exact;

        const AttackSpec drift_spec = make_spec(config, ex.drift_attack, ex.drift_epsilon);
        DriftReport drift = drift_grid(params, test_set, drift_spec, grid, ex.top_k, shap,
                                       grid_samples, ex.seed, ex.drift_epsilon);
        // Headline drift uses the full explain budget; the grid rows keep the
        // cheaper per-epsilon budget recorded in drift.sample_indices.
        drift.delta_phi =
            attribution_drift(params, test_set, drift_spec, shap, n_samples, ex.seed);
        report.drift = std::move(drift);

        const double rho = spearman(report.sensitivity->s, report.drift->delta_phi);
        if (std::isfinite(rho)) report.diagnostics.sensitivity_drift_spearman = rho;
    }

    if (stages & kStageAblation) {
        TrainConfig base = config.train;
        base.seed = config.seeds.front();
        AdvTrainConfig adv;
        adv.base = base;
        adv.adv_fraction = config.adv_fraction;
        adv.adv_epsilon = config.adv_epsilon;
        adv.attack = config.adv_attack;
        adv.mode = config.augment_mode;
        adv.pgd_alpha = config.alpha;
        adv.pgd_iters = config.iters;

        const std::string name =
            config.dataset_name.empty() ? path_stem(config.data_path) : config.dataset_name;
        report.ablation = run_ablation(train_set, test_set, base, adv,
                                       make_spec(config, AttackKind::Fgsm, config.eps_max),
                                       make_spec(config, AttackKind::Pgd, config.eps_max), grid,
                                       name, config.baseline_only);
        if (report.clean.empty()) {
            report.clean.push_back({base.seed, report.ablation->baseline.clean_accuracy});
            report.clean_mean_accuracy = report.ablation->baseline.clean_accuracy;
        }
    }

    return result;
}

void write_outputs(const PipelineResult& result, const RunConfig& config, unsigned stages) {
    namespace fs = std::filesystem;
    const RunReport& report = result.report;
    const fs::path out_dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory: " + config.out_dir);

    auto at = [&](const std::string& name) { return (out_dir / name).string(); };

    {
        std::ofstream out(at("effective_config.json"), std::ios::binary);
        if (!out) throw DataError("cannot write effective_config.json");
        out << canonical_json(config_to_json(config));
    }
    emit_report(report, at("report.json"));

    if (stages & kStageTrain) {
        for (std::size_t i = 0; i < result.models.size(); ++i) {
            const std::string seed = std::to_string(config.seeds[i]);
            save_checkpoint(result.models[i].params, at("checkpoint_seed" + seed + ".json"));
            emit_history_csv(result.models[i].history, at("history_seed" + seed + ".csv"));
        }
    }

    for (const RobustnessCurve& curve : report.curves) {
        emit_curve_csv(curve, at("curve_" + attack_name(curve.attack) + "_" + curve.label + ".csv"));
    }
    if (stages & kStageSweep) emit_metrics_csv(report, at("metrics.csv"));
    if (report.sensitivity) {
        emit_sensitivity_csv(*report.sensitivity,
                             report.drift ? report.drift->delta_phi : std::vector<double>{},
                             at("sensitivity.csv"));
    }
    if (report.drift) emit_grid_csv(*report.drift, at("drift_grid.csv"));
    if (report.ablation) {
        emit_table_csv(*report.ablation, at("ablation.csv"));
        const AblationRecord& rec = *report.ablation;
        emit_curve_csv(rec.baseline.curve_fgsm, at("curve_fgsm_baseline.csv"));
        emit_curve_csv(rec.baseline.curve_pgd, at("curve_pgd_baseline.csv"));
        if (rec.hardened) {
            emit_curve_csv(rec.hardened->curve_fgsm, at("curve_fgsm_adv_trained.csv"));
            emit_curve_csv(rec.hardened->curve_pgd, at("curve_pgd_adv_trained.csv"));
        }
    }
}

namespace {

// Central finite difference of a scalar function of one coordinate.
double central_diff(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

Dataset selftest_dataset(std::size_t n, std::size_t d, double separation, std::uint64_t seed) {
    const RawDataset raw = synth_gaussian(n, d, separation, seed);
    return apply_normalizer(fit_normalizer(raw), raw);
}

}  // namespace

int run_selftest(std::ostream& out) {
    int failures = 0;
    const auto check = [&](const std::string& name, const std::function<std::string()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!ok) ++failures;
        out << (ok ? "ok   " : "FAIL ") << name << " (" << std::fixed << std::setprecision(2)
            << secs << " s)";
        if (!detail.empty()) out << " - " << detail;
        out << '\n';
        out.flush();
        return ok;
    };

    check("finite-difference gradients", [] {
        const double h = 1e-3;
        double worst = 0.0;
        for (std::uint64_t trial = 0; trial < 3; ++trial) {
            const std::size_t d = 3 + trial;
            ModelParams params = init_params(d, 2, 100 + trial, {6, 4});
            const Dataset data = selftest_dataset(8, d, 1.0, 200 + trial);
            Matrix x(8, d);
            std::vector<int> y(8);
            for (std::size_t i = 0; i < 8; ++i) {
                for (std::size_t j = 0; j < d; ++j) x(i, j) = data.x(i, j);
                y[i] = data.y[i];
            }
            const std::vector<Layer> analytic = grad_params(params, x, y);
            for (std::size_t l = 0; l < params.n_layers(); ++l) {
                for (std::size_t k = 0; k < params.layers[l].w.data.size(); k += 7) {
                    const double base = params.layers[l].w.data[k];
                    const double fd = central_diff(
                        [&](double v) {
                            ModelParams p = params;
                            p.layers[l].w.data[k] = v;
                            return loss(p, x, y);
                        },
                        base, h);
                    const double a = analytic[l].w.data[k];
                    const double err = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
                    worst = std::max(worst, err);
                }
            }
        }
        if (worst > 1e-4) {
            throw NumericError("max relative error " + std::to_string(worst) + " exceeds 1e-4");
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "max rel err %.2e", worst);
        return std::string(buf);
    });

    check("exact Shapley efficiency and linear closed form", [] {
        SplitMix64 rng(11);
        const std::size_t d = 6, m = 20;
        std::vector<double> w(d), x(d);
        for (std::size_t j = 0; j < d; ++j) {
            w[j] = rng.next_uniform(-2.0, 2.0);
            x[j] = rng.next_uniform(-1.0, 1.0);
        }
        Matrix background(m, d);
        for (double& v : background.data) v = rng.next_gaussian();
        const PredictFn linear = [&w](const Matrix& rows) {
            std::vector<double> outv(rows.rows, 0.25);
            for (std::size_t i = 0; i < rows.rows; ++i) {
                for (std::size_t j = 0; j < rows.cols; ++j) outv[i] += w[j] * rows(i, j);
            }
            return outv;
        };
        const Attribution attr = shapley_exact(linear, x, background);
        double fx = 0.25, worst = 0.0;
        for (std::size_t j = 0; j < d; ++j) fx += w[j] * x[j];
        double total = attr.base_value;
        for (std::size_t j = 0; j < d; ++j) {
            double mu = 0.0;
            for (std::size_t i = 0; i < m; ++i) mu += background(i, j);
            mu /= static_cast<double>(m);
            worst = std::max(worst, std::abs(attr.phi[j] - w[j] * (x[j] - mu)));
            total += attr.phi[j];
        }
        worst = std::max(worst, std::abs(total - fx));
        if (worst > 1e-9) {
            throw NumericError("shapley deviation " + std::to_string(worst) + " exceeds 1e-9");
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "max deviation %.2e", worst);
        return std::string(buf);
    });

    check("trapezoidal Robustness Index", [] {
        const EpsilonGrid grid = EpsilonGrid::linspace(0.3, 10);
        std::vector<double> linear, constant;
        for (const double e : grid.values) {
            linear.push_back(1.0 - e / 0.3);
            constant.push_back(0.74);
        }
        const double ri_linear = robustness_index(grid.values, linear);
        const double ri_const = robustness_index(grid.values, constant);
        if (std::abs(ri_linear - 0.5) > 1e-12 || std::abs(ri_const - 0.74) > 1e-12) {
            throw NumericError("trapezoid rule deviates from analytic values");
        }
        return std::string();
    });

    check("attack ball containment", [] {
        const Dataset data = selftest_dataset(200, 4, 2.0, 33);
        const TrainConfig tc{.learning_rate = 0.01, .batch_size = 32, .epochs = 3, .seed = 5};
        const ModelParams params = train(data, tc).params;
        const EpsilonGrid grid = EpsilonGrid::linspace(0.3, 5);
        for (const double eps : grid.values) {
            const Matrix f = fgsm(params, data.x, data.y, eps);
            AttackSpec spec;
            spec.kind = AttackKind::Pgd;
            spec.epsilon = eps;
            std::vector<Matrix> trace;
            const Matrix p = pgd(params, data.x, data.y, spec, &trace);
            trace.push_back(f);
            trace.push_back(p);
            for (const Matrix& adv : trace) {
                for (std::size_t i = 0; i < adv.data.size(); ++i) {
                    if (std::abs(adv.data[i] - data.x.data[i]) > eps + 1e-12) {
                        throw NumericError("iterate escaped the epsilon ball");
                    }
                }
            }
        }
        return std::string();
    });

    check("single-step PGD equals FGSM", [] {
        const Dataset data = selftest_dataset(500, 6, 2.0, 44);
        const TrainConfig tc{.learning_rate = 0.01, .batch_size = 64, .epochs = 3, .seed = 6};
        const ModelParams params = train(data, tc).params;
        const Matrix f = fgsm(params, data.x, data.y, 0.1);
        AttackSpec spec;
        spec.kind = AttackKind::Pgd;
        spec.epsilon = 0.1;
        spec.alpha = 0.1;
        spec.iters = 1;
        const Matrix p = pgd(params, data.x, data.y, spec);
        if (f.data != p.data) throw NumericError("outputs differ bitwise");
        return std::string();
    });

    check("attribution drift vanishes at epsilon 0", [] {
        const Dataset data = selftest_dataset(40, 4, 2.0, 55);
        const TrainConfig tc{.learning_rate = 0.01, .batch_size = 16, .epochs = 2, .seed = 7};
        const ModelParams params = train(data, tc).params;
        ShapleyConfig shap;
        shap.background = sample_background(data, 20, 99);
        shap.n_permutations = 8;
        AttackSpec spec;
        spec.kind = AttackKind::Fgsm;
        spec.epsilon = 0.0;
        const std::vector<double> drift = attribution_drift(params, data, spec, shap, 10, 3);
        for (const double v : drift) {
            if (v != 0.0) throw NumericError("nonzero drift under the identity attack");
        }
        return std::string();
    });

    out << (failures == 0 ? "all checks passed\n"
                          : std::to_string(failures) + " check(s) failed\n");
    return failures;
}

}  // namespace advrob
