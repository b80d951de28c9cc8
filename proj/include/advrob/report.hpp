#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advrob/advtrain.hpp"
#include "advrob/explain.hpp"
#include "advrob/metrics.hpp"
#include "advrob/model.hpp"

namespace advrob {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

struct DatasetProvenance {
    std::string path;
    std::string sha256;
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::string label_column;
    std::vector<std::string> class_names;  // dense class index -> original label
    std::vector<std::string> feature_names;
};

struct SplitInfo {
    double fraction = 0.8;
    std::uint64_t seed = 42;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

struct CleanResult {
    std::uint64_t seed = 0;
    double accuracy = 0.0;
};

struct MetricsRow {
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
};

// Extended classification metrics under one attack at one budget.
struct MetricsBlock {
    std::string attack;
    double epsilon = 0.0;
    std::vector<MetricsRow> per_seed;
    MetricsRow mean;
};

struct Diagnostics {
    // Spearman rank correlation between per-feature sensitivity and drift.
    std::optional<double> sensitivity_drift_spearman;
    // Pearson r between mean input-gradient L1 norm and the curve's initial
    // slope across seed models, per attack. Descriptive only.
    std::optional<double> gradnorm_slope_pearson_fgsm;
    std::optional<double> gradnorm_slope_pearson_pgd;
    // Gap between the first-order RI estimate and the measured RI (FGSM mean
    // curve), reported not asserted.
    std::optional<double> taylor_ri_gap_fgsm;
};

// Machine-readable record of a full run. Stages that did not execute stay
// nullopt and serialize as explicit JSON null. The emitted form is canonical
// (sorted keys, floats at 12 significant digits), so identical runs produce
// byte-identical files; `timestamp` therefore stays null unless the caller
// opts in to stamping.
struct RunReport {
    std::string schema_version = kReportSchemaVersion;
    DatasetProvenance dataset;
    SplitInfo split;
    std::string rng_version;
    std::vector<std::uint64_t> seeds;
    nlohmann::json config = nlohmann::json::object();  // effective merged config
    std::optional<std::string> timestamp;

    std::vector<CleanResult> clean;
    double clean_mean_accuracy = 0.0;
    std::vector<RobustnessCurve> curves;
    std::optional<std::vector<MetricsBlock>> metrics;
    std::optional<SensitivityReport> sensitivity;
    std::optional<DriftReport> drift;
    std::optional<AblationRecord> ablation;
    Diagnostics diagnostics;
};

// Canonical serialization: object keys sorted, two-space indent, doubles
// rendered with %.12g. Throws NumericError on non-finite numbers.
std::string canonical_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

// Writes the canonical form; two identical runs produce byte-identical files.
void emit_report(const RunReport& report, const std::string& path);

// Parses and validates a report; rejects unknown schema major versions.
RunReport load_report(const std::string& path);

// Flat plot-data views. All numbers use the same 12-significant-digit format.
void emit_curve_csv(const RobustnessCurve& curve, const std::string& path);
void emit_grid_csv(const DriftReport& drift, const std::string& path);
void emit_table_csv(const AblationRecord& record, const std::string& path);
void emit_metrics_csv(const RunReport& report, const std::string& path);
void emit_sensitivity_csv(const SensitivityReport& sensitivity,
                          const std::vector<double>& delta_phi, const std::string& path);
void emit_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace advrob
