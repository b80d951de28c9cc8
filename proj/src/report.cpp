#include "advrob/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "advrob/data.hpp"
#include "advrob/errors.hpp"

namespace advrob {

namespace {

void write_canonical(const nlohmann::json& v, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::null:
            out += "null";
            break;
        case nlohmann::json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case nlohmann::json::value_t::string:
            out += nlohmann::json(v.get<std::string>()).dump();
            break;
        case nlohmann::json::value_t::number_integer:
        case nlohmann::json::value_t::number_unsigned:
            out += v.dump();
            break;
        case nlohmann::json::value_t::number_float: {
            const double x = v.get<double>();
            if (!std::isfinite(x)) {
                throw NumericError("report contains a non-finite number");
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", x);
            out += buf;
            break;
        }
        case nlohmann::json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += pad_in;
                write_canonical(v[i], out, indent + 1);
                if (i + 1 < v.size()) out += ',';
                out += '\n';
            }
            out += pad + "]";
            break;
        }
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            // nlohmann's object_t is a std::map, so iteration is key-sorted.
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {
                out += pad_in;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                write_canonical(it.value(), out, indent + 1);
                if (i + 1 < v.size()) out += ',';
                out += '\n';
            }
            out += pad + "}";
            break;
        }
        default:
            throw NumericError("report contains an unsupported JSON value type");
    }
}

nlohmann::json curve_to_json(const RobustnessCurve& c) {
    return {{"attack", attack_name(c.attack)}, {"label", c.label},       {"seed", c.seed},
            {"epsilons", c.epsilons},          {"accuracies", c.accuracies}, {"ri", c.ri}};
}

RobustnessCurve curve_from_json(const nlohmann::json& j) {
    RobustnessCurve c;
    c.attack = j.at("attack").get<std::string>() == "pgd" ? AttackKind::Pgd : AttackKind::Fgsm;
    c.label = j.at("label").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epsilons = j.at("epsilons").get<std::vector<double>>();
    c.accuracies = j.at("accuracies").get<std::vector<double>>();
    c.ri = j.at("ri").get<double>();
    return c;
}

nlohmann::json metrics_row_to_json(const MetricsRow& r) {
    return {{"seed", r.seed},     {"accuracy", r.accuracy}, {"precision", r.precision},
            {"recall", r.recall}, {"auc", r.auc}};
}

MetricsRow metrics_row_from_json(const nlohmann::json& j) {
    MetricsRow r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.auc = j.at("auc").get<double>();
    return r;
}

nlohmann::json variant_to_json(const AblationVariant& v) {
    return {{"name", v.name},
            {"clean_accuracy", v.clean_accuracy},
            {"ri_fgsm", v.curve_fgsm.ri},
            {"ri_pgd", v.curve_pgd.ri},
            {"curve_fgsm", curve_to_json(v.curve_fgsm)},
            {"curve_pgd", curve_to_json(v.curve_pgd)}};
}

AblationVariant variant_from_json(const nlohmann::json& j) {
    AblationVariant v;
    v.name = j.at("name").get<std::string>();
    v.clean_accuracy = j.at("clean_accuracy").get<double>();
    v.curve_fgsm = curve_from_json(j.at("curve_fgsm"));
    v.curve_pgd = curve_from_json(j.at("curve_pgd"));
    return v;
}

nlohmann::json grid_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows; ++i) rows.push_back(m.row_vector(i));
    return rows;
}

Matrix grid_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) rows.push_back(row.get<std::vector<double>>());
    return Matrix::from_rows(rows);
}

nlohmann::json opt_double(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_double_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

std::string canonical_json(const nlohmann::json& doc) {
    std::string out;
    write_canonical(doc, out, 0);
    out += '\n';
    return out;
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json doc;
    doc["schema_version"] = report.schema_version;

    doc["provenance"] = {
        {"dataset",
         {{"path", report.dataset.path},
          {"sha256", report.dataset.sha256},
          {"n_rows", report.dataset.n_rows},
          {"n_features", report.dataset.n_features},
          {"label_column", report.dataset.label_column},
          {"class_names", report.dataset.class_names},
          {"feature_names", report.dataset.feature_names}}},
        {"split",
         {{"fraction", report.split.fraction},
          {"seed", report.split.seed},
          {"train_size", report.split.train_size},
          {"test_size", report.split.test_size}}},
        {"rng", report.rng_version},
        {"seeds", report.seeds},
        {"config", report.config},
        {"timestamp", report.timestamp ? nlohmann::json(*report.timestamp)
                                       : nlohmann::json(nullptr)}};

    nlohmann::json clean = nlohmann::json::array();
    for (const CleanResult& c : report.clean) {
        clean.push_back({{"seed", c.seed}, {"accuracy", c.accuracy}});
    }
    doc["clean"] = {{"per_seed", clean}, {"mean_accuracy", report.clean_mean_accuracy}};

    nlohmann::json curves = nlohmann::json::array();
    for (const RobustnessCurve& c : report.curves) curves.push_back(curve_to_json(c));
    doc["curves"] = curves;

    if (report.metrics) {
        nlohmann::json blocks = nlohmann::json::array();
        for (const MetricsBlock& b : *report.metrics) {
            nlohmann::json per_seed = nlohmann::json::array();
            for (const MetricsRow& r : b.per_seed) per_seed.push_back(metrics_row_to_json(r));
            blocks.push_back({{"attack", b.attack},
                              {"epsilon", b.epsilon},
                              {"per_seed", per_seed},
                              {"mean", metrics_row_to_json(b.mean)}});
        }
        doc["metrics"] = blocks;
    } else {
        doc["metrics"] = nullptr;
    }

    if (report.sensitivity) {
        doc["sensitivity"] = {{"s", report.sensitivity->s},
                              {"feature_names", report.sensitivity->feature_names},
                              {"sample_indices", report.sensitivity->sample_indices},
                              {"seed", report.sensitivity->seed}};
    } else {
        doc["sensitivity"] = nullptr;
    }

    if (report.drift) {
        doc["drift"] = {{"delta_phi", report.drift->delta_phi},
                        {"drift_epsilon", report.drift->drift_epsilon},
                        {"grid_epsilons", report.drift->grid_epsilons},
                        {"grid", grid_to_json(report.drift->grid)},
                        {"top_features", report.drift->top_features},
                        {"feature_names", report.drift->feature_names},
                        {"sample_indices", report.drift->sample_indices}};
    } else {
        doc["drift"] = nullptr;
    }

    if (report.ablation) {
        doc["ablation"] = {
            {"dataset", report.ablation->dataset_name},
            {"baseline", variant_to_json(report.ablation->baseline)},
            {"adv_trained", report.ablation->hardened
                                ? variant_to_json(*report.ablation->hardened)
                                : nlohmann::json(nullptr)},
            {"delta_ri", report.ablation->hardened ? nlohmann::json(report.ablation->delta_ri())
                                                   : nlohmann::json(nullptr)}};
    } else {
        doc["ablation"] = nullptr;
    }

    doc["diagnostics"] = {
        {"sensitivity_drift_spearman", opt_double(report.diagnostics.sensitivity_drift_spearman)},
        {"gradnorm_slope_pearson_fgsm",
         opt_double(report.diagnostics.gradnorm_slope_pearson_fgsm)},
        {"gradnorm_slope_pearson_pgd", opt_double(report.diagnostics.gradnorm_slope_pearson_pgd)},
        {"taylor_ri_gap_fgsm", opt_double(report.diagnostics.taylor_ri_gap_fgsm)}};

    return doc;
}

RunReport report_from_json(const nlohmann::json& doc) {
    RunReport report;
    report.schema_version = doc.at("schema_version").get<std::string>();
    const std::string major = report.schema_version.substr(0, report.schema_version.find('.'));
    const std::string expected_major =
        std::string(kReportSchemaVersion).substr(0, std::string(kReportSchemaVersion).find('.'));
    if (major != expected_major) {
        throw DataError("unsupported report schema version: " + report.schema_version);
    }

    const auto& prov = doc.at("provenance");
    const auto& ds = prov.at("dataset");
    report.dataset.path = ds.at("path").get<std::string>();
    report.dataset.sha256 = ds.at("sha256").get<std::string>();
    report.dataset.n_rows = ds.at("n_rows").get<std::size_t>();
    report.dataset.n_features = ds.at("n_features").get<std::size_t>();
    report.dataset.label_column = ds.at("label_column").get<std::string>();
    report.dataset.class_names = ds.at("class_names").get<std::vector<std::string>>();
    report.dataset.feature_names = ds.at("feature_names").get<std::vector<std::string>>();
    const auto& sp = prov.at("split");
    report.split.fraction = sp.at("fraction").get<double>();
    report.split.seed = sp.at("seed").get<std::uint64_t>();
    report.split.train_size = sp.at("train_size").get<std::size_t>();
    report.split.test_size = sp.at("test_size").get<std::size_t>();
    report.rng_version = prov.at("rng").get<std::string>();
    report.seeds = prov.at("seeds").get<std::vector<std::uint64_t>>();
    report.config = prov.at("config");
    if (!prov.at("timestamp").is_null()) {
        report.timestamp = prov.at("timestamp").get<std::string>();
    }

    for (const auto& c : doc.at("clean").at("per_seed")) {
        report.clean.push_back({c.at("seed").get<std::uint64_t>(), c.at("accuracy").get<double>()});
    }
    report.clean_mean_accuracy = doc.at("clean").at("mean_accuracy").get<double>();

    for (const auto& c : doc.at("curves")) report.curves.push_back(curve_from_json(c));

    if (!doc.at("metrics").is_null()) {
        std::vector<MetricsBlock> blocks;
        for (const auto& b : doc.at("metrics")) {
            MetricsBlock block;
            block.attack = b.at("attack").get<std::string>();
            block.epsilon = b.at("epsilon").get<double>();
            for (const auto& r : b.at("per_seed")) block.per_seed.push_back(metrics_row_from_json(r));
            block.mean = metrics_row_from_json(b.at("mean"));
            blocks.push_back(std::move(block));
        }
        report.metrics = std::move(blocks);
    }

    if (!doc.at("sensitivity").is_null()) {
        const auto& s = doc.at("sensitivity");
        SensitivityReport sens;
        sens.s = s.at("s").get<std::vector<double>>();
        sens.feature_names = s.at("feature_names").get<std::vector<std::string>>();
        sens.sample_indices = s.at("sample_indices").get<std::vector<std::size_t>>();
        sens.seed = s.at("seed").get<std::uint64_t>();
        report.sensitivity = std::move(sens);
    }

    if (!doc.at("drift").is_null()) {
        const auto& d = doc.at("drift");
        DriftReport drift;
        drift.delta_phi = d.at("delta_phi").get<std::vector<double>>();
        drift.drift_epsilon = d.at("drift_epsilon").get<double>();
        drift.grid_epsilons = d.at("grid_epsilons").get<std::vector<double>>();
        drift.grid = grid_from_json(d.at("grid"));
        drift.top_features = d.at("top_features").get<std::vector<std::size_t>>();
        drift.feature_names = d.at("feature_names").get<std::vector<std::string>>();
        drift.sample_indices = d.at("sample_indices").get<std::vector<std::size_t>>();
        report.drift = std::move(drift);
    }

    if (!doc.at("ablation").is_null()) {
        const auto& a = doc.at("ablation");
        AblationRecord record;
        record.dataset_name = a.at("dataset").get<std::string>();
        record.baseline = variant_from_json(a.at("baseline"));
        if (!a.at("adv_trained").is_null()) {
            record.hardened = variant_from_json(a.at("adv_trained"));
        }
        report.ablation = std::move(record);
    }

    const auto& diag = doc.at("diagnostics");
    report.diagnostics.sensitivity_drift_spearman =
        opt_double_from(diag.at("sensitivity_drift_spearman"));
    report.diagnostics.gradnorm_slope_pearson_fgsm =
        opt_double_from(diag.at("gradnorm_slope_pearson_fgsm"));
    report.diagnostics.gradnorm_slope_pearson_pgd =
        opt_double_from(diag.at("gradnorm_slope_pearson_pgd"));
    report.diagnostics.taylor_ri_gap_fgsm = opt_double_from(diag.at("taylor_ri_gap_fgsm"));

    return report;
}

void emit_report(const RunReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + path);
    out << canonical_json(report_to_json(report));
    if (!out) throw DataError("report write failed: " + path);
}

RunReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open report: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed report " + path + ": " + e.what());
    }
    try {
        return report_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("report " + path + " missing fields: " + e.what());
    }
}

void emit_curve_csv(const RobustnessCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write curve CSV: " + path);
    out << "epsilon,accuracy\n";
    for (std::size_t i = 0; i < curve.epsilons.size(); ++i) {
        out << format_sig12(curve.epsilons[i]) << ',' << format_sig12(curve.accuracies[i])
            << '\n';
    }
    if (!out) throw DataError("curve CSV write failed: " + path);
}

void emit_grid_csv(const DriftReport& drift, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write grid CSV: " + path);
    out << "epsilon";
    for (const std::size_t f : drift.top_features) out << ',' << drift.feature_names.at(f);
    out << '\n';
    for (std::size_t r = 0; r < drift.grid.rows; ++r) {
        out << format_sig12(drift.grid_epsilons[r]);
        for (const std::size_t f : drift.top_features) out << ',' << format_sig12(drift.grid(r, f));
        out << '\n';
    }
    if (!out) throw DataError("grid CSV write failed: " + path);
}

void emit_table_csv(const AblationRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write ablation CSV: " + path);
    out << "Dataset,Model,CleanAcc,RI_FGSM,RI_PGD,DeltaRI\n";
    out << record.dataset_name << ",Baseline," << format_sig12(record.baseline.clean_accuracy)
        << ',' << format_sig12(record.baseline.curve_fgsm.ri) << ','
        << format_sig12(record.baseline.curve_pgd.ri) << ",\n";
    if (record.hardened) {
        out << record.dataset_name << ",Adv-Trained,"
            << format_sig12(record.hardened->clean_accuracy) << ','
            << format_sig12(record.hardened->curve_fgsm.ri) << ','
            << format_sig12(record.hardened->curve_pgd.ri) << ','
            << format_sig12(record.delta_ri()) << '\n';
    }
    if (!out) throw DataError("ablation CSV write failed: " + path);
}

void emit_metrics_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write metrics CSV: " + path);
    out << "metric,value,epsilon,attack\n";
    out << "clean_accuracy," << format_sig12(report.clean_mean_accuracy) << ",0,none\n";
    for (const RobustnessCurve& c : report.curves) {
        if (c.label != "mean") continue;
        out << "ri," << format_sig12(c.ri) << ',' << format_sig12(c.epsilons.back()) << ','
            << attack_name(c.attack) << '\n';
    }
    if (report.metrics) {
        for (const MetricsBlock& b : *report.metrics) {
            const std::string eps = format_sig12(b.epsilon);
            out << "accuracy," << format_sig12(b.mean.accuracy) << ',' << eps << ',' << b.attack
                << '\n';
            out << "precision," << format_sig12(b.mean.precision) << ',' << eps << ',' << b.attack
                << '\n';
            out << "recall," << format_sig12(b.mean.recall) << ',' << eps << ',' << b.attack
                << '\n';
            out << "auc," << format_sig12(b.mean.auc) << ',' << eps << ',' << b.attack << '\n';
        }
    }
    if (!out) throw DataError("metrics CSV write failed: " + path);
}

void emit_sensitivity_csv(const SensitivityReport& sensitivity,
                          const std::vector<double>& delta_phi, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write sensitivity CSV: " + path);
    out << "feature,S_i,delta_phi\n";
    for (std::size_t j = 0; j < sensitivity.feature_names.size(); ++j) {
        out << sensitivity.feature_names[j] << ',' << format_sig12(sensitivity.s[j]) << ',';
        if (j < delta_phi.size()) out << format_sig12(delta_phi[j]);
        out << '\n';
    }
    if (!out) throw DataError("sensitivity CSV write failed: " + path);
}

void emit_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write history CSV: " + path);
    out << "epoch,mean_loss,train_accuracy\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        out << e + 1 << ',' << format_sig12(history[e].mean_loss) << ','
            << format_sig12(history[e].train_accuracy) << '\n';
    }
    if (!out) throw DataError("history CSV write failed: " + path);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path);

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw NumericError("sha256: context allocation failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericError("sha256: init failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw NumericError("sha256: update failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericError("sha256: final failed");
    }
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace advrob
