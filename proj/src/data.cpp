#include "advrob/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "advrob/errors.hpp"
#include "advrob/rng.hpp"

namespace advrob {

namespace {

// Splits one CSV record into fields, honoring quoted fields with "" escapes.
// `line` has already had its trailing CR stripped.
std::vector<std::string> parse_csv_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (in_quotes) {
        throw DataError("unterminated quoted field on line " + std::to_string(line_no));
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
}

bool parse_finite_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

RawDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Strip a UTF-8 BOM if present.
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') {
        line.erase(0, 3);
    }

    const std::vector<std::string> header = parse_csv_record(line, 1);
    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == label_column) {
            label_idx = j;
            break;
        }
    }
    if (label_idx == header.size()) {
        throw DataError("label column '" + label_column + "' not found in header of " + path);
    }
    if (header.size() < 2) throw DataError("no feature columns in " + path);

    RawDataset ds;
    ds.label_name = label_column;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) ds.feature_names.push_back(trim(header[j]));
    }
    const std::size_t d = ds.feature_names.size();

    std::unordered_map<std::string, int> class_ids;
    std::vector<std::vector<double>> rows;
    std::size_t data_row = 0;  // 1-based index of the current data row
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++data_row;
        const std::vector<std::string> fields = parse_csv_record(line, line_no);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(data_row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        std::vector<double> row(d);
        std::size_t k = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_idx) continue;
            double v = 0.0;
            if (!parse_finite_double(fields[j], v)) {
                throw DataError("non-numeric or non-finite value '" + fields[j] +
                                "' at row " + std::to_string(data_row) + ", column '" +
                                ds.feature_names[k] + "'");
            }
            row[k++] = v;
        }
        const std::string label = trim(fields[label_idx]);
        auto it = class_ids.find(label);
        if (it == class_ids.end()) {
            it = class_ids.emplace(label, static_cast<int>(ds.class_names.size())).first;
            ds.class_names.push_back(label);
        }
        ds.labels.push_back(it->second);
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw DataError("no data rows in " + path);
    if (ds.class_names.size() < 2) {
        throw DataError("fewer than 2 distinct labels in " + path);
    }
    ds.rows = Matrix::from_rows(rows);
    return ds;
}

void write_csv(const RawDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
        if (j) out << ',';
        out << csv_quote(data.feature_names[j]);
    }
    out << ',' << csv_quote(data.label_name) << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) {
            if (j) out << ',';
            out << format_sig12(data.rows(i, j));
        }
        out << ',' << csv_quote(data.class_names.at(data.labels[i])) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

Normalizer fit_normalizer(const RawDataset& train) {
    if (train.size() == 0) throw DataError("fit_normalizer: empty dataset");
    const std::size_t n = train.size();
    const std::size_t d = train.dim();
    Normalizer norm;
    norm.mean.assign(d, 0.0);
    norm.std_dev.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += train.rows(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = train.rows(i, j) - mean;
            ss += dv * dv;
        }
        const double var = ss / static_cast<double>(n);
        norm.mean[j] = mean;
        norm.std_dev[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return norm;
}

Dataset apply_normalizer(const Normalizer& norm, const RawDataset& data) {
    if (norm.mean.size() != data.dim() || norm.std_dev.size() != data.dim()) {
        throw DataError("apply_normalizer: dimension mismatch");
    }
    Dataset out;
    out.x = Matrix(data.size(), data.dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) {
            out.x(i, j) = (data.rows(i, j) - norm.mean[j]) / norm.std_dev[j];
        }
    }
    out.y = data.labels;
    out.feature_names = data.feature_names;
    out.n_classes = data.n_classes();
    return out;
}

std::pair<RawDataset, RawDataset> split(const RawDataset& data, double train_fraction,
                                        std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train fraction must be in (0, 1)");
    }
    if (data.size() < 2) throw DataError("split: need at least 2 rows");

    const std::size_t n = data.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    SplitMix64 rng(seed);
    rng.shuffle(idx);

    const auto train_n =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));

    auto take = [&](std::size_t begin, std::size_t end) {
        RawDataset part;
        part.feature_names = data.feature_names;
        part.label_name = data.label_name;
        part.class_names = data.class_names;
        part.rows = Matrix(end - begin, data.dim());
        part.labels.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t src = idx[i];
            for (std::size_t j = 0; j < data.dim(); ++j) part.rows(i - begin, j) = data.rows(src, j);
            part.labels.push_back(data.labels[src]);
        }
        return part;
    };
    return {take(0, train_n), take(train_n, n)};
}

RawDataset synth_gaussian(std::size_t n, std::size_t d, double separation,
                          std::uint64_t seed) {
    if (n < 2 || d < 1) throw ConfigError("synth_gaussian: need n >= 2 and d >= 1");
    if (separation < 0.0) throw ConfigError("synth_gaussian: separation must be >= 0");

    RawDataset ds;
    ds.label_name = "label";
    ds.class_names = {"0", "1"};
    ds.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));

    const std::size_t n0 = (n + 1) / 2;  // class 0 gets the extra sample when n is odd
    ds.rows = Matrix(n, d);
    ds.labels.resize(n);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = i < n0 ? 0 : 1;
        const double shift = (cls == 0 ? -0.5 : 0.5) * separation;
        for (std::size_t j = 0; j < d; ++j) ds.rows(i, j) = shift + rng.next_gaussian();
        ds.labels[i] = cls;
    }
    return ds;
}

}  // namespace advrob
