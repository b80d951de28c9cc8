#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "advrob/matrix.hpp"

namespace advrob {

// Tabular dataset as ingested: raw (unstandardized) feature values plus
// integer class labels. Labels are mapped to dense indices in first-seen
// order; `class_names` records that mapping for auditability.
struct RawDataset {
    Matrix rows;                             // n x d raw feature values
    std::vector<int> labels;                 // n class indices in [0, n_classes)
    std::vector<std::string> feature_names;  // d names
    std::string label_name;
    std::vector<std::string> class_names;    // first-seen order

    std::size_t size() const { return rows.rows; }
    std::size_t dim() const { return rows.cols; }
    int n_classes() const { return static_cast<int>(class_names.size()); }
};

// Per-feature z-score statistics, fit on the training split only.
// Zero-variance columns get std = 1 so constant indicator features pass
// through as zeros instead of aborting ingestion.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std_dev;  // population standard deviation
};

// Standardized dataset: x holds z-scores, y holds dense class indices.
struct Dataset {
    Matrix x;
    std::vector<int> y;
    std::vector<std::string> feature_names;
    int n_classes = 0;

    std::size_t size() const { return x.rows; }
    std::size_t dim() const { return x.cols; }
};

// Reads an RFC-4180-style CSV (UTF-8, header row mandatory, '.' decimal
// separator). Every non-label column must parse as a finite number.
// Throws DataError naming the offending data row (1-based) and column.
RawDataset load_csv(const std::string& path, const std::string& label_column);

// Re-emits a raw dataset as CSV with 12 significant digits.
void write_csv(const RawDataset& data, const std::string& path);

Normalizer fit_normalizer(const RawDataset& train);

Dataset apply_normalizer(const Normalizer& norm, const RawDataset& data);

// Deterministic shuffled partition: train gets floor(n * train_fraction) rows.
std::pair<RawDataset, RawDataset> split(const RawDataset& data, double train_fraction,
                                        std::uint64_t seed);

// Two balanced Gaussian classes N(-separation/2 * 1, I) and
// N(+separation/2 * 1, I); class 0 gets the extra sample when n is odd.
RawDataset synth_gaussian(std::size_t n, std::size_t d, double separation,
                          std::uint64_t seed);

// Fixed-width formatting used for all CSV output: 12 significant digits.
std::string format_sig12(double v);

}  // namespace advrob
