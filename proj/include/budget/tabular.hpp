#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "budget/rng.hpp"

namespace budget {

enum class ColumnKind { Numeric, Categorical, Label };

enum class Task { Binary, Multiclass, BinarizedRegression };

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    // Categorical only: distinct category strings, code = position.
    std::vector<std::string> categories;
};

// Fully numeric view of a tabular classification dataset. Categoricals are
// ordinal-encoded, labels are dense ids 0..C-1. Immutable by convention.
struct TabularDataset {
    std::string name;
    Task task = Task::Binary;
    std::vector<ColumnSchema> schema;  // feature columns, label column last
    std::size_t n_features = 0;
    std::vector<double> rows;  // row-major, n * n_features
    std::vector<int> labels;
    std::vector<std::string> label_names;  // class id -> original label string
    // Set when every label value parsed as a number (regression source);
    // consumed by binarize_regression.
    std::vector<double> raw_label_values;

    std::size_t n_rows() const { return labels.size(); }
    std::size_t n_classes() const { return label_names.size(); }
    double at(std::size_t row, std::size_t col) const { return rows[row * n_features + col]; }
    TabularDataset select_rows(const std::vector<std::size_t>& idx) const;
};

struct DatasetSplit {
    TabularDataset train;
    TabularDataset test;
    std::string source_name;
};

struct PilotStudy {
    TabularDataset data;
    std::size_t m = 0;
    std::uint64_t seed = 0;
};

struct EligibilityReport {
    bool eligible = false;
    std::vector<std::string> reasons;
};

struct SyntheticSpec {
    std::size_t n = 3000;
    std::size_t d = 8;
    std::size_t classes = 2;
    double separation = 1.0;
    double label_noise = 0.0;
};

inline constexpr std::size_t kMinPilotSize = 20;
inline constexpr const char* kMissingCategory = "<missing>";

TabularDataset load_csv(const std::string& path, const std::string& label_column);
TabularDataset binarize_regression(const TabularDataset& dataset);
EligibilityReport validate_eligibility(const TabularDataset& dataset);
DatasetSplit subsample_and_split(const TabularDataset& dataset, std::size_t n_total,
                                 std::size_t n_test, std::uint64_t seed);
PilotStudy draw_pilot(const DatasetSplit& split, std::size_t m, std::uint64_t seed);
TabularDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                  const std::string& name = "synthetic");

// Canonical CSV + JSON-sidecar persistence (sidecar at path + ".schema.json").
void save_dataset(const TabularDataset& dataset, const std::string& csv_path);
TabularDataset load_dataset(const std::string& csv_path);

}  // namespace budget
