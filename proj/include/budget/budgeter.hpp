#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "budget/curves.hpp"
#include "budget/linear.hpp"

namespace budget {

enum class BinMode { FixedCount, Ratio };

// Five contiguous bins over [0, upper.back()]; values above the last edge
// clamp into the last bin.
struct BinScheme {
    BinMode mode = BinMode::FixedCount;
    std::vector<double> upper;  // ascending inclusive upper edges, size 5

    std::size_t n_bins() const { return upper.size(); }
    double lower_of(std::size_t bin) const;
    std::string interval_text(std::size_t bin) const;
};

// The five needed-amount bins with integer edges
// [0,104][105,227][228,430][431,805][806,2000].
BinScheme reference_bins();

int assign_bin(double needed, const BinScheme& scheme);

// Edges at the k-quantiles of the values; per-bin counts differ by at most
// one when values are distinct.
BinScheme make_quantile_bins(std::vector<double> values, std::size_t k = 5,
                             BinMode mode = BinMode::FixedCount);

enum class FeatureMode { Fixed, Percent };

struct FeatureVector {
    FeatureMode mode = FeatureMode::Fixed;
    std::vector<double> values;  // s over the grid; percent mode appends m
};

// Percent grid 10%..90% step 5%.
std::vector<std::size_t> percent_grid();

// Fixed mode: s at the canonical grid for the curve's pilot size.
// Percent mode: s at floor(x% * m) for the percent grid, then m.
FeatureVector featurize(const LearningCurve& curve, FeatureMode mode);

enum class MetaKind { Linear, Forest };

// One benchmark dataset as the meta-learners see it.
struct CorpusEntry {
    std::string name;
    LearningCurve curve;
    double final_performance = 0.0;  // score of the full-train model
    std::size_t needed = 0;          // smallest sufficient training amount
    bool needed_satisfied = false;
    std::size_t m = 0;                  // pilot size behind the curve
    double pilot_minority_ratio = 0.0;  // least frequent class share in the pilot
};

struct BudgetModel {
    MetaKind kind = MetaKind::Linear;
    FeatureMode mode = FeatureMode::Fixed;
    BinScheme scheme;
    std::size_t feature_len = 0;
    std::vector<std::size_t> feature_grid;  // x values (fixed) or percents (percent)
    std::vector<std::size_t> selected;      // optional feature subset, empty = all

    LinearModel final_linear;
    ForestRegressor final_forest;
    LogisticModel needed_logistic;
    ForestModel needed_forest;
};

struct BudgetReport {
    std::string method;
    double predicted_final = 0.0;
    int predicted_bin = 0;
    std::string bin_interval;
    std::string inputs_summary;
};

struct MetaParams {
    double ridge = 1e-6;
    double logistic_l2 = 1e-4;
    std::size_t logistic_iters = 500;
    ForestParams forest;  // meta random forests
};

int needed_label(const CorpusEntry& entry, const BinScheme& scheme, FeatureMode mode);

BudgetModel train_budget_model(const std::vector<CorpusEntry>& corpus, MetaKind kind,
                               FeatureMode mode, const BinScheme& scheme,
                               const MetaParams& params = {});

// Optional feature restriction applied before training (top-k retraining).
BudgetModel train_budget_model(const std::vector<CorpusEntry>& corpus, MetaKind kind,
                               FeatureMode mode, const BinScheme& scheme,
                               const std::vector<std::size_t>& selected,
                               const MetaParams& params);

BudgetReport predict_budget(const BudgetModel& model, const LearningCurve& curve);
double predict_final_value(const BudgetModel& model, const LearningCurve& curve);
int predict_needed_bin(const BudgetModel& model, const LearningCurve& curve);

// In-sample R^2 of the one-feature model y = k * s_x + b.
double one_point_analysis(const std::vector<CorpusEntry>& corpus, std::size_t x);

// Indices of the k largest-|coefficient| features of a linear final model.
std::vector<std::size_t> select_top_coefficients(const BudgetModel& model, std::size_t k = 5);

// Per-bin logistic coefficient vectors over the feature grid.
std::vector<std::vector<double>> coefficient_profile(const BudgetModel& model);

void save_model(const BudgetModel& model, const std::string& path);
BudgetModel load_model(const std::string& path);

}  // namespace budget
