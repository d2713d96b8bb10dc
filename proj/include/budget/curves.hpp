#pragma once

#include <cstdint>
#include <vector>

#include "budget/forest.hpp"
#include "budget/metrics.hpp"
#include "budget/tabular.hpp"

namespace budget {

inline DataView view(const TabularDataset& ds) {
    return DataView{ds.rows.data(), ds.n_rows(), ds.n_features};
}

struct CurveConfig {
    std::size_t repetitions = 500;
    std::vector<std::size_t> grid;  // strictly increasing train sizes
    std::uint64_t seed = 0;
    ForestParams forest;
};

struct LearningCurve {
    std::vector<std::size_t> grid;
    std::vector<double> s;             // mean F1_macro per train size
    std::vector<double> per_x_stddev;  // sample stddev of the repetition scores
    std::size_t m = 0;                 // pilot size the curve came from

    double value_at(std::size_t x) const;  // throws on a grid gap
    bool has(std::size_t x) const;
};

struct NeededResult {
    std::size_t amount = 0;
    bool satisfied = false;  // false = sentinel |D_train|, dominance never reached
};

struct GroundTruth {
    double final_performance = 0.0;
    std::size_t needed_amount = 0;
    bool needed_satisfied = false;
    LearningCurve reference_curve;
};

struct SplitComparison {
    double single_split = 0.0;
    double five_fold = 0.0;
    double multiple_split = 0.0;
    double full_test = 0.0;
    double final_performance = 0.0;
    // abs(estimate / final - 1) in the same order as above
    double err_single = 0.0, err_five_fold = 0.0, err_multiple = 0.0, err_full_test = 0.0;
};

// x from 10 to m-10, unit step.
std::vector<std::size_t> default_pilot_grid(std::size_t m);
// {10,20,...,100, 125,150,...,500, 600,700,...,n_train}
std::vector<std::size_t> default_needed_grid(std::size_t n_train);

// s_x = mean F1_macro over R random x-row train / (m-x)-row test splits of
// the pilot.
LearningCurve pilot_curve(const PilotStudy& pilot, const CurveConfig& config);

// F1_macro on D_test of a forest trained on all of D_train.
double final_performance(const DatasetSplit& split, const ForestParams& params);

// Smallest grid size whose R-averaged metric vector strictly dominates
// threshold x the full-train vector; scans ascending and stops early.
NeededResult needed_amount(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                           std::size_t repetitions, const ForestParams& params,
                           std::uint64_t seed, double threshold = 0.99);

// Like pilot_curve but samples D_train and always scores on D_test.
LearningCurve reference_curve(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                              std::size_t repetitions, const ForestParams& params,
                              std::uint64_t seed);

// One pass computing the reference table, final performance and needed
// amount together (the per-size metric vectors are shared).
GroundTruth compute_ground_truth(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                                 std::size_t repetitions, const ForestParams& params,
                                 std::uint64_t seed, double threshold = 0.99);

SplitComparison split_comparison(const PilotStudy& pilot, const DatasetSplit& split,
                                 std::size_t x, std::size_t repetitions,
                                 const ForestParams& params, std::uint64_t seed);

void save_curve_csv(const LearningCurve& curve, const std::string& path);
LearningCurve load_curve_csv(const std::string& path);

}  // namespace budget
