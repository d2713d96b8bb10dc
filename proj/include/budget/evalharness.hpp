#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "budget/budgeter.hpp"
#include "budget/curves.hpp"
#include "budget/powerlaw.hpp"

namespace budget {

// Ratcliff/Obershelp ratio 2M/(|a|+|b|), recursive longest contiguous
// matching block, no junk heuristic.
double name_similarity(const std::string& a, const std::string& b);

struct NameClusterIndex {
    std::vector<std::string> names;
    std::vector<double> similarity;  // n x n, row-major
    std::vector<int> cluster_of;     // name index -> cluster id
    std::size_t n_clusters = 0;

    double sim(std::size_t i, std::size_t j) const { return similarity[i * names.size() + j]; }
};

// Agglomerative average-linkage clustering on distance 1 - similarity, cut
// at k clusters. Merge ties break toward the smallest member index; final
// cluster ids are ordered by smallest member.
NameClusterIndex cluster_datasets(const std::vector<std::string>& names, std::size_t k = 100);

struct SplitPlan {
    struct Repetition {
        std::vector<int> train_clusters;
        std::vector<int> test_clusters;
    };
    std::vector<Repetition> repetitions;
    std::uint64_t seed = 0;
};

SplitPlan bootstrap_split(const NameClusterIndex& index, double train_frac = 0.8,
                          std::size_t reps = 40, std::uint64_t seed = 0);

struct BenchmarkEntry {
    std::string name;
    DatasetSplit split;
    GroundTruth ground_truth;
    bool has_ground_truth = false;
};

enum class Method { Powerlaw, LearningLR, LearningRF };
std::string method_name(Method m);

struct BenchmarkConfig {
    std::size_t pilot_m = 50;
    bool varying = false;  // randomized pilot sizes + percent featurization
    std::size_t varying_min = 100;
    std::size_t varying_max = 250;
    std::size_t curve_reps = 100;
    std::size_t gt_reps = 5;
    double threshold = 0.99;
    ForestParams base_forest;
    MetaParams meta;
    std::size_t clusters = 0;  // 0 = min(100, max(2, n/2))
    double train_frac = 0.8;
    std::size_t bootstrap_reps = 40;
    std::uint64_t seed = 0;
};

struct MethodScores {
    std::string method;
    double r2 = 0.0;
    bool r2_defined = false;
    double acc0 = 0.0;
    double acc1 = 0.0;
};

// One prediction row of the flat per-repetition CSV.
struct PredictionRecord {
    std::size_t repetition = 0;
    std::string method;
    std::string dataset;
    double true_final = 0.0;
    double predicted_final = 0.0;
    int true_bin = 0;
    int predicted_bin = 0;
};

struct EvalReport {
    std::vector<MethodScores> methods;
    std::vector<PredictionRecord> records;
    std::vector<CorpusEntry> corpus;  // per-dataset curves + ground truths
    BinScheme scheme;
    std::size_t n_clusters = 0;
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
    bool varying = false;
};

EvalReport run_benchmark(std::vector<BenchmarkEntry> entries, const std::vector<Method>& methods,
                         const BenchmarkConfig& config);

struct BalanceAnalysis {
    std::vector<std::string> names;
    std::vector<double> minority_ratio;
    std::vector<double> abs_error;
    double slope = 0.0;  // OLS trend of abs_error on minority_ratio
    bool slope_defined = false;
};

// Minority-label ratio of each corpus pilot vs absolute final-performance
// prediction error.
BalanceAnalysis balance_analysis(const std::vector<CorpusEntry>& corpus,
                                 const std::vector<double>& predicted_finals);

void save_report_json(const EvalReport& report, const std::string& path);
void save_records_csv(const EvalReport& report, const std::string& path);

}  // namespace budget
