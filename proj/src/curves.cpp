#include "budget/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "budget/parallel.hpp"
#include "budget/rng.hpp"

namespace budget {
namespace {

constexpr std::uint64_t kSampleStream = 0xA1;
constexpr std::uint64_t kForestStream = 0xB2;

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(v.size() - 1));
}

struct Rows {
    std::vector<double> data;
    std::vector<int> labels;
    DataView view(std::size_t d) const { return DataView{data.data(), labels.size(), d}; }
};

Rows gather(const TabularDataset& ds, const std::vector<std::size_t>& idx) {
    Rows out;
    out.data.reserve(idx.size() * ds.n_features);
    out.labels.reserve(idx.size());
    for (std::size_t r : idx) {
        out.data.insert(out.data.end(), ds.rows.begin() + r * ds.n_features,
                        ds.rows.begin() + (r + 1) * ds.n_features);
        out.labels.push_back(ds.labels[r]);
    }
    return out;
}

// Train on `x` rows of `source` sampled without replacement, score the
// metric vector on the fixed probe rows (or, when probe is null, on the
// unsampled remainder of source).
MetricVector one_repetition(const TabularDataset& source, std::size_t x,
                            const TabularDataset* probe, const ForestParams& params,
                            std::uint64_t rep_seed) {
    Rng rng(mix64(rep_seed, kSampleStream));
    auto idx = rng.sample_without_replacement(source.n_rows(), x);
    Rows train = gather(source, idx);

    ForestParams p = params;
    p.seed = mix64(rep_seed, kForestStream);
    const auto model = ForestModel::train(train.view(source.n_features), train.labels,
                                          int(source.n_classes()), p);
    if (probe) {
        return metric_vector(probe->labels, model.predict(view(*probe)));
    }
    std::vector<bool> taken(source.n_rows(), false);
    for (std::size_t i : idx) taken[i] = true;
    std::vector<std::size_t> rest;
    rest.reserve(source.n_rows() - x);
    for (std::size_t i = 0; i < source.n_rows(); ++i) {
        if (!taken[i]) rest.push_back(i);
    }
    Rows test = gather(source, rest);
    return metric_vector(test.labels, model.predict(test.view(source.n_features)));
}

struct SizeStats {
    MetricVector mean;
    double f1_stddev = 0.0;
};

// Averaged metric vector at one train size. When x equals the source size
// the sample is the whole set, so the canonical full-train score is used
// for every repetition (this makes reference_curve at |D_train| match
// final_performance bit for bit).
SizeStats average_at_size(const TabularDataset& source, std::size_t x,
                          const TabularDataset* probe, std::size_t reps,
                          const ForestParams& params, std::uint64_t seed,
                          const MetricVector* full_train) {
    if (x == source.n_rows() && full_train) {
        return SizeStats{*full_train, 0.0};
    }
    std::vector<MetricVector> results(reps);
    parallel_for(reps, [&](std::size_t rep) {
        results[rep] = one_repetition(source, x, probe, params, mix64(seed, x, rep));
    });
    SizeStats stats;
    std::vector<double> f1s(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        stats.mean.accuracy += results[i].accuracy;
        stats.mean.f1_macro += results[i].f1_macro;
        stats.mean.recall_macro += results[i].recall_macro;
        stats.mean.precision_macro += results[i].precision_macro;
        f1s[i] = results[i].f1_macro;
    }
    stats.mean = stats.mean.scaled(1.0 / double(reps));
    stats.f1_stddev = sample_stddev(f1s);
    return stats;
}

void check_grid(const std::vector<std::size_t>& grid, std::size_t upper) {
    if (grid.empty()) throw std::runtime_error("empty train-size grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) throw std::runtime_error("grid sizes must be >= 1");
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw std::runtime_error("grid must be strictly increasing");
        }
    }
    if (grid.back() > upper) {
        throw std::runtime_error("grid exceeds feasible range (max " + std::to_string(upper) + ")");
    }
}

MetricVector full_train_vector(const DatasetSplit& split, const ForestParams& params) {
    const auto model = ForestModel::train(view(split.train), split.train.labels,
                                          int(split.train.n_classes()), params);
    return metric_vector(split.test.labels, model.predict(view(split.test)));
}

}  // namespace

double LearningCurve::value_at(std::size_t x) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.end() || *it != x) {
        throw std::runtime_error("curve has no point at train size " + std::to_string(x));
    }
    return s[std::size_t(it - grid.begin())];
}

bool LearningCurve::has(std::size_t x) const {
    return std::binary_search(grid.begin(), grid.end(), x);
}

std::vector<std::size_t> default_pilot_grid(std::size_t m) {
    std::vector<std::size_t> grid;
    for (std::size_t x = 10; x + 10 <= m; ++x) grid.push_back(x);
    return grid;
}

std::vector<std::size_t> default_needed_grid(std::size_t n_train) {
    std::vector<std::size_t> grid;
    for (std::size_t x = 10; x <= 100 && x < n_train; x += 10) grid.push_back(x);
    for (std::size_t x = 125; x <= 500 && x < n_train; x += 25) grid.push_back(x);
    for (std::size_t x = 600; x < n_train; x += 100) grid.push_back(x);
    grid.push_back(n_train);
    return grid;
}

LearningCurve pilot_curve(const PilotStudy& pilot, const CurveConfig& config) {
    const std::size_t m = pilot.m;
    check_grid(config.grid, m >= 10 ? m - 10 : 0);
    if (config.repetitions < 1) throw std::runtime_error("pilot_curve: repetitions must be >= 1");
    std::set<int> present(pilot.data.labels.begin(), pilot.data.labels.end());
    if (present.size() < 2) throw std::runtime_error("pilot_curve: single-class pilot");

    LearningCurve curve;
    curve.m = m;
    curve.grid = config.grid;
    curve.s.resize(config.grid.size());
    curve.per_x_stddev.resize(config.grid.size());
    for (std::size_t i = 0; i < config.grid.size(); ++i) {
        const auto stats = average_at_size(pilot.data, config.grid[i], nullptr,
                                           config.repetitions, config.forest, config.seed,
                                           nullptr);
        curve.s[i] = stats.mean.f1_macro;
        curve.per_x_stddev[i] = stats.f1_stddev;
    }
    return curve;
}

double final_performance(const DatasetSplit& split, const ForestParams& params) {
    return full_train_vector(split, params).f1_macro;
}

NeededResult needed_amount(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                           std::size_t repetitions, const ForestParams& params,
                           std::uint64_t seed, double threshold) {
    check_grid(grid, split.train.n_rows());
    const MetricVector full = full_train_vector(split, params);
    const MetricVector target = full.scaled(threshold);
    for (std::size_t n : grid) {
        const auto stats =
            average_at_size(split.train, n, &split.test, repetitions, params, seed, &full);
        if (stats.mean.dominates(target)) return NeededResult{n, true};
    }
    return NeededResult{split.train.n_rows(), false};
}

LearningCurve reference_curve(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                              std::size_t repetitions, const ForestParams& params,
                              std::uint64_t seed) {
    check_grid(grid, split.train.n_rows());
    const MetricVector full = full_train_vector(split, params);
    LearningCurve curve;
    curve.m = split.train.n_rows();
    curve.grid = grid;
    curve.s.resize(grid.size());
    curve.per_x_stddev.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto stats =
            average_at_size(split.train, grid[i], &split.test, repetitions, params, seed, &full);
        curve.s[i] = stats.mean.f1_macro;
        curve.per_x_stddev[i] = stats.f1_stddev;
    }
    return curve;
}

GroundTruth compute_ground_truth(const DatasetSplit& split, const std::vector<std::size_t>& grid,
                                 std::size_t repetitions, const ForestParams& params,
                                 std::uint64_t seed, double threshold) {
    check_grid(grid, split.train.n_rows());
    const MetricVector full = full_train_vector(split, params);
    const MetricVector target = full.scaled(threshold);

    GroundTruth gt;
    gt.final_performance = full.f1_macro;
    gt.reference_curve.m = split.train.n_rows();
    gt.reference_curve.grid = grid;
    gt.reference_curve.s.resize(grid.size());
    gt.reference_curve.per_x_stddev.resize(grid.size());
    gt.needed_amount = split.train.n_rows();
    gt.needed_satisfied = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto stats =
            average_at_size(split.train, grid[i], &split.test, repetitions, params, seed, &full);
        gt.reference_curve.s[i] = stats.mean.f1_macro;
        gt.reference_curve.per_x_stddev[i] = stats.f1_stddev;
        if (!gt.needed_satisfied && stats.mean.dominates(target)) {
            gt.needed_amount = grid[i];
            gt.needed_satisfied = true;
        }
    }
    return gt;
}

SplitComparison split_comparison(const PilotStudy& pilot, const DatasetSplit& split,
                                 std::size_t x, std::size_t repetitions,
                                 const ForestParams& params, std::uint64_t seed) {
    const std::size_t m = pilot.m;
    if (x == 0) x = (m * 4) / 5;
    if (x >= m) throw std::runtime_error("split_comparison: x must be smaller than m");
    if (m < 5) throw std::runtime_error("split_comparison: pilot too small for five-fold");

    SplitComparison cmp;
    cmp.final_performance = final_performance(split, params);

    cmp.single_split = one_repetition(pilot.data, x, nullptr, params, mix64(seed, 1)).f1_macro;

    {  // five-fold cross-validation on the pilot
        Rng rng(mix64(seed, 2));
        std::vector<std::size_t> order(m);
        for (std::size_t i = 0; i < m; ++i) order[i] = i;
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t fold = 0; fold < 5; ++fold) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t i = 0; i < m; ++i) {
                (i % 5 == fold ? test_idx : train_idx).push_back(order[i]);
            }
            Rows train = gather(pilot.data, train_idx);
            Rows test = gather(pilot.data, test_idx);
            ForestParams p = params;
            p.seed = mix64(seed, 2, fold);
            const auto model = ForestModel::train(train.view(pilot.data.n_features), train.labels,
                                                  int(pilot.data.n_classes()), p);
            total += metric_vector(test.labels, model.predict(test.view(pilot.data.n_features)))
                         .f1_macro;
        }
        cmp.five_fold = total / 5.0;
    }

    cmp.multiple_split =
        average_at_size(pilot.data, x, nullptr, repetitions, params, mix64(seed, 3), nullptr)
            .mean.f1_macro;
    cmp.full_test =
        average_at_size(pilot.data, x, &split.test, repetitions, params, mix64(seed, 4), nullptr)
            .mean.f1_macro;

    const double o = cmp.final_performance;
    cmp.err_single = std::fabs(cmp.single_split / o - 1.0);
    cmp.err_five_fold = std::fabs(cmp.five_fold / o - 1.0);
    cmp.err_multiple = std::fabs(cmp.multiple_split / o - 1.0);
    cmp.err_full_test = std::fabs(cmp.full_test / o - 1.0);
    return cmp;
}

void save_curve_csv(const LearningCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << "x,s,stddev\n";
    char buf[80];
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", curve.grid[i], curve.s[i],
                      curve.per_x_stddev[i]);
        out << buf;
    }
}

LearningCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "x,s,stddev" && line != "x,s,stddev\r") {
        throw std::runtime_error("bad curve file header: " + path);
    }
    LearningCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t x;
        double s, sd;
        if (std::sscanf(line.c_str(), "%zu,%lg,%lg", &x, &s, &sd) != 3) {
            throw std::runtime_error("bad curve row: " + line);
        }
        curve.grid.push_back(x);
        curve.s.push_back(s);
        curve.per_x_stddev.push_back(sd);
    }
    if (!curve.grid.empty()) curve.m = curve.grid.back() + 10;
    return curve;
}

}  // namespace budget
