// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Heavier fixtures (the synthetic benchmark corpus and its
// ground truths) are shared across criteria and computed once.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "budget/budgeter.hpp"
#include "budget/curves.hpp"
#include "budget/evalharness.hpp"
#include "budget/metrics.hpp"
#include "budget/parallel.hpp"
#include "budget/powerlaw.hpp"
#include "budget/rng.hpp"
#include "budget/tabular.hpp"

using namespace budget;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%-34s %s%s%s\n", name.c_str(), ok ? "PASS" : "FAIL",
                detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

ForestParams forest(std::size_t trees, std::uint64_t seed = 0) {
    ForestParams p;
    p.n_trees = trees;
    p.seed = seed;
    return p;
}

// ---------------------------------------------------------------- criterion
// Power-law recovery and inversion-vs-scan agreement on random parameters.

LearningCurve model_curve(double b, double c) {
    LearningCurve curve;
    for (std::size_t x = 10; x <= 90; ++x) {
        curve.grid.push_back(x);
        curve.s.push_back(1.0 - b * std::pow(double(x), c));
        curve.per_x_stddev.push_back(0.0);
    }
    curve.m = 100;
    return curve;
}

std::size_t scan_needed(double b, double c, double threshold) {
    const double target = threshold * (1.0 - b * std::pow(2500.0, c));
    for (std::size_t x = 1; x <= 2500; ++x) {
        if (1.0 - b * std::pow(double(x), c) > target) return x;
    }
    return 2500;
}

void criterion_powerlaw_recovery() {
    Rng rng(0xACCE5501);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const double b = 0.05 + 0.95 * rng.uniform();
        const double c = -1.0 + 0.9 * rng.uniform();
        const PowerLawFit fit = fit_power_law(model_curve(b, c));
        if (std::fabs(fit.b - b) > 1e-6 || std::fabs(fit.c - c) > 1e-6) {
            ok = false;
            detail = "parameter recovery missed at b=" + std::to_string(b) +
                     " c=" + std::to_string(c);
        }
        const PowerLawNeeded needed = extrapolate_needed(fit, 0.99);
        if (needed.amount != scan_needed(b, c, 0.99)) {
            ok = false;
            detail = "inversion != scan at b=" + std::to_string(b) + " c=" + std::to_string(c);
        }
    }
    report("powerlaw recovery (100 random)", ok, detail);
}

void criterion_powerlaw_fixture() {
    PowerLawFit fit;
    fit.b = 0.5;
    fit.c = -0.5;
    const double fin = extrapolate_final(fit);
    const PowerLawNeeded needed = extrapolate_needed(fit, 0.99);
    const bool ok = std::fabs(fin - 0.99) < 1e-12 && needed.amount == 632 &&
                    needed.amount == scan_needed(0.5, -0.5, 0.99);
    std::ostringstream detail;
    detail << "final=" << fin << " needed=" << needed.amount;
    report("powerlaw fixture b=.5 c=-.5", ok, detail.str());
}

// ---------------------------------------------------------------- criterion
// needed_amount vs a fine-granularity brute-force scan + threshold
// monotonicity.

DatasetSplit medium_split(double separation, double noise, std::uint64_t seed,
                          std::size_t n_train = 300, std::size_t n_test = 150) {
    SyntheticSpec spec;
    spec.n = n_train + n_test;
    spec.d = 4;
    spec.separation = separation;
    spec.label_noise = noise;
    const TabularDataset ds = generate_synthetic(spec, seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < n_train; ++i) train_idx.push_back(i);
    for (std::size_t i = n_train; i < n_train + n_test; ++i) test_idx.push_back(i);
    DatasetSplit split;
    split.train = ds.select_rows(train_idx);
    split.test = ds.select_rows(test_idx);
    return split;
}

void criterion_needed_oracle() {
    const DatasetSplit split = medium_split(2.5, 0.05, 0xBEE);
    const ForestParams params = forest(15);

    std::vector<std::size_t> coarse, fine;
    for (std::size_t n = 20; n <= 300; n += 20) coarse.push_back(n);
    for (std::size_t n = 10; n <= 300; n += 5) fine.push_back(n);

    const auto got = needed_amount(split, coarse, 20, params, 0x11, 0.99);
    const auto oracle = needed_amount(split, fine, 20, params, 0x11, 0.99);
    bool ok = got.satisfied && oracle.satisfied &&
              (got.amount >= oracle.amount ? got.amount - oracle.amount
                                           : oracle.amount - got.amount) <= 20;

    std::size_t prev = 0;
    for (double t : {0.9, 0.95, 0.99}) {
        const auto r = needed_amount(split, fine, 20, params, 0x11, t);
        if (r.amount < prev) ok = false;
        prev = r.amount;
    }
    std::ostringstream detail;
    detail << "coarse=" << got.amount << " fine=" << oracle.amount;
    report("needed amount vs brute force", ok, detail.str());
}

// ---------------------------------------------------------------- criterion
// Repetition smoothing: more splits, flatter curve estimates.

void criterion_smoothing() {
    SyntheticSpec spec;
    spec.n = 3000;
    spec.d = 4;
    spec.separation = 1.2;
    spec.label_noise = 0.1;
    const TabularDataset ds = generate_synthetic(spec, 0x50F7);
    const DatasetSplit split = subsample_and_split(ds, 3000, 500, 1);
    const PilotStudy pilot = draw_pilot(split, 100, 2);

    auto stddev_at = [&](std::size_t reps) {
        std::vector<double> values;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            CurveConfig cc;
            cc.repetitions = reps;
            cc.grid = {50};
            cc.seed = mix64(0xD1CE, reps, seed);
            cc.forest = forest(20);
            values.push_back(pilot_curve(pilot, cc).s[0]);
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= double(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / double(values.size() - 1));
    };

    const double sd20 = stddev_at(20);
    const double sd500 = stddev_at(500);
    const double ratio = sd20 / sd500;       // 1/sqrt(R) predicts sqrt(500/20) = 5
    const bool ok = sd500 < sd20 && ratio > 5.0 / 3.0 && ratio < 15.0;
    std::ostringstream detail;
    detail << "sd(R=20)=" << sd20 << " sd(R=500)=" << sd500 << " ratio=" << ratio;
    report("repetition smoothing", ok, detail.str());
}

// ---------------------------------------------------------------- criterion
// Metric suite hand examples + the exhaustive bin-distance partition.

void criterion_metrics() {
    bool ok = true;
    const MetricVector mv = metric_vector({0, 0, 1, 1}, {0, 0, 0, 0});
    ok &= mv.accuracy == 0.5 && std::fabs(mv.f1_macro - 1.0 / 3.0) < 1e-15 &&
          mv.recall_macro == 0.5 && mv.precision_macro == 0.25;
    ok &= std::fabs(r2_score({0, 1, 2}, {0, 1, 1}) - 0.5) < 1e-15;
    ok &= acc_metrics({0, 1, 2, 3}, {1, 1, 2, 0}) == std::pair<double, double>{0.5, 0.25};

    Rng rng(0x3110);
    std::vector<int> yt, yp;
    for (int i = 0; i < 1000; ++i) {
        yt.push_back(int(rng.uniform_index(5)));
        yp.push_back(int(rng.uniform_index(5)));
    }
    const auto [a0, a1] = acc_metrics(yt, yp);
    double far = 0.0;
    for (std::size_t i = 0; i < yt.size(); ++i) {
        if (std::abs(yt[i] - yp[i]) >= 2) far += 1.0;
    }
    ok &= a0 + a1 + far / 1000.0 == 1.0;
    report("metric suite", ok);
}

void criterion_bins() {
    const BinScheme bins = reference_bins();
    const std::vector<std::pair<double, int>> expected{
        {104, 0}, {105, 1}, {227, 1}, {228, 2}, {430, 2},
        {431, 3}, {805, 3}, {806, 4}, {2000, 4}};
    bool ok = true;
    for (const auto& [value, bin] : expected) ok &= assign_bin(value, bins) == bin;
    report("bin edges", ok);
}

// ---------------------------------------------------------------- criterion
// Name clustering fixtures + byte-reproducibility across worker counts.

DatasetSplit tiny_split(double separation, std::uint64_t seed) {
    return medium_split(separation, 0.05, seed, 140, 60);
}

std::vector<BenchmarkEntry> family_corpus(std::size_t count, std::uint64_t seed) {
    static const char* families[] = {"alpha", "beta", "gamma", "delta", "epsilon"};
    std::vector<BenchmarkEntry> entries;
    for (std::size_t i = 0; i < count; ++i) {
        BenchmarkEntry e;
        e.name = std::string(families[i % 5]) + "_" + std::to_string(i / 5);
        e.split = tiny_split(1.0 + 0.4 * double(i % 5), mix64(seed, i));
        entries.push_back(std::move(e));
    }
    return entries;
}

std::string fingerprint(const EvalReport& report) {
    std::ostringstream out;
    char buf[80];
    for (const auto& rec : report.records) {
        std::snprintf(buf, sizeof(buf), "%zu|%s|%s|%.17g|%.17g|%d|%d\n", rec.repetition,
                      rec.method.c_str(), rec.dataset.c_str(), rec.true_final,
                      rec.predicted_final, rec.true_bin, rec.predicted_bin);
        out << buf;
    }
    for (const auto& ce : report.corpus) {
        for (double s : ce.curve.s) {
            std::snprintf(buf, sizeof(buf), "%.17g,", s);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g\n", ce.final_performance);
        out << buf;
    }
    return out.str();
}

void criterion_clustering() {
    bool ok = true;
    std::string detail;

    const double sim = name_similarity("House", "House_8L");
    if (std::fabs(sim - 10.0 / 13.0) > 1e-12) {
        ok = false;
        detail = "similarity=" + std::to_string(sim);
    }

    const NameClusterIndex index =
        cluster_datasets({"House", "House_8L", "volcano_a", "volcano_b"}, 2);
    ok &= index.cluster_of[0] == index.cluster_of[1] &&
          index.cluster_of[2] == index.cluster_of[3] &&
          index.cluster_of[0] != index.cluster_of[2];

    // Full benchmark reproducibility: 1 worker vs 8 workers, byte identical.
    auto entries = family_corpus(20, 0xFA);
    BenchmarkConfig cfg;
    cfg.pilot_m = 40;
    cfg.curve_reps = 5;
    cfg.gt_reps = 1;
    cfg.base_forest = forest(8);
    cfg.meta.forest = forest(15);
    cfg.clusters = 5;
    cfg.bootstrap_reps = 4;
    cfg.seed = 0xC0FFEE;
    const std::vector<Method> methods{Method::Powerlaw, Method::LearningRF};

    set_jobs(1);
    const std::string serial = fingerprint(run_benchmark(entries, methods, cfg));
    set_jobs(8);
    const std::string parallel = fingerprint(run_benchmark(entries, methods, cfg));
    set_jobs(1);
    if (serial != parallel) {
        ok = false;
        detail = "1-job and 8-job runs differ";
    }
    report("clustering + reproducibility", ok, detail);
}

// ---------------------------------------------------------------- criterion
// Degenerate corpus: the linear meta-model must find the identity feature.

void criterion_degenerate_corpus() {
    Rng rng(0xDE6E);
    const auto grid = default_pilot_grid(40);  // 21 features, corpus of 60
    auto random_curve = [&]() {
        LearningCurve c;
        c.grid = grid;
        c.m = 40;
        double v = 0.3 + 0.3 * rng.uniform();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v += 0.012 * rng.uniform();
            c.s.push_back(std::min(v, 0.999));
            c.per_x_stddev.push_back(0.0);
        }
        return c;
    };
    std::vector<CorpusEntry> corpus;
    for (int i = 0; i < 60; ++i) {
        CorpusEntry e;
        e.name = "degen_" + std::to_string(i);
        e.curve = random_curve();
        e.final_performance = e.curve.s.back();  // truth equals the last curve point by construction
        e.needed = 100 + 37 * (i % 7);
        e.needed_satisfied = true;
        e.m = 40;
        corpus.push_back(std::move(e));
    }
    const BudgetModel model =
        train_budget_model(corpus, MetaKind::Linear, FeatureMode::Fixed, reference_bins());

    std::vector<double> truth, fitted;
    for (const auto& e : corpus) {
        truth.push_back(e.final_performance);
        fitted.push_back(predict_final_value(model, e.curve));
    }
    const double r2 = r2_score(truth, fitted);

    bool unseen_ok = true;
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
        const LearningCurve probe = random_curve();
        const double err = std::fabs(predict_final_value(model, probe) - probe.s.back());
        worst = std::max(worst, err);
        unseen_ok &= err <= 0.01;
    }
    const bool ok = r2 > 0.999 && unseen_ok;
    std::ostringstream detail;
    detail << "train R2=" << r2 << " worst unseen err=" << worst;
    report("degenerate corpus identity", ok, detail.str());
}

// ---------------------------------------------------------------- criterion
// Splitting comparison ordering: full-test < multiple < single on average.

void criterion_split_comparison() {
    SyntheticSpec spec;
    spec.n = 3000;
    spec.d = 4;
    spec.separation = 1.0;
    spec.label_noise = 0.2;
    spec.classes = 3;
    const TabularDataset ds = generate_synthetic(spec, 0x5C3);
    const DatasetSplit split = subsample_and_split(ds, 3000, 500, 1);

    double err_single = 0.0, err_multiple = 0.0, err_full = 0.0, err_five = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const PilotStudy pilot = draw_pilot(split, 100, mix64(0x9F, seed));
        const SplitComparison cmp =
            split_comparison(pilot, split, 0, 100, forest(20), mix64(0x31A, seed));
        err_single += cmp.err_single;
        err_multiple += cmp.err_multiple;
        err_full += cmp.err_full_test;
        err_five += cmp.err_five_fold;
    }
    err_single /= 20.0;
    err_multiple /= 20.0;
    err_full /= 20.0;
    err_five /= 20.0;
    const bool ok = err_full < err_multiple && err_multiple < err_single;
    std::ostringstream detail;
    detail << "full=" << err_full << " multiple=" << err_multiple << " single=" << err_single
           << " five-fold(unranked)=" << err_five;
    report("split comparison ordering", ok, detail.str());
}

// ---------------------------------------------------------------- criterion
// The desk-scale benchmark: learning beats the power law at m=50, and the
// gap narrows at m=200.

std::vector<BenchmarkEntry> graded_benchmark_corpus() {
    std::vector<BenchmarkEntry> entries;
    const std::size_t count = 40;
    for (std::size_t i = 0; i < count; ++i) {
        SyntheticSpec spec;
        spec.n = 3000;
        const double t = double(i) / double(count - 1);
        spec.separation = 6.0 * (1.0 - t) + 0.4 * t;
        spec.label_noise = 0.35 * t;
        spec.d = 4 + (i % 5) * 2;
        spec.classes = 2 + (i % 3);
        const TabularDataset ds = generate_synthetic(spec, mix64(0x6AAD, i));
        BenchmarkEntry e;
        char name[48];
        std::snprintf(name, sizeof(name), "synth_%02zu_s%03d_n%03d", i,
                      int(spec.separation * 10), int(spec.label_noise * 100));
        e.name = name;
        e.split = subsample_and_split(ds, 3000, 500, mix64(0x5B11, i));
        entries.push_back(std::move(e));
    }
    // Shared ground truths, computed once and reused by every seeded run.
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].ground_truth = compute_ground_truth(
            entries[i].split, default_needed_grid(entries[i].split.train.n_rows()), 5,
            forest(20, 0xF0), mix64(0x67, i));
        entries[i].has_ground_truth = true;
    }
    return entries;
}

std::pair<double, double> benchmark_r2(const std::vector<BenchmarkEntry>& entries,
                                       std::size_t m, std::uint64_t seed) {
    BenchmarkConfig cfg;
    cfg.pilot_m = m;
    cfg.curve_reps = 100;
    cfg.base_forest = forest(20);
    cfg.meta.forest = forest(100);
    cfg.seed = seed;
    const EvalReport report =
        run_benchmark(entries, {Method::Powerlaw, Method::LearningRF}, cfg);
    double power = 0.0, learn = 0.0;
    for (const auto& scores : report.methods) {
        if (scores.method == "powerlaw") power = scores.r2_defined ? scores.r2 : -1e9;
        if (scores.method == "learning-RF") learn = scores.r2_defined ? scores.r2 : -1e9;
    }
    return {power, learn};
}

void criterion_benchmark_gap(const std::vector<BenchmarkEntry>& entries) {
    int wins = 0;
    double gap50 = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto [power, learn] = benchmark_r2(entries, 50, seed);
        if (learn > power) ++wins;
        gap50 += learn - power;
        std::printf("  m=50 seed=%llu powerlaw R2=%.4f learning-RF R2=%.4f\n",
                    (unsigned long long)seed, power, learn);
        std::fflush(stdout);
    }
    gap50 /= 10.0;

    double gap200 = 0.0;
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        const auto [power, learn] = benchmark_r2(entries, 200, seed);
        gap200 += learn - power;
        std::printf("  m=200 seed=%llu powerlaw R2=%.4f learning-RF R2=%.4f\n",
                    (unsigned long long)seed, power, learn);
        std::fflush(stdout);
    }
    gap200 /= 2.0;

    const bool ok = wins >= 8 && gap200 < gap50;
    std::ostringstream detail;
    detail << "wins=" << wins << "/10 gap(m=50)=" << gap50 << " gap(m=200)=" << gap200;
    report("benchmark: learning vs powerlaw", ok, detail.str());
}

}  // namespace

int main() {
    criterion_powerlaw_recovery();
    criterion_powerlaw_fixture();
    criterion_metrics();
    criterion_bins();
    criterion_clustering();
    criterion_degenerate_corpus();
    criterion_needed_oracle();
    criterion_smoothing();
    criterion_split_comparison();
    const auto entries = graded_benchmark_corpus();
    criterion_benchmark_gap(entries);

    std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
