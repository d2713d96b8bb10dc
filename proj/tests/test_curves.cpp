#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "budget/curves.hpp"
#include "budget/tabular.hpp"

using namespace budget;

namespace {

// Small split fixture so curve tests stay fast: 150-row train, 60-row test.
DatasetSplit small_split(double separation, std::uint64_t seed, std::size_t n_train = 150,
                         std::size_t n_test = 60) {
    SyntheticSpec spec;
    spec.n = n_train + n_test;
    spec.d = 4;
    spec.separation = separation;
    const TabularDataset ds = generate_synthetic(spec, seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < n_train; ++i) train_idx.push_back(i);
    for (std::size_t i = n_train; i < n_train + n_test; ++i) test_idx.push_back(i);
    DatasetSplit split;
    split.train = ds.select_rows(train_idx);
    split.test = ds.select_rows(test_idx);
    split.source_name = ds.name;
    return split;
}

PilotStudy pilot_from(const DatasetSplit& split, std::size_t m, std::uint64_t seed) {
    return draw_pilot(split, m, seed);
}

ForestParams fast_forest(std::size_t trees = 15) {
    ForestParams p;
    p.n_trees = trees;
    return p;
}

}  // namespace

TEST_CASE("default grids") {
    const auto pg = default_pilot_grid(100);
    REQUIRE(pg.size() == 81);
    CHECK(pg.front() == 10);
    CHECK(pg.back() == 90);

    const auto ng = default_needed_grid(2500);
    CHECK(ng.front() == 10);
    CHECK(ng.back() == 2500);
    CHECK(std::binary_search(ng.begin(), ng.end(), 125));
    CHECK(std::binary_search(ng.begin(), ng.end(), 500));
    CHECK(std::binary_search(ng.begin(), ng.end(), 600));
    CHECK_FALSE(std::binary_search(ng.begin(), ng.end(), 110));
    CHECK(std::is_sorted(ng.begin(), ng.end()));
}

TEST_CASE("pilot_curve shape, bounds and determinism") {
    const DatasetSplit split = small_split(2.0, 21);
    const PilotStudy pilot = pilot_from(split, 50, 3);

    CurveConfig cc;
    cc.repetitions = 30;
    cc.grid = default_pilot_grid(50);
    cc.seed = 17;
    cc.forest = fast_forest();

    const LearningCurve curve = pilot_curve(pilot, cc);
    REQUIRE(curve.grid.size() == 31);  // 10..40
    CHECK(curve.m == 50);
    for (double v : curve.s) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const LearningCurve again = pilot_curve(pilot, cc);
    CHECK(curve.s == again.s);
    CHECK(curve.per_x_stddev == again.per_x_stddev);

    CurveConfig other = cc;
    other.seed = 18;
    CHECK(pilot_curve(pilot, other).s != curve.s);
}

TEST_CASE("pilot_curve rejects infeasible grids and single-class pilots") {
    const DatasetSplit split = small_split(2.0, 22);
    const PilotStudy pilot = pilot_from(split, 50, 4);

    CurveConfig cc;
    cc.repetitions = 5;
    cc.forest = fast_forest();
    cc.grid = {10, 45};  // 45 > m - 10
    CHECK_THROWS(pilot_curve(pilot, cc));
    cc.grid = {20, 15};  // not increasing
    CHECK_THROWS(pilot_curve(pilot, cc));
    cc.grid = {};
    CHECK_THROWS(pilot_curve(pilot, cc));

    PilotStudy degenerate = pilot;
    std::fill(degenerate.data.labels.begin(), degenerate.data.labels.end(), 0);
    cc.grid = {10, 20};
    CHECK_THROWS(pilot_curve(degenerate, cc));
}

TEST_CASE("separable pilot scores high at every size") {
    const DatasetSplit split = small_split(10.0, 23);
    const PilotStudy pilot = pilot_from(split, 60, 5);
    CurveConfig cc;
    cc.repetitions = 20;
    cc.grid = {20, 30, 40, 50};
    cc.seed = 2;
    cc.forest = fast_forest();
    const LearningCurve curve = pilot_curve(pilot, cc);
    for (double v : curve.s) CHECK(v >= 0.95);
}

TEST_CASE("final_performance tracks separability") {
    const DatasetSplit easy = small_split(10.0, 24);
    CHECK(final_performance(easy, fast_forest(25)) > 0.99);

    const DatasetSplit chance = small_split(0.0, 25, 400, 200);
    const double o = final_performance(chance, fast_forest(25));
    CHECK(o > 0.3);
    CHECK(o < 0.7);
}

TEST_CASE("needed_amount threshold 0 stops at the first grid point") {
    const DatasetSplit split = small_split(2.0, 26);
    const auto result =
        needed_amount(split, {20, 40, 80}, 5, fast_forest(), 1, 0.0);
    CHECK(result.satisfied);
    CHECK(result.amount == 20);
}

TEST_CASE("needed_amount sentinel when dominance is unreachable") {
    const DatasetSplit noise = small_split(0.0, 27);
    // threshold > 1 can never be strictly dominated on noise data
    const auto result = needed_amount(noise, {20, 60}, 3, fast_forest(), 2, 1.5);
    CHECK_FALSE(result.satisfied);
    CHECK(result.amount == noise.train.n_rows());
}

TEST_CASE("reference_curve at full train size equals final_performance bit-for-bit") {
    const DatasetSplit split = small_split(3.0, 28);
    const ForestParams params = fast_forest();
    const double o = final_performance(split, params);
    const LearningCurve rc = reference_curve(split, {50, split.train.n_rows()}, 4, params, 9);
    CHECK(rc.s.back() == o);
    CHECK(std::is_sorted(rc.grid.begin(), rc.grid.end()));

    const LearningCurve rc2 = reference_curve(split, {50, split.train.n_rows()}, 4, params, 9);
    CHECK(rc.s == rc2.s);
}

TEST_CASE("compute_ground_truth agrees with the separate calls") {
    const DatasetSplit split = small_split(4.0, 29);
    const ForestParams params = fast_forest();
    const std::vector<std::size_t> grid{20, 50, 100, split.train.n_rows()};
    const GroundTruth gt = compute_ground_truth(split, grid, 4, params, 11);
    CHECK(gt.final_performance == final_performance(split, params));
    CHECK(gt.reference_curve.s == reference_curve(split, grid, 4, params, 11).s);
    const auto needed = needed_amount(split, grid, 4, params, 11);
    CHECK(gt.needed_amount == needed.amount);
    CHECK(gt.needed_satisfied == needed.satisfied);
}

TEST_CASE("needed_amount is monotone in the threshold") {
    const DatasetSplit split = small_split(2.5, 30);
    const std::vector<std::size_t> grid{20, 35, 50, 75, 100, 150};
    std::size_t prev = 0;
    for (double t : {0.5, 0.9, 0.99}) {
        const auto r = needed_amount(split, grid, 6, fast_forest(), 13, t);
        CHECK(r.amount >= prev);
        prev = r.amount;
    }
}

TEST_CASE("split_comparison produces the four estimates") {
    const DatasetSplit split = small_split(3.0, 31);
    const PilotStudy pilot = pilot_from(split, 50, 6);
    const SplitComparison cmp = split_comparison(pilot, split, 0, 20, fast_forest(), 5);
    for (double v : {cmp.single_split, cmp.five_fold, cmp.multiple_split, cmp.full_test}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (double e : {cmp.err_single, cmp.err_five_fold, cmp.err_multiple, cmp.err_full_test}) {
        CHECK(e >= 0.0);
    }
    CHECK(cmp.final_performance == final_performance(split, fast_forest()));
    CHECK(cmp.err_multiple == doctest::Approx(
                                  std::fabs(cmp.multiple_split / cmp.final_performance - 1.0)));

    CHECK_THROWS(split_comparison(pilot, split, 50, 5, fast_forest(), 1));  // x must be < m
}

TEST_CASE("curve value lookup and CSV round-trip") {
    LearningCurve curve;
    curve.grid = {10, 11, 13};
    curve.s = {0.5, 0.625, 0.75};
    curve.per_x_stddev = {0.01, 0.02, 0.03};
    curve.m = 23;
    CHECK(curve.value_at(11) == 0.625);
    CHECK(curve.has(13));
    CHECK_FALSE(curve.has(12));
    CHECK_THROWS(curve.value_at(12));

    const std::string path = "/tmp/databudget_curve_roundtrip.csv";
    save_curve_csv(curve, path);
    const LearningCurve back = load_curve_csv(path);
    CHECK(back.grid == curve.grid);
    CHECK(back.s == curve.s);
    CHECK(back.per_x_stddev == curve.per_x_stddev);
    CHECK(back.m == 23);  // inferred as grid.back() + 10

    CHECK_THROWS(load_curve_csv("/tmp/databudget_no_curve_here.csv"));
}
