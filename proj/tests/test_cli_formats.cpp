#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "budget/curves.hpp"
#include "budget/evalharness.hpp"
#include "budget/store.hpp"
#include "budget/svg.hpp"
#include "budget/tabular.hpp"

using namespace budget;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DATABUDGET_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

const std::string kRoot = "/tmp/databudget_cli_test";

}  // namespace

TEST_CASE("store round-trips datasets and ground truths") {
    fs::remove_all(kRoot + "/store");
    Store store(kRoot + "/store");

    SyntheticSpec spec;
    spec.n = 80;
    spec.d = 3;
    const TabularDataset ds = generate_synthetic(spec, 5, "roundtrip demo!");
    const std::string id = sanitize_id(ds.name);
    CHECK(id == "roundtrip_demo_");
    store.put_dataset(ds, id);
    CHECK(store.has_dataset(id));
    CHECK(store.list_datasets() == std::vector<std::string>{id});
    const TabularDataset back = store.get_dataset(id);
    CHECK(back.rows == ds.rows);
    CHECK(back.labels == ds.labels);
    CHECK_THROWS(store.get_dataset("absent"));

    GroundTruth gt;
    gt.final_performance = 0.875;
    gt.needed_amount = 300;
    gt.needed_satisfied = true;
    gt.reference_curve.grid = {100, 200};
    gt.reference_curve.s = {0.5, 0.75};
    gt.reference_curve.per_x_stddev = {0.01, 0.02};
    gt.reference_curve.m = 210;
    store.put_ground_truth(id, gt);
    CHECK(store.has_ground_truth(id));
    const GroundTruth gt2 = store.get_ground_truth(id);
    CHECK(gt2.final_performance == 0.875);
    CHECK(gt2.needed_amount == 300);
    CHECK(gt2.reference_curve.s == gt.reference_curve.s);

    // corrupt record -> get throws so callers can recompute
    std::ofstream(store.groundtruth_dir() + "/" + id + ".json") << "not json at all";
    CHECK_THROWS(store.get_ground_truth(id));
}

TEST_CASE("svg plots carry the generator tag and the data") {
    const std::string path = kRoot + "_plot.svg";
    PlotSeries line;
    line.label = "demo";
    line.x = {1, 2, 3};
    line.y = {0.1, 0.5, 0.3};
    PlotSeries dots;
    dots.points_only = true;
    dots.x = {1.5};
    dots.y = {0.4};
    write_svg_plot(path, "title", "xs", "ys", {line, dots});
    const std::string svg = slurp(path);
    CHECK(svg.find("databudget chart generator v1") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("demo") != std::string::npos);
}

TEST_CASE("records CSV header matches the documented format") {
    EvalReport report;
    PredictionRecord rec;
    rec.repetition = 3;
    rec.method = "powerlaw";
    rec.dataset = "demo";
    rec.true_final = 0.5;
    rec.predicted_final = 0.25;
    rec.true_bin = 1;
    rec.predicted_bin = 2;
    report.records.push_back(rec);
    const std::string path = kRoot + "_records.csv";
    save_records_csv(report, path);
    const std::string csv = slurp(path);
    CHECK(csv.rfind("repetition,method,dataset,true_final,predicted_final,true_bin,predicted_bin\n",
                    0) == 0);
    CHECK(csv.find("3,powerlaw,demo,0.5,0.25,1,2") != std::string::npos);
}

TEST_CASE("cli pipeline: synth, groundtruth, curve, train, predict, benchmark") {
    const std::string out = kRoot + "/run";
    fs::remove_all(out);

    REQUIRE(run_cli("synth --count 12 --rows 3000 --seed 4 --out " + out) == 0);
    Store store(out);
    const auto ids = store.list_datasets();
    REQUIRE(ids.size() == 12);

    REQUIRE(run_cli("groundtruth --reps 1 --trees 8 --seed 4 --out " + out) == 0);
    for (const auto& id : ids) CHECK(store.has_ground_truth(id));
    // cache hit: rerun must not change the records
    const std::string first = slurp(out + "/groundtruth/" + ids[0] + ".json");
    REQUIRE(run_cli("groundtruth --reps 1 --trees 8 --seed 5 --out " + out) == 0);
    CHECK(slurp(out + "/groundtruth/" + ids[0] + ".json") == first);

    // config file supplies m; explicit flags win over it
    std::ofstream(out + "/cfg.json") << "{\"m\": 60}\n";
    REQUIRE(run_cli("curve --dataset " + ids[0] + " --reps 5 --trees 8 --config " + out +
                    "/cfg.json --out " + out) == 0);
    // m=60 -> grid 10..50 -> 41 rows + header
    CHECK(count_lines(slurp(out + "/reports/" + ids[0] + "_curve.csv")) == 42);
    REQUIRE(run_cli("curve --dataset " + ids[0] + " --m 40 --reps 5 --trees 8 --config " + out +
                    "/cfg.json --out " + out) == 0);
    // m=40 -> grid 10..30 -> 21 rows + header
    CHECK(count_lines(slurp(out + "/reports/" + ids[0] + "_curve.csv")) == 22);
    CHECK(slurp(out + "/reports/" + ids[0] + "_curve.svg")
              .find("databudget chart generator") != std::string::npos);

    REQUIRE(run_cli("budget train --method learning-lr --m 40 --curve-reps 5 --trees 8 --seed 4"
                    " --out " + out) == 0);
    CHECK(fs::exists(out + "/models/budget_model.json"));

    // small pilot CSV for predict; the hardest dataset keeps the curve off
    // the saturation ceiling so the power-law fit has usable points
    const TabularDataset full = store.get_dataset(ids.back());
    std::vector<std::size_t> idx(60);
    for (std::size_t i = 0; i < 60; ++i) idx[i] = i;
    save_dataset(full.select_rows(idx), out + "/pilot.csv");
    const std::string label = full.schema.back().name;
    REQUIRE(run_cli("budget predict --pilot " + out + "/pilot.csv --label " + label +
                    " --method powerlaw --curve-reps 5 --trees 8 --out " + out) == 0);

    REQUIRE(run_cli("benchmark --methods powerlaw --m 40 --reps 3 --curve-reps 5 --trees 8"
                    " --gt-reps 1 --seed 4 --no-plots --out " + out) == 0);
    const std::string report = slurp(out + "/reports/benchmark.json");
    CHECK(report.find("\"format\": \"eval-report\"") != std::string::npos);
    CHECK(report.find("\"config\"") != std::string::npos);  // provenance embedded
    CHECK(count_lines(slurp(out + "/reports/benchmark_records.csv")) >= 2);
}

TEST_CASE("cli ingest isolates per-file failures") {
    const std::string out = kRoot + "/ingest";
    fs::remove_all(out);
    fs::create_directories(out);
    std::ofstream(out + "/good.csv") << "a,y\n1,A\n2,B\n3,A\n4,B\n";
    std::ofstream(out + "/bad.csv") << "a,y\n1,A\n2,A\n";
    CHECK(run_cli("ingest " + out + "/good.csv " + out + "/bad.csv --label y --out " + out) == 0);
    Store store(out);
    CHECK(store.has_dataset("good"));
    CHECK_FALSE(store.has_dataset("bad"));
    // every input failing is an error exit
    CHECK(run_cli("ingest " + out + "/bad.csv --label y --out " + out) != 0);
}

TEST_CASE("cli errors exit nonzero") {
    const std::string out = kRoot + "/errs";
    CHECK(run_cli("curve --dataset no_such_dataset --out " + out) != 0);
    CHECK(run_cli("definitely-not-a-command") != 0);
    CHECK(run_cli("curve --dataset x --config /tmp/databudget_missing_cfg.json --out " + out) !=
          0);
}
