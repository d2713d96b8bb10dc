// databudget: pilot-study data budgeting toolkit.
//
// Subcommands: synth, ingest, curve, groundtruth, budget train,
// budget predict, benchmark. See README.md for a walkthrough.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "budget/budgeter.hpp"
#include "budget/curves.hpp"
#include "budget/evalharness.hpp"
#include "budget/parallel.hpp"
#include "budget/powerlaw.hpp"
#include "budget/rng.hpp"
#include "budget/store.hpp"
#include "budget/svg.hpp"
#include "budget/tabular.hpp"

using namespace budget;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out = "budget_out";
    std::size_t n_jobs = 1;
    std::string config_path;
};

json g_effective_config = json::object();

void note_config(const std::string& key, const json& value) { g_effective_config[key] = value; }

void write_config_sidecar(const std::string& path) {
    std::ofstream out(path);
    out << g_effective_config.dump(2) << '\n';
}

// --config file values become option defaults; explicit flags override them.
void apply_config_defaults(CLI::App& app, const json& cfg) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        CLI::Option* opt = app.get_option_no_throw("--" + it.key());
        if (opt && !opt->get_positional()) {
            opt->default_val(it.value().is_string() ? it.value().get<std::string>()
                                                    : it.value().dump());
        }
    }
    for (CLI::App* sub : app.get_subcommands({})) apply_config_defaults(*sub, cfg);
}

ForestParams forest_params(std::size_t trees, std::uint64_t seed) {
    ForestParams p;
    p.n_trees = trees;
    p.seed = seed;
    return p;
}

std::vector<Method> parse_methods(const std::string& csv) {
    std::vector<Method> methods;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "powerlaw") methods.push_back(Method::Powerlaw);
        else if (tok == "learning-lr" || tok == "learning-LR") methods.push_back(Method::LearningLR);
        else if (tok == "learning-rf" || tok == "learning-RF") methods.push_back(Method::LearningRF);
        else if (!tok.empty()) throw std::runtime_error("unknown method: " + tok);
    }
    if (methods.empty()) throw std::runtime_error("no methods selected");
    return methods;
}

// Difficulty-graded synthetic corpus: separation decays and label noise
// grows with the dataset index, cycling through feature/class shapes.
std::vector<std::pair<std::string, SyntheticSpec>> graded_corpus(std::size_t count,
                                                                 std::size_t n_rows) {
    std::vector<std::pair<std::string, SyntheticSpec>> out;
    for (std::size_t i = 0; i < count; ++i) {
        SyntheticSpec spec;
        spec.n = n_rows;
        const double t = count > 1 ? double(i) / double(count - 1) : 0.0;
        spec.separation = 6.0 * (1.0 - t) + 0.4 * t;
        spec.label_noise = 0.35 * t;
        spec.d = 4 + (i % 5) * 2;
        spec.classes = 2 + (i % 3);
        char name[64];
        std::snprintf(name, sizeof(name), "synth_%02zu_s%03d_n%03d", i,
                      int(spec.separation * 10), int(spec.label_noise * 100));
        out.emplace_back(name, spec);
    }
    return out;
}

int cmd_synth(const GlobalOpts& g, std::size_t count, std::size_t n_rows) {
    Store store(g.out);
    const auto corpus = graded_corpus(count, n_rows);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto ds = generate_synthetic(corpus[i].second, mix64(g.seed, i), corpus[i].first);
        store.put_dataset(ds, sanitize_id(corpus[i].first));
        std::cout << "stored " << corpus[i].first << " (n=" << ds.n_rows()
                  << ", d=" << ds.n_features << ", C=" << ds.n_classes() << ")\n";
    }
    write_config_sidecar(store.reports_dir() + "/synth.config.json");
    return 0;
}

int cmd_ingest(const GlobalOpts& g, const std::vector<std::string>& paths,
               const std::string& label_column, bool binarize) {
    Store store(g.out);
    int failures = 0;
    for (const auto& path : paths) {
        try {
            TabularDataset ds = load_csv(path, label_column);
            if (binarize) {
                if (ds.raw_label_values.empty()) {
                    throw std::runtime_error("--binarize given but labels are not continuous");
                }
                ds = binarize_regression(ds);
            }
            const auto elig = validate_eligibility(ds);
            std::string base = path;
            const auto slash = base.find_last_of('/');
            if (slash != std::string::npos) base = base.substr(slash + 1);
            if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") {
                base = base.substr(0, base.size() - 4);
            }
            const std::string id = sanitize_id(base);
            ds.name = id;
            store.put_dataset(ds, id);
            std::cout << "stored " << id << ": n=" << ds.n_rows() << " d=" << ds.n_features
                      << " C=" << ds.n_classes()
                      << (elig.eligible ? " [eligible]" : " [NOT eligible]");
            for (const auto& reason : elig.reasons) std::cout << " (" << reason << ")";
            std::cout << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "rejected " << path << ": " << e.what() << "\n";
        }
    }
    write_config_sidecar(store.reports_dir() + "/ingest.config.json");
    return failures == int(paths.size()) && !paths.empty() ? 1 : 0;
}

DatasetSplit split_for(const Store& store, const std::string& id, std::uint64_t seed) {
    const TabularDataset ds = store.get_dataset(id);
    const auto elig = validate_eligibility(ds);
    if (!elig.eligible) {
        std::string why;
        for (const auto& reason : elig.reasons) why += " " + reason;
        throw std::runtime_error("dataset " + id + " not eligible:" + why);
    }
    return subsample_and_split(ds, 3000, 500, mix64(seed, 0x5B11));
}

int cmd_curve(const GlobalOpts& g, const std::string& id, std::size_t m, std::size_t reps,
              std::size_t trees, const std::string& compare_reps) {
    Store store(g.out);
    const DatasetSplit split = split_for(store, id, g.seed);
    const PilotStudy pilot = draw_pilot(split, m, mix64(g.seed, 0x9107));

    CurveConfig cc;
    cc.grid = default_pilot_grid(m);
    cc.seed = mix64(g.seed, 0xC07e);
    cc.forest = forest_params(trees, 0);

    std::vector<PlotSeries> series;
    std::vector<std::size_t> rep_list;
    if (compare_reps.empty()) {
        rep_list.push_back(reps);
    } else {
        std::stringstream ss(compare_reps);
        std::string tok;
        while (std::getline(ss, tok, ',')) rep_list.push_back(std::stoul(tok));
    }
    LearningCurve main_curve;
    for (std::size_t r : rep_list) {
        cc.repetitions = r;
        const LearningCurve curve = pilot_curve(pilot, cc);
        PlotSeries s;
        s.label = "R=" + std::to_string(r);
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            s.x.push_back(double(curve.grid[i]));
            s.y.push_back(curve.s[i]);
        }
        series.push_back(std::move(s));
        main_curve = curve;
    }
    const std::string base = store.reports_dir() + "/" + id + "_curve";
    save_curve_csv(main_curve, base + ".csv");
    write_svg_plot(base + ".svg", "Pilot learning curve: " + id, "train size x", "F1_macro",
                   series);
    write_config_sidecar(base + ".config.json");
    std::cout << "wrote " << base << ".csv and .svg (" << main_curve.grid.size() << " points)\n";
    return 0;
}

int cmd_groundtruth(const GlobalOpts& g, std::vector<std::string> ids, std::size_t reps,
                    std::size_t trees, bool force) {
    Store store(g.out);
    if (ids.empty()) ids = store.list_datasets();
    for (const auto& id : ids) {
        if (!force && store.has_ground_truth(id)) {
            try {
                store.get_ground_truth(id);
                std::cout << id << ": cached\n";
                continue;
            } catch (const std::exception& e) {
                std::cout << id << ": cache unreadable (" << e.what() << "), recomputing\n";
            }
        }
        const DatasetSplit split = split_for(store, id, g.seed);
        const GroundTruth gt = compute_ground_truth(
            split, default_needed_grid(split.train.n_rows()), reps,
            forest_params(trees, mix64(g.seed, 0xF0)), mix64(g.seed, 0x67));
        store.put_ground_truth(id, gt);
        std::cout << id << ": final=" << gt.final_performance << " needed=" << gt.needed_amount
                  << (gt.needed_satisfied ? "" : " (sentinel: needs all data)") << "\n";
    }
    write_config_sidecar(store.reports_dir() + "/groundtruth.config.json");
    return 0;
}

std::vector<BenchmarkEntry> load_entries(const Store& store, std::uint64_t seed,
                                         bool require_gt) {
    std::vector<BenchmarkEntry> entries;
    for (const auto& id : store.list_datasets()) {
        BenchmarkEntry entry;
        entry.name = id;
        entry.split = split_for(store, id, seed);
        if (store.has_ground_truth(id)) {
            entry.ground_truth = store.get_ground_truth(id);
            entry.has_ground_truth = true;
        } else if (require_gt) {
            throw std::runtime_error("no cached ground truth for " + id +
                                     " (run `databudget groundtruth` first)");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

int cmd_budget_train(const GlobalOpts& g, const std::string& model_path,
                     const std::string& method, const std::string& mode_name, std::size_t m,
                     std::size_t curve_reps, std::size_t trees) {
    Store store(g.out);
    const auto entries = load_entries(store, g.seed, true);
    const FeatureMode mode = mode_name == "percent" ? FeatureMode::Percent : FeatureMode::Fixed;

    BenchmarkConfig cfg;
    cfg.pilot_m = m;
    cfg.varying = mode == FeatureMode::Percent;
    cfg.curve_reps = curve_reps;
    cfg.base_forest = forest_params(trees, 0);
    cfg.seed = g.seed;

    std::vector<CorpusEntry> corpus;
    std::vector<double> label_values;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& entry = entries[i];
        std::size_t pm = m;
        if (cfg.varying) {
            Rng rng(mix64(g.seed, 0x817e, i));
            pm = cfg.varying_min + rng.uniform_index(cfg.varying_max - cfg.varying_min + 1);
        }
        const PilotStudy pilot = draw_pilot(entry.split, pm, mix64(g.seed, 0x9107, i));
        CurveConfig cc;
        cc.repetitions = curve_reps;
        cc.grid = default_pilot_grid(pm);
        cc.seed = mix64(g.seed, 0xC07e, i);
        cc.forest = cfg.base_forest;
        CorpusEntry ce;
        ce.name = entry.name;
        ce.curve = pilot_curve(pilot, cc);
        ce.final_performance = entry.ground_truth.final_performance;
        ce.needed = entry.ground_truth.needed_amount;
        ce.needed_satisfied = entry.ground_truth.needed_satisfied;
        ce.m = pm;
        label_values.push_back(cfg.varying ? double(ce.needed) / double(pm)
                                           : double(ce.needed));
        corpus.push_back(std::move(ce));
        std::cout << "curve " << entry.name << " (m=" << pm << ")\n";
    }

    BinScheme scheme;
    try {
        scheme = make_quantile_bins(label_values, 5,
                                    cfg.varying ? BinMode::Ratio : BinMode::FixedCount);
    } catch (const std::exception&) {
        scheme = cfg.varying ? BinScheme{BinMode::Ratio, {0.5, 1.0, 2.0, 5.0, 100.0}}
                             : reference_bins();
    }

    MetaParams meta;
    meta.forest = forest_params(100, mix64(g.seed, 0x3e7a));
    const MetaKind kind = method == "learning-rf" ? MetaKind::Forest : MetaKind::Linear;
    const BudgetModel model = train_budget_model(corpus, kind, mode, scheme, meta);
    const std::string path =
        model_path.empty() ? store.models_dir() + "/budget_model.json" : model_path;
    save_model(model, path);
    std::cout << "wrote " << path << "\n";
    write_config_sidecar(path + ".config.json");
    return 0;
}

int cmd_budget_predict(const GlobalOpts& g, const std::string& model_path,
                       const std::string& pilot_csv, const std::string& label_column,
                       const std::string& methods_csv, std::size_t curve_reps,
                       std::size_t trees) {
    const TabularDataset pilot_ds = load_csv(pilot_csv, label_column);
    PilotStudy pilot;
    pilot.data = pilot_ds;
    pilot.m = pilot_ds.n_rows();
    pilot.seed = g.seed;
    if (pilot.m < kMinPilotSize) {
        throw std::runtime_error("pilot has fewer than " + std::to_string(kMinPilotSize) +
                                 " rows");
    }

    CurveConfig cc;
    cc.repetitions = curve_reps;
    cc.grid = default_pilot_grid(pilot.m);
    cc.seed = mix64(g.seed, 0xC07e);
    cc.forest = forest_params(trees, 0);
    const LearningCurve curve = pilot_curve(pilot, cc);

    json out = json::array();
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        json jr;
        if (tok == "powerlaw") {
            const PowerLawFit fit = fit_power_law(curve);
            const PowerLawNeeded needed = extrapolate_needed(fit);
            jr["method"] = "powerlaw";
            jr["b"] = fit.b;
            jr["c"] = fit.c;
            jr["rms_residual"] = fit.rms_residual;
            jr["final_prediction"] = extrapolate_final(fit);
            jr["needed_prediction"] = needed.amount;
            jr["needed_satisfied"] = needed.satisfied;
        } else if (tok == "learning-lr" || tok == "learning-rf") {
            if (model_path.empty()) {
                throw std::runtime_error("method " + tok + " needs --model <file>");
            }
            const BudgetModel model = load_model(model_path);
            const bool want_linear = tok == "learning-lr";
            if (want_linear != (model.kind == MetaKind::Linear)) {
                throw std::runtime_error("model file holds a " +
                                         std::string(model.kind == MetaKind::Linear
                                                         ? "learning-lr"
                                                         : "learning-rf") +
                                         " model, not " + tok);
            }
            if (model.mode == FeatureMode::Fixed &&
                model.feature_grid != default_pilot_grid(pilot.m)) {
                throw std::runtime_error(
                    "pilot size " + std::to_string(pilot.m) +
                    " does not match the fixed-mode grid this model was trained on");
            }
            const BudgetReport rep = predict_budget(model, curve);
            jr["method"] = rep.method;
            jr["final_prediction"] = rep.predicted_final;
            jr["needed_bin"] = rep.predicted_bin;
            jr["needed_interval"] = rep.bin_interval;
            jr["inputs"] = rep.inputs_summary;
        } else if (!tok.empty()) {
            throw std::runtime_error("unknown method: " + tok);
        } else {
            continue;
        }
        out.push_back(std::move(jr));
    }
    json doc;
    doc["format"] = "budget-report";
    doc["version"] = 1;
    doc["pilot"] = pilot_csv;
    doc["m"] = pilot.m;
    doc["config"] = g_effective_config;
    doc["reports"] = std::move(out);
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_benchmark(const GlobalOpts& g, const std::string& methods_csv, std::size_t m,
                  bool varying, std::size_t reps, std::size_t curve_reps, std::size_t gt_reps,
                  std::size_t trees, bool plots) {
    Store store(g.out);
    auto entries = load_entries(store, g.seed, false);

    BenchmarkConfig cfg;
    cfg.pilot_m = m;
    cfg.varying = varying;
    cfg.curve_reps = curve_reps;
    cfg.gt_reps = gt_reps;
    cfg.bootstrap_reps = reps;
    cfg.base_forest = forest_params(trees, 0);
    cfg.meta.forest = forest_params(100, 0);
    cfg.seed = g.seed;

    const auto methods = parse_methods(methods_csv);
    const EvalReport report = run_benchmark(entries, methods, cfg);

    for (const auto& s : report.methods) {
        std::cout << s.method << ": R2=";
        if (s.r2_defined) std::cout << s.r2;
        else std::cout << "undefined";
        std::cout << " Acc0=" << s.acc0 << " Acc1=" << s.acc1 << "\n";
    }

    const std::string base = store.reports_dir() + "/benchmark";
    {
        EvalReport with_cfg = report;
        save_report_json(with_cfg, base + ".json");
        // splice the effective config into the report document
        std::ifstream in(base + ".json");
        json doc = json::parse(in);
        in.close();
        doc["config"] = g_effective_config;
        std::ofstream out(base + ".json");
        out << doc.dump(2) << '\n';
    }
    save_records_csv(report, base + "_records.csv");

    if (plots) {
        // One-point prediction power across the curve.
        if (!varying) {
            PlotSeries s;
            s.label = "R2 of y=k*s_x+b";
            for (std::size_t x : default_pilot_grid(m)) {
                try {
                    s.x.push_back(double(x));
                    s.y.push_back(one_point_analysis(report.corpus, x));
                } catch (const std::exception&) {
                    s.x.pop_back();
                }
            }
            write_svg_plot(base + "_one_point.svg", "One-point prediction power", "x",
                           "in-sample R2", {s});
        }
        // Needed-amount logistic coefficients per bin.
        try {
            MetaParams meta;
            meta.forest = forest_params(100, 0);
            const BudgetModel lr = train_budget_model(
                report.corpus, MetaKind::Linear,
                varying ? FeatureMode::Percent : FeatureMode::Fixed, report.scheme, meta);
            const auto profile = coefficient_profile(lr);
            std::vector<PlotSeries> series;
            for (std::size_t cls = 0; cls < profile.size(); ++cls) {
                PlotSeries s;
                s.label = "bin " + std::to_string(cls);
                for (std::size_t i = 0; i < profile[cls].size(); ++i) {
                    s.x.push_back(double(i < lr.feature_grid.size() ? lr.feature_grid[i] : i));
                    s.y.push_back(profile[cls][i]);
                }
                series.push_back(std::move(s));
            }
            write_svg_plot(base + "_coefficients.svg", "Needed-amount model coefficients",
                           varying ? "percent" : "x", "coefficient", series);
        } catch (const std::exception& e) {
            std::cout << "coefficient plot skipped: " << e.what() << "\n";
        }
        // Balance vs error scatter, using mean predictions of the last method.
        {
            std::map<std::string, std::pair<double, std::size_t>> sums;
            const std::string mname = report.methods.back().method;
            for (const auto& rec : report.records) {
                if (rec.method == mname) {
                    sums[rec.dataset].first += rec.predicted_final;
                    sums[rec.dataset].second += 1;
                }
            }
            std::vector<double> preds;
            std::vector<CorpusEntry> covered;
            for (const auto& ce : report.corpus) {
                auto it = sums.find(ce.name);
                if (it == sums.end() || it->second.second == 0) continue;
                covered.push_back(ce);
                preds.push_back(it->second.first / double(it->second.second));
            }
            const BalanceAnalysis balance = balance_analysis(covered, preds);
            PlotSeries pts;
            pts.points_only = true;
            pts.label = mname;
            pts.x = balance.minority_ratio;
            pts.y = balance.abs_error;
            std::vector<PlotSeries> series{pts};
            if (balance.slope_defined) {
                double mx_lo = *std::min_element(pts.x.begin(), pts.x.end());
                double mx_hi = *std::max_element(pts.x.begin(), pts.x.end());
                double my = 0.0, mx = 0.0;
                for (std::size_t i = 0; i < pts.x.size(); ++i) {
                    mx += pts.x[i];
                    my += pts.y[i];
                }
                mx /= double(pts.x.size());
                my /= double(pts.y.size());
                PlotSeries trend;
                trend.label = "trend";
                trend.x = {mx_lo, mx_hi};
                trend.y = {my + balance.slope * (mx_lo - mx), my + balance.slope * (mx_hi - mx)};
                series.push_back(std::move(trend));
            }
            write_svg_plot(base + "_balance.svg", "Pilot balance vs prediction error",
                           "minority-label ratio", "|predicted - true|", series);
        }
        // Splitting-method comparison on a corpus subsample.
        if (!varying) {
            std::vector<PlotSeries> series(4);
            series[0].label = "single";
            series[1].label = "five-fold";
            series[2].label = "multiple";
            series[3].label = "full-test";
            const std::size_t n_cmp = std::min<std::size_t>(entries.size(), 8);
            for (std::size_t i = 0; i < n_cmp; ++i) {
                const PilotStudy pilot =
                    draw_pilot(entries[i].split, m, mix64(g.seed, 0x9107, i));
                const SplitComparison cmp = split_comparison(
                    pilot, entries[i].split, 0, std::min<std::size_t>(curve_reps, 50),
                    cfg.base_forest, mix64(g.seed, 0x3A, i));
                for (std::size_t mi = 0; mi < 4; ++mi) series[mi].x.push_back(double(mi + 1));
                series[0].y.push_back(cmp.err_single);
                series[1].y.push_back(cmp.err_five_fold);
                series[2].y.push_back(cmp.err_multiple);
                series[3].y.push_back(cmp.err_full_test);
                for (auto& s : series) s.points_only = true;
            }
            write_svg_plot(base + "_split_comparison.svg",
                           "Relative error of final-score estimate by splitting method",
                           "method (1=single 2=five-fold 3=multiple 4=full-test)", "error rate",
                           series);
        }
    }
    std::cout << "wrote " << base << ".json, " << base << "_records.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"databudget: pilot-study data budgeting toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand name

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
    app.add_option("--out", g.out, "output/store directory")->capture_default_str();
    app.add_option("--jobs", g.n_jobs, "worker threads")->capture_default_str();
    app.add_option("--config", g.config_path, "JSON config file (flags override its values)");

    // synth
    std::size_t synth_count = 20, synth_rows = 3000;
    auto* synth = app.add_subcommand("synth", "generate a graded synthetic corpus");
    synth->add_option("--count", synth_count, "number of datasets")->capture_default_str();
    synth->add_option("--rows", synth_rows, "rows per dataset")->capture_default_str();

    // ingest
    std::vector<std::string> ingest_paths;
    std::string ingest_label = "label";
    bool ingest_binarize = false;
    auto* ingest = app.add_subcommand("ingest", "load CSV datasets into the store");
    ingest->add_option("paths", ingest_paths, "CSV files")->required();
    ingest->add_option("--label", ingest_label, "label column name")->capture_default_str();
    ingest->add_flag("--binarize", ingest_binarize, "median-split continuous labels");

    // curve
    std::string curve_id, curve_compare;
    std::size_t curve_m = 100, curve_reps = 500, curve_trees = 100;
    auto* curve = app.add_subcommand("curve", "pilot learning curve CSV + SVG");
    curve->add_option("--dataset", curve_id, "stored dataset id")->required();
    curve->add_option("--m", curve_m, "pilot size")->capture_default_str();
    curve->add_option("--reps", curve_reps, "multiple-splitting repetitions R")
        ->capture_default_str();
    curve->add_option("--trees", curve_trees, "forest size")->capture_default_str();
    curve->add_option("--compare-reps", curve_compare, "comma list of R values to overlay");

    // groundtruth
    std::vector<std::string> gt_ids;
    std::size_t gt_reps = 5, gt_trees = 100;
    bool gt_force = false;
    auto* gt = app.add_subcommand("groundtruth", "compute and cache final performance / needed amount");
    gt->add_option("--datasets", gt_ids, "dataset ids (default: all)");
    gt->add_option("--reps", gt_reps, "repetitions per scan size")->capture_default_str();
    gt->add_option("--trees", gt_trees, "forest size")->capture_default_str();
    gt->add_flag("--force", gt_force, "recompute cached entries");

    // budget train/predict
    auto* bud = app.add_subcommand("budget", "train or apply budget models");
    bud->require_subcommand(1);
    std::string train_model_path, train_method = "learning-rf", train_mode = "fixed";
    std::size_t train_m = 50, train_curve_reps = 100, train_trees = 100;
    auto* btrain = bud->add_subcommand("train", "train a budget meta-model");
    btrain->add_option("--model", train_model_path, "output model file");
    btrain->add_option("--method", train_method, "learning-lr | learning-rf")
        ->capture_default_str();
    btrain->add_option("--mode", train_mode, "fixed | percent")->capture_default_str();
    btrain->add_option("--m", train_m, "pilot size (fixed mode)")->capture_default_str();
    btrain->add_option("--curve-reps", train_curve_reps, "R for pilot curves")
        ->capture_default_str();
    btrain->add_option("--trees", train_trees, "base forest size")->capture_default_str();

    std::string pred_model_path, pred_pilot, pred_label = "label",
                pred_methods = "powerlaw,learning-rf";
    std::size_t pred_curve_reps = 500, pred_trees = 100;
    auto* bpredict = bud->add_subcommand("predict", "budget prediction for a pilot CSV");
    bpredict->add_option("--model", pred_model_path, "trained model file");
    bpredict->add_option("--pilot", pred_pilot, "pilot CSV")->required();
    bpredict->add_option("--label", pred_label, "label column name")->capture_default_str();
    bpredict->add_option("--method", pred_methods, "comma list of methods")
        ->capture_default_str();
    bpredict->add_option("--curve-reps", pred_curve_reps, "R for the pilot curve")
        ->capture_default_str();
    bpredict->add_option("--trees", pred_trees, "forest size")->capture_default_str();

    // benchmark
    std::string bench_methods = "powerlaw,learning-lr,learning-rf";
    std::size_t bench_m = 50, bench_reps = 40, bench_curve_reps = 100, bench_gt_reps = 5,
                bench_trees = 100;
    bool bench_varying = false, bench_no_plots = false;
    auto* bench = app.add_subcommand("benchmark", "cluster-bootstrap method comparison");
    bench->add_option("--methods", bench_methods, "comma list")->capture_default_str();
    bench->add_option("--m", bench_m, "pilot size")->capture_default_str();
    bench->add_flag("--varying", bench_varying, "randomized pilot sizes, percent features");
    bench->add_option("--reps", bench_reps, "bootstrap repetitions")->capture_default_str();
    bench->add_option("--curve-reps", bench_curve_reps, "R for pilot curves")
        ->capture_default_str();
    bench->add_option("--gt-reps", bench_gt_reps, "R for uncached ground truths")
        ->capture_default_str();
    bench->add_option("--trees", bench_trees, "base forest size")->capture_default_str();
    bench->add_flag("--no-plots", bench_no_plots, "skip SVG emission");

    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
        a->fallthrough();
        for (CLI::App* sub : a->get_subcommands({})) enable_fallthrough(sub);
    };
    enable_fallthrough(&app);

    // Config file: load first, then let parsed flags override.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") g.config_path = argv[i + 1];
    }
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) {
            std::cerr << json{{"error", "cannot open config: " + g.config_path}}.dump() << "\n";
            return 2;
        }
        json cfg = json::parse(in, nullptr, false);
        if (cfg.is_discarded()) {
            std::cerr << json{{"error", "config is not valid JSON"}}.dump() << "\n";
            return 2;
        }
        apply_config_defaults(app, cfg);
        g_effective_config = cfg;
    }

    CLI11_PARSE(app, argc, argv);
    set_jobs(g.n_jobs);

    // Effective config, embedded in reports for provenance.
    note_config("seed", g.seed);
    note_config("out", g.out);
    note_config("jobs", g.n_jobs);
    for (const CLI::App* sub : app.get_subcommands()) note_config("command", sub->get_name());

    try {
        if (synth->parsed()) return cmd_synth(g, synth_count, synth_rows);
        if (ingest->parsed()) return cmd_ingest(g, ingest_paths, ingest_label, ingest_binarize);
        if (curve->parsed()) {
            note_config("m", curve_m);
            note_config("reps", curve_reps);
            return cmd_curve(g, sanitize_id(curve_id), curve_m, curve_reps, curve_trees,
                             curve_compare);
        }
        if (gt->parsed()) {
            note_config("reps", gt_reps);
            note_config("trees", gt_trees);
            return cmd_groundtruth(g, gt_ids, gt_reps, gt_trees, gt_force);
        }
        if (bud->parsed() && btrain->parsed()) {
            note_config("method", train_method);
            note_config("mode", train_mode);
            note_config("m", train_m);
            return cmd_budget_train(g, train_model_path, train_method, train_mode, train_m,
                                    train_curve_reps, train_trees);
        }
        if (bud->parsed() && bpredict->parsed()) {
            note_config("method", pred_methods);
            return cmd_budget_predict(g, pred_model_path, pred_pilot, pred_label, pred_methods,
                                      pred_curve_reps, pred_trees);
        }
        if (bench->parsed()) {
            note_config("methods", bench_methods);
            note_config("m", bench_m);
            note_config("varying", bench_varying);
            note_config("reps", bench_reps);
            note_config("curve_reps", bench_curve_reps);
            return cmd_benchmark(g, bench_methods, bench_m, bench_varying, bench_reps,
                                 bench_curve_reps, bench_gt_reps, bench_trees, !bench_no_plots);
        }
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
