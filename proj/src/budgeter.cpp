#include "budget/budgeter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "budget/metrics.hpp"

namespace budget {
namespace {

using nlohmann::json;

std::string trim_number(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        return std::to_string(long(v));
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::vector<double> flatten_features(const std::vector<CorpusEntry>& corpus, FeatureMode mode,
                                     const std::vector<std::size_t>& selected,
                                     std::size_t& feature_len) {
    std::vector<double> out;
    feature_len = 0;
    for (const auto& entry : corpus) {
        FeatureVector fv = featurize(entry.curve, mode);
        std::vector<double> values;
        if (selected.empty()) {
            values = fv.values;
        } else {
            for (std::size_t idx : selected) {
                if (idx >= fv.values.size()) {
                    throw std::runtime_error("selected feature index out of range");
                }
                values.push_back(fv.values[idx]);
            }
        }
        if (feature_len == 0) feature_len = values.size();
        if (values.size() != feature_len) {
            throw std::runtime_error("train_budget_model: mixed feature lengths in corpus");
        }
        out.insert(out.end(), values.begin(), values.end());
    }
    return out;
}

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        json jn;
        jn["f"] = n.feature;
        jn["t"] = n.threshold;
        jn["l"] = n.left;
        jn["r"] = n.right;
        jn["v"] = n.value;
        jn["k"] = n.leaf_class;
        if (!n.counts.empty()) jn["c"] = n.counts;
        nodes.push_back(std::move(jn));
    }
    return nodes;
}

Tree tree_from_json(const json& jnodes) {
    Tree tree;
    for (const auto& jn : jnodes) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.value = jn.at("v").get<double>();
        n.leaf_class = jn.at("k").get<int>();
        if (jn.contains("c")) n.counts = jn.at("c").get<std::vector<int>>();
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

}  // namespace

double BinScheme::lower_of(std::size_t bin) const {
    if (bin == 0) return 0.0;
    return mode == BinMode::FixedCount ? upper[bin - 1] + 1.0 : upper[bin - 1];
}

std::string BinScheme::interval_text(std::size_t bin) const {
    std::ostringstream out;
    if (mode == BinMode::FixedCount) {
        out << '[' << trim_number(lower_of(bin)) << ',' << trim_number(upper[bin]) << ']';
    } else {
        out << (bin == 0 ? '[' : '(') << trim_number(lower_of(bin)) << ','
            << trim_number(upper[bin]) << ']';
    }
    if (bin + 1 == upper.size()) out << '+';
    return out.str();
}

BinScheme reference_bins() {
    BinScheme scheme;
    scheme.mode = BinMode::FixedCount;
    scheme.upper = {104.0, 227.0, 430.0, 805.0, 2000.0};
    return scheme;
}

int assign_bin(double needed, const BinScheme& scheme) {
    if (needed < 0.0) throw std::runtime_error("assign_bin: negative value");
    for (std::size_t i = 0; i + 1 < scheme.upper.size(); ++i) {
        if (needed <= scheme.upper[i]) return int(i);
    }
    return int(scheme.upper.size()) - 1;
}

BinScheme make_quantile_bins(std::vector<double> values, std::size_t k, BinMode mode) {
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < k) {
        throw std::runtime_error("make_quantile_bins: fewer than k distinct values");
    }
    std::sort(values.begin(), values.end());
    BinScheme scheme;
    scheme.mode = mode;
    const std::size_t n = values.size();
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t cut = (n * i + k - 1) / k;  // ceil(n*i/k)
        scheme.upper.push_back(values[cut - 1]);
    }
    for (std::size_t i = 1; i < scheme.upper.size(); ++i) {
        if (scheme.upper[i] <= scheme.upper[i - 1]) {
            throw std::runtime_error("make_quantile_bins: repeated quantile edges");
        }
    }
    return scheme;
}

std::vector<std::size_t> percent_grid() {
    std::vector<std::size_t> grid;
    for (std::size_t p = 10; p <= 90; p += 5) grid.push_back(p);
    return grid;
}

FeatureVector featurize(const LearningCurve& curve, FeatureMode mode) {
    FeatureVector fv;
    fv.mode = mode;
    if (mode == FeatureMode::Fixed) {
        for (std::size_t x : default_pilot_grid(curve.m)) {
            fv.values.push_back(curve.value_at(x));  // throws on a grid gap
        }
    } else {
        for (std::size_t p : percent_grid()) {
            const std::size_t x = p * curve.m / 100;  // floor(x% * m)
            fv.values.push_back(curve.value_at(x));
        }
        fv.values.push_back(double(curve.m));
    }
    return fv;
}

int needed_label(const CorpusEntry& entry, const BinScheme& scheme, FeatureMode mode) {
    if (mode == FeatureMode::Percent) {
        return assign_bin(double(entry.needed) / double(entry.m), scheme);
    }
    return assign_bin(double(entry.needed), scheme);
}

BudgetModel train_budget_model(const std::vector<CorpusEntry>& corpus, MetaKind kind,
                               FeatureMode mode, const BinScheme& scheme,
                               const MetaParams& params) {
    return train_budget_model(corpus, kind, mode, scheme, {}, params);
}

BudgetModel train_budget_model(const std::vector<CorpusEntry>& corpus, MetaKind kind,
                               FeatureMode mode, const BinScheme& scheme,
                               const std::vector<std::size_t>& selected,
                               const MetaParams& params) {
    if (corpus.size() < 10) throw std::runtime_error("train_budget_model: need >= 10 entries");
    if (mode == FeatureMode::Percent && scheme.mode != BinMode::Ratio) {
        throw std::runtime_error("train_budget_model: percent mode needs a ratio bin scheme");
    }
    if (mode == FeatureMode::Fixed) {
        for (const auto& entry : corpus) {
            if (entry.m != corpus.front().m) {
                throw std::runtime_error("train_budget_model: mixed pilot sizes in fixed mode");
            }
        }
    }

    BudgetModel model;
    model.kind = kind;
    model.mode = mode;
    model.scheme = scheme;
    model.selected = selected;
    model.feature_grid = mode == FeatureMode::Fixed ? default_pilot_grid(corpus.front().m)
                                                    : percent_grid();

    std::vector<double> F = flatten_features(corpus, mode, selected, model.feature_len);
    const DataView X{F.data(), corpus.size(), model.feature_len};

    std::vector<double> finals;
    std::vector<int> bins;
    for (const auto& entry : corpus) {
        finals.push_back(entry.final_performance);
        bins.push_back(needed_label(entry, scheme, mode));
    }

    if (kind == MetaKind::Linear) {
        model.final_linear = fit_linear_regression(X, finals, params.ridge);
        bool one_class = std::all_of(bins.begin(), bins.end(),
                                     [&](int b) { return b == bins.front(); });
        if (one_class) {
            // Degenerate corpus: constant-bin classifier via biases only.
            model.needed_logistic.weights.assign(scheme.n_bins(),
                                                 std::vector<double>(model.feature_len, 0.0));
            model.needed_logistic.biases.assign(scheme.n_bins(), 0.0);
            model.needed_logistic.biases[std::size_t(bins.front())] = 1.0;
        } else {
            auto logistic = fit_logistic_regression(X, bins, params.logistic_l2,
                                                    params.logistic_iters);
            // Pad to the full bin count so every class has a row.
            model.needed_logistic.weights.assign(scheme.n_bins(),
                                                 std::vector<double>(model.feature_len, 0.0));
            model.needed_logistic.biases.assign(scheme.n_bins(), 0.0);
            for (std::size_t c = 0; c < logistic.weights.size(); ++c) {
                model.needed_logistic.weights[c] = logistic.weights[c];
                model.needed_logistic.biases[c] = logistic.biases[c];
            }
        }
    } else {
        model.final_forest = ForestRegressor::train(X, finals, params.forest);
        model.needed_forest = ForestModel::train(X, bins, int(scheme.n_bins()), params.forest);
    }
    return model;
}

static std::vector<double> features_for_predict(const BudgetModel& model,
                                                const LearningCurve& curve) {
    FeatureVector fv = featurize(curve, model.mode);
    std::vector<double> values;
    if (model.selected.empty()) {
        values = fv.values;
    } else {
        for (std::size_t idx : model.selected) values.push_back(fv.values.at(idx));
    }
    if (values.size() != model.feature_len) {
        throw std::runtime_error("predict_budget: feature mode/length mismatch");
    }
    return values;
}

double predict_final_value(const BudgetModel& model, const LearningCurve& curve) {
    auto values = features_for_predict(model, curve);
    double raw;
    if (model.kind == MetaKind::Linear) {
        raw = model.final_linear.predict_one(values.data());
    } else {
        const DataView X{values.data(), 1, values.size()};
        raw = model.final_forest.predict_one(X, 0);
    }
    return std::clamp(raw, 0.0, 1.0);
}

int predict_needed_bin(const BudgetModel& model, const LearningCurve& curve) {
    auto values = features_for_predict(model, curve);
    if (model.kind == MetaKind::Linear) {
        return model.needed_logistic.predict_one(values.data());
    }
    const DataView X{values.data(), 1, values.size()};
    return model.needed_forest.predict_one(X, 0);
}

BudgetReport predict_budget(const BudgetModel& model, const LearningCurve& curve) {
    BudgetReport report;
    report.method = model.kind == MetaKind::Linear ? "learning-LR" : "learning-RF";
    report.predicted_final = predict_final_value(model, curve);
    report.predicted_bin = predict_needed_bin(model, curve);
    report.bin_interval = model.scheme.interval_text(std::size_t(report.predicted_bin));
    std::ostringstream summary;
    summary << "m=" << curve.m << " grid=[" << curve.grid.front() << ".." << curve.grid.back()
            << "] points=" << curve.grid.size();
    report.inputs_summary = summary.str();
    return report;
}

double one_point_analysis(const std::vector<CorpusEntry>& corpus, std::size_t x) {
    if (corpus.size() < 2) throw std::runtime_error("one_point_analysis: need >= 2 entries");
    std::vector<double> F, y;
    for (const auto& entry : corpus) {
        F.push_back(entry.curve.value_at(x));
        y.push_back(entry.final_performance);
    }
    const DataView X{F.data(), F.size(), 1};
    LinearModel model = fit_linear_regression(X, y, 1e-9);
    return r2_score(y, model.predict(X));
}

std::vector<std::size_t> select_top_coefficients(const BudgetModel& model, std::size_t k) {
    if (model.kind != MetaKind::Linear) {
        throw std::runtime_error("select_top_coefficients: linear final model required");
    }
    const auto& w = model.final_linear.weights;
    if (k > w.size()) throw std::runtime_error("select_top_coefficients: k exceeds feature count");
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(w[a]) > std::fabs(w[b]);
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::vector<double>> coefficient_profile(const BudgetModel& model) {
    if (model.kind != MetaKind::Linear) {
        throw std::runtime_error("coefficient_profile: logistic needed model required");
    }
    return model.needed_logistic.weights;
}

void save_model(const BudgetModel& model, const std::string& path) {
    json doc;
    doc["format"] = "budget-model";
    doc["version"] = 1;
    doc["kind"] = model.kind == MetaKind::Linear ? "linear" : "forest";
    doc["mode"] = model.mode == FeatureMode::Fixed ? "fixed" : "percent";
    doc["scheme"]["mode"] =
        model.scheme.mode == BinMode::FixedCount ? "fixed-count" : "ratio";
    doc["scheme"]["upper"] = model.scheme.upper;
    doc["feature_len"] = model.feature_len;
    doc["feature_grid"] = model.feature_grid;
    doc["selected"] = model.selected;
    if (model.kind == MetaKind::Linear) {
        doc["final_linear"]["weights"] = model.final_linear.weights;
        doc["final_linear"]["bias"] = model.final_linear.bias;
        doc["needed_logistic"]["weights"] = model.needed_logistic.weights;
        doc["needed_logistic"]["biases"] = model.needed_logistic.biases;
    } else {
        json ftrees = json::array();
        for (const auto& tree : model.final_forest.trees()) ftrees.push_back(tree_to_json(tree));
        doc["final_forest"]["trees"] = std::move(ftrees);
        doc["final_forest"]["d"] = model.final_forest.n_features();
        json ntrees = json::array();
        for (const auto& tree : model.needed_forest.trees()) ntrees.push_back(tree_to_json(tree));
        doc["needed_forest"]["trees"] = std::move(ntrees);
        doc["needed_forest"]["d"] = model.needed_forest.n_features();
        doc["needed_forest"]["classes"] = model.needed_forest.n_classes();
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
}

BudgetModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json doc = json::parse(in);
    if (doc.value("format", "") != "budget-model" || doc.value("version", 0) != 1) {
        throw std::runtime_error("unrecognized model file format: " + path);
    }
    BudgetModel model;
    model.kind = doc.at("kind").get<std::string>() == "linear" ? MetaKind::Linear
                                                               : MetaKind::Forest;
    model.mode = doc.at("mode").get<std::string>() == "fixed" ? FeatureMode::Fixed
                                                              : FeatureMode::Percent;
    model.scheme.mode = doc.at("scheme").at("mode").get<std::string>() == "fixed-count"
                            ? BinMode::FixedCount
                            : BinMode::Ratio;
    model.scheme.upper = doc.at("scheme").at("upper").get<std::vector<double>>();
    model.feature_len = doc.at("feature_len").get<std::size_t>();
    model.feature_grid = doc.at("feature_grid").get<std::vector<std::size_t>>();
    model.selected = doc.at("selected").get<std::vector<std::size_t>>();
    if (model.kind == MetaKind::Linear) {
        model.final_linear.weights =
            doc.at("final_linear").at("weights").get<std::vector<double>>();
        model.final_linear.bias = doc.at("final_linear").at("bias").get<double>();
        model.needed_logistic.weights =
            doc.at("needed_logistic").at("weights").get<std::vector<std::vector<double>>>();
        model.needed_logistic.biases =
            doc.at("needed_logistic").at("biases").get<std::vector<double>>();
    } else {
        model.final_forest = ForestRegressor::deserialize(
            doc.at("final_forest").at("d").get<std::size_t>(), [&] {
                std::vector<Tree> trees;
                for (const auto& jt : doc.at("final_forest").at("trees")) {
                    trees.push_back(tree_from_json(jt));
                }
                return trees;
            }());
        model.needed_forest = ForestModel::deserialize(
            doc.at("needed_forest").at("d").get<std::size_t>(),
            doc.at("needed_forest").at("classes").get<int>(), [&] {
                std::vector<Tree> trees;
                for (const auto& jt : doc.at("needed_forest").at("trees")) {
                    trees.push_back(tree_from_json(jt));
                }
                return trees;
            }());
    }
    return model;
}

}  // namespace budget
