#include "budget/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "budget/metrics.hpp"
#include "budget/rng.hpp"

namespace budget {
namespace {

using nlohmann::json;

struct Block {
    std::size_t a = 0, b = 0, len = 0;
};

// difflib-style longest contiguous matching block on a[alo,ahi) x b[blo,bhi);
// ties resolve to the earliest positions.
Block longest_match(const std::string& a, const std::string& b, std::size_t alo, std::size_t ahi,
                    std::size_t blo, std::size_t bhi,
                    const std::map<char, std::vector<std::size_t>>& b_positions) {
    Block best{alo, blo, 0};
    std::map<std::size_t, std::size_t> run;  // j -> run length ending at (i, j)
    for (std::size_t i = alo; i < ahi; ++i) {
        std::map<std::size_t, std::size_t> next;
        auto it = b_positions.find(a[i]);
        if (it != b_positions.end()) {
            for (std::size_t j : it->second) {
                if (j < blo) continue;
                if (j >= bhi) break;
                std::size_t k = 1;
                if (j > blo) {
                    auto prev = run.find(j - 1);
                    if (prev != run.end()) k = prev->second + 1;
                }
                next[j] = k;
                if (k > best.len) best = Block{i - k + 1, j - k + 1, k};
            }
        }
        run.swap(next);
    }
    return best;
}

std::size_t matched_chars(const std::string& a, const std::string& b, std::size_t alo,
                          std::size_t ahi, std::size_t blo, std::size_t bhi,
                          const std::map<char, std::vector<std::size_t>>& b_positions) {
    if (alo >= ahi || blo >= bhi) return 0;
    const Block block = longest_match(a, b, alo, ahi, blo, bhi, b_positions);
    if (block.len == 0) return 0;
    return block.len + matched_chars(a, b, alo, block.a, blo, block.b, b_positions) +
           matched_chars(a, b, block.a + block.len, ahi, block.b + block.len, bhi, b_positions);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

}  // namespace

double name_similarity(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty()) throw std::runtime_error("name_similarity: empty string");
    std::map<char, std::vector<std::size_t>> b_positions;
    for (std::size_t j = 0; j < b.size(); ++j) b_positions[b[j]].push_back(j);
    const std::size_t m = matched_chars(a, b, 0, a.size(), 0, b.size(), b_positions);
    return 2.0 * double(m) / double(a.size() + b.size());
}

NameClusterIndex cluster_datasets(const std::vector<std::string>& names, std::size_t k) {
    const std::size_t n = names.size();
    if (n < k) throw std::runtime_error("cluster_datasets: fewer names than clusters");
    if (k < 1) throw std::runtime_error("cluster_datasets: k must be >= 1");

    NameClusterIndex index;
    index.names = names;
    index.similarity.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        index.similarity[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = name_similarity(names[i], names[j]);
            index.similarity[i * n + j] = s;
            index.similarity[j * n + i] = s;
        }
    }

    // Active clusters keyed by smallest member; average-linkage distances.
    struct Cluster {
        std::vector<std::size_t> members;
    };
    std::map<std::size_t, Cluster> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[i] = Cluster{{i}};
    std::map<std::pair<std::size_t, std::size_t>, double> dist;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[{i, j}] = 1.0 - index.similarity[i * n + j];
        }
    }

    while (clusters.size() > k) {
        std::pair<std::size_t, std::size_t> best{0, 0};
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& [key, d] : dist) {  // map order = smallest-index tie-break
            if (d < best_d) {
                best_d = d;
                best = key;
            }
        }
        auto& keep = clusters[best.first];
        auto& gone = clusters[best.second];
        const double size_keep = double(keep.members.size());
        const double size_gone = double(gone.members.size());
        for (auto& [key, cluster] : clusters) {
            if (key == best.first || key == best.second) continue;
            auto edge = [&](std::size_t a, std::size_t b) {
                return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
            };
            const double d1 = dist[edge(key, best.first)];
            const double d2 = dist[edge(key, best.second)];
            dist[edge(key, best.first)] =
                (size_keep * d1 + size_gone * d2) / (size_keep + size_gone);
            dist.erase(edge(key, best.second));
        }
        keep.members.insert(keep.members.end(), gone.members.begin(), gone.members.end());
        std::sort(keep.members.begin(), keep.members.end());
        dist.erase(best);
        clusters.erase(best.second);
    }

    index.n_clusters = clusters.size();
    index.cluster_of.assign(n, -1);
    int id = 0;
    for (const auto& [key, cluster] : clusters) {  // ascending smallest member
        for (std::size_t member : cluster.members) index.cluster_of[member] = id;
        ++id;
    }
    return index;
}

SplitPlan bootstrap_split(const NameClusterIndex& index, double train_frac, std::size_t reps,
                          std::uint64_t seed) {
    const std::size_t k = index.n_clusters;
    if (k < 2) throw std::runtime_error("bootstrap_split: need at least 2 clusters");
    std::size_t n_train = std::size_t(std::floor(train_frac * double(k)));
    n_train = std::min(std::max<std::size_t>(n_train, 1), k - 1);

    SplitPlan plan;
    plan.seed = seed;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(mix64(seed, 0xB007, rep));
        std::vector<int> ids(k);
        for (std::size_t i = 0; i < k; ++i) ids[i] = int(i);
        rng.shuffle(ids);
        SplitPlan::Repetition r;
        r.train_clusters.assign(ids.begin(), ids.begin() + long(n_train));
        r.test_clusters.assign(ids.begin() + long(n_train), ids.end());
        std::sort(r.train_clusters.begin(), r.train_clusters.end());
        std::sort(r.test_clusters.begin(), r.test_clusters.end());
        plan.repetitions.push_back(std::move(r));
    }
    return plan;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Powerlaw: return "powerlaw";
        case Method::LearningLR: return "learning-LR";
        case Method::LearningRF: return "learning-RF";
    }
    return "?";
}

EvalReport run_benchmark(std::vector<BenchmarkEntry> entries, const std::vector<Method>& methods,
                         const BenchmarkConfig& config) {
    if (entries.size() < 2) throw std::runtime_error("run_benchmark: need at least 2 datasets");

    // Ground truths (cached entries are reused as-is).
    for (auto& entry : entries) {
        if (!entry.has_ground_truth) {
            entry.ground_truth = compute_ground_truth(
                entry.split, default_needed_grid(entry.split.train.n_rows()), config.gt_reps,
                config.base_forest, mix64(config.seed, 0x67), config.threshold);
            entry.has_ground_truth = true;
        }
    }

    const FeatureMode mode = config.varying ? FeatureMode::Percent : FeatureMode::Fixed;

    // Pilot + curve, once per dataset per run.
    std::vector<CorpusEntry> corpus(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& entry = entries[i];
        std::size_t m = config.pilot_m;
        if (config.varying) {
            Rng rng(mix64(config.seed, 0x817e, i));
            m = config.varying_min +
                rng.uniform_index(config.varying_max - config.varying_min + 1);
        }
        const PilotStudy pilot = draw_pilot(entry.split, m, mix64(config.seed, 0x9107, i));

        CurveConfig cc;
        cc.repetitions = config.curve_reps;
        cc.grid = default_pilot_grid(m);
        cc.seed = mix64(config.seed, 0xC07e, i);
        cc.forest = config.base_forest;

        CorpusEntry ce;
        ce.name = entry.name;
        ce.curve = pilot_curve(pilot, cc);
        ce.final_performance = entry.ground_truth.final_performance;
        ce.needed = entry.ground_truth.needed_amount;
        ce.needed_satisfied = entry.ground_truth.needed_satisfied;
        ce.m = m;
        std::map<int, std::size_t> counts;
        for (int label : pilot.data.labels) counts[label]++;
        std::size_t least = pilot.m;
        for (const auto& [label, count] : counts) least = std::min(least, count);
        ce.pilot_minority_ratio = double(least) / double(pilot.m);
        corpus[i] = std::move(ce);
    }

    // Bin scheme from the whole corpus (the reference edges stand in when
    // the needed values are too concentrated for quantiles).
    BinScheme scheme;
    {
        std::vector<double> label_values;
        for (const auto& ce : corpus) {
            label_values.push_back(config.varying ? double(ce.needed) / double(ce.m)
                                                  : double(ce.needed));
        }
        try {
            scheme = make_quantile_bins(label_values, 5,
                                        config.varying ? BinMode::Ratio : BinMode::FixedCount);
        } catch (const std::exception&) {
            if (config.varying) {
                scheme.mode = BinMode::Ratio;
                scheme.upper = {0.5, 1.0, 2.0, 5.0, 100.0};
            } else {
                scheme = reference_bins();
            }
        }
    }

    std::vector<std::string> names;
    for (const auto& entry : entries) names.push_back(entry.name);
    std::size_t k = config.clusters;
    if (k == 0) k = std::min<std::size_t>(100, std::max<std::size_t>(2, names.size() / 2));
    const NameClusterIndex index = cluster_datasets(names, k);
    const SplitPlan plan =
        bootstrap_split(index, config.train_frac, config.bootstrap_reps, config.seed);

    EvalReport report;
    report.corpus = corpus;
    report.scheme = scheme;
    report.n_clusters = index.n_clusters;
    report.repetitions = plan.repetitions.size();
    report.seed = config.seed;
    report.varying = config.varying;

    struct Accumulator {
        std::vector<double> r2, acc0, acc1;
    };
    std::map<std::string, Accumulator> acc;

    for (std::size_t rep = 0; rep < plan.repetitions.size(); ++rep) {
        const auto& r = plan.repetitions[rep];
        std::set<int> train_set(r.train_clusters.begin(), r.train_clusters.end());
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            (train_set.count(index.cluster_of[i]) ? train_idx : test_idx).push_back(i);
        }
        if (test_idx.empty()) continue;

        std::vector<CorpusEntry> train_corpus;
        for (std::size_t i : train_idx) train_corpus.push_back(corpus[i]);

        for (Method method : methods) {
            const std::string mname = method_name(method);
            std::vector<double> true_final, pred_final;
            std::vector<int> true_bin, pred_bin;

            if (method == Method::Powerlaw) {
                for (std::size_t i : test_idx) {
                    const auto& ce = corpus[i];
                    double fin;
                    std::size_t amount;
                    try {
                        const PowerLawFit fit = fit_power_law(ce.curve);
                        fin = extrapolate_final(fit);
                        amount = extrapolate_needed(fit, config.threshold).amount;
                    } catch (const std::exception&) {
                        // Near-saturated curve with too few points below the
                        // ceiling to fit: read the predictions off the
                        // observed curve instead of aborting the whole run.
                        fin = std::clamp(ce.curve.s.back(), 0.0, 1.0);
                        amount = ce.curve.grid.back();
                        for (std::size_t p = 0; p < ce.curve.grid.size(); ++p) {
                            if (ce.curve.s[p] > config.threshold * fin) {
                                amount = ce.curve.grid[p];
                                break;
                            }
                        }
                    }
                    pred_final.push_back(fin);
                    const double label =
                        config.varying ? double(amount) / double(ce.m) : double(amount);
                    pred_bin.push_back(assign_bin(label, scheme));
                }
            } else {
                if (train_corpus.size() < 10) {
                    throw std::runtime_error(
                        "run_benchmark: learning method needs >= 10 training datasets");
                }
                MetaParams meta = config.meta;
                meta.forest.seed = mix64(config.seed, 0x3e7a, rep);
                const MetaKind kind =
                    method == Method::LearningLR ? MetaKind::Linear : MetaKind::Forest;
                const BudgetModel model =
                    train_budget_model(train_corpus, kind, mode, scheme, meta);
                for (std::size_t i : test_idx) {
                    pred_final.push_back(predict_final_value(model, corpus[i].curve));
                    pred_bin.push_back(predict_needed_bin(model, corpus[i].curve));
                }
            }

            for (std::size_t t = 0; t < test_idx.size(); ++t) {
                const auto& ce = corpus[test_idx[t]];
                true_final.push_back(ce.final_performance);
                true_bin.push_back(needed_label(ce, scheme, mode));
                PredictionRecord rec;
                rec.repetition = rep;
                rec.method = mname;
                rec.dataset = ce.name;
                rec.true_final = ce.final_performance;
                rec.predicted_final = pred_final[t];
                rec.true_bin = true_bin.back();
                rec.predicted_bin = pred_bin[t];
                report.records.push_back(std::move(rec));
            }

            auto& a = acc[mname];
            if (true_final.size() >= 2) {
                // Zero target variance makes R2 meaningless for this
                // repetition; leave it out and report undefined if no
                // repetition contributes.
                const double mean = mean_of(true_final);
                double ss_tot = 0.0;
                for (double v : true_final) ss_tot += (v - mean) * (v - mean);
                // Scale-aware zero test: rounding in the mean alone leaves
                // ~eps^2-sized residuals even for identical targets.
                const double floor_tot =
                    1e-18 * std::max(1.0, mean * mean) * double(true_final.size());
                if (ss_tot > floor_tot) {
                    const double r2 = r2_score(true_final, pred_final);
                    if (std::isfinite(r2)) a.r2.push_back(r2);
                }
            }
            const auto [acc0, acc1] = acc_metrics(true_bin, pred_bin);
            a.acc0.push_back(acc0);
            a.acc1.push_back(acc1);
        }
    }

    for (Method method : methods) {
        const std::string mname = method_name(method);
        const auto& a = acc[mname];
        MethodScores scores;
        scores.method = mname;
        scores.r2_defined = !a.r2.empty();
        scores.r2 = scores.r2_defined ? mean_of(a.r2) : 0.0;
        scores.acc0 = mean_of(a.acc0);
        scores.acc1 = mean_of(a.acc1);
        report.methods.push_back(std::move(scores));
    }
    return report;
}

BalanceAnalysis balance_analysis(const std::vector<CorpusEntry>& corpus,
                                 const std::vector<double>& predicted_finals) {
    if (corpus.size() != predicted_finals.size()) {
        throw std::runtime_error("balance_analysis: prediction count mismatch");
    }
    BalanceAnalysis out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        out.names.push_back(corpus[i].name);
        out.minority_ratio.push_back(corpus[i].pilot_minority_ratio);
        out.abs_error.push_back(std::fabs(predicted_finals[i] - corpus[i].final_performance));
    }
    if (corpus.size() >= 2) {
        const double mx = mean_of(out.minority_ratio);
        const double my = mean_of(out.abs_error);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            sxx += (out.minority_ratio[i] - mx) * (out.minority_ratio[i] - mx);
            sxy += (out.minority_ratio[i] - mx) * (out.abs_error[i] - my);
        }
        if (sxx > 0.0) {
            out.slope = sxy / sxx;
            out.slope_defined = true;
        }
    }
    return out;
}

void save_report_json(const EvalReport& report, const std::string& path) {
    json doc;
    doc["format"] = "eval-report";
    doc["version"] = 1;
    doc["seed"] = report.seed;
    doc["clusters"] = report.n_clusters;
    doc["repetitions"] = report.repetitions;
    doc["varying"] = report.varying;
    doc["bin_scheme"]["mode"] =
        report.scheme.mode == BinMode::FixedCount ? "fixed-count" : "ratio";
    doc["bin_scheme"]["upper"] = report.scheme.upper;
    doc["methods"] = json::array();
    for (const auto& m : report.methods) {
        json jm;
        jm["method"] = m.method;
        if (m.r2_defined) jm["r2"] = m.r2;
        else jm["r2"] = nullptr;
        jm["acc0"] = m.acc0;
        jm["acc1"] = m.acc1;
        doc["methods"].push_back(std::move(jm));
    }
    doc["datasets"] = json::array();
    for (const auto& ce : report.corpus) {
        json jd;
        jd["name"] = ce.name;
        jd["m"] = ce.m;
        jd["final_performance"] = ce.final_performance;
        jd["needed_amount"] = ce.needed;
        jd["needed_satisfied"] = ce.needed_satisfied;
        jd["pilot_minority_ratio"] = ce.pilot_minority_ratio;
        doc["datasets"].push_back(std::move(jd));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << doc.dump(2) << '\n';
}

void save_records_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write records: " + path);
    out << "repetition,method,dataset,true_final,predicted_final,true_bin,predicted_bin\n";
    char buf[64];
    for (const auto& r : report.records) {
        out << r.repetition << ',' << r.method << ',' << r.dataset << ',';
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", r.true_final, r.predicted_final);
        out << buf << r.true_bin << ',' << r.predicted_bin << '\n';
    }
}

}  // namespace budget
