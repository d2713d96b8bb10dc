#include "budget/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace budget {

MetricVector metric_vector(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw std::runtime_error("metric_vector: length mismatch");
    if (y_true.empty()) throw std::runtime_error("metric_vector: empty input");

    std::set<int> classes(y_true.begin(), y_true.end());
    classes.insert(y_pred.begin(), y_pred.end());

    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (int c : classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == c, p = y_pred[i] == c;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        const double precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    const double k = double(classes.size());
    MetricVector m;
    m.accuracy = double(correct) / double(y_true.size());
    m.precision_macro = precision_sum / k;
    m.recall_macro = recall_sum / k;
    m.f1_macro = f1_sum / k;
    return m;
}

double r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) throw std::runtime_error("r2_score: length mismatch");
    if (y_true.size() < 2) throw std::runtime_error("r2_score: need at least 2 values");

    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= double(y_true.size());

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    }
    if (ss_tot == 0.0) {
        return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - ss_res / ss_tot;
}

std::pair<double, double> acc_metrics(const std::vector<int>& true_bins,
                                      const std::vector<int>& pred_bins) {
    if (true_bins.size() != pred_bins.size()) throw std::runtime_error("acc_metrics: length mismatch");
    if (true_bins.empty()) throw std::runtime_error("acc_metrics: empty input");
    std::size_t exact = 0, adjacent = 0;
    for (std::size_t i = 0; i < true_bins.size(); ++i) {
        const int gap = std::abs(true_bins[i] - pred_bins[i]);
        exact += gap == 0;
        adjacent += gap == 1;
    }
    return {double(exact) / double(true_bins.size()), double(adjacent) / double(true_bins.size())};
}

}  // namespace budget
