#pragma once

#include <utility>
#include <vector>

namespace budget {

struct MetricVector {
    double accuracy = 0.0;
    double f1_macro = 0.0;
    double recall_macro = 0.0;
    double precision_macro = 0.0;

    // Elementwise strict dominance, the vector ordering used by the
    // needed-amount scan.
    bool dominates(const MetricVector& other) const {
        return accuracy > other.accuracy && f1_macro > other.f1_macro &&
               recall_macro > other.recall_macro && precision_macro > other.precision_macro;
    }
    MetricVector scaled(double k) const {
        return {accuracy * k, f1_macro * k, recall_macro * k, precision_macro * k};
    }
};

// Accuracy plus macro P/R/F1 over the union of classes present in either
// vector; zero-denominator terms contribute 0.
MetricVector metric_vector(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// 1 - SS_res/SS_tot. Zero target variance: 1.0 when residuals are zero,
// -inf otherwise (callers report it as undefined).
double r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// (exact-bin accuracy, adjacent-bin rate): fractions with |pred - true| == 0
// and == 1 respectively.
std::pair<double, double> acc_metrics(const std::vector<int>& true_bins,
                                      const std::vector<int>& pred_bins);

}  // namespace budget
