#pragma once

#include <cstddef>
#include <vector>

#include "budget/forest.hpp"

namespace budget {

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;

    double predict_one(const double* x) const {
        double v = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) v += weights[i] * x[i];
        return v;
    }
    std::vector<double> predict(const DataView& X) const;
};

// Multinomial logistic model: one weight vector and bias per class.
struct LogisticModel {
    std::vector<std::vector<double>> weights;  // C x d
    std::vector<double> biases;                // C

    int predict_one(const double* x) const;
    std::vector<int> predict(const DataView& X) const;
};

// Exact solve of the ridge-regularized normal equations, bias unpenalized.
// ridge = 0 on a rank-deficient system throws.
LinearModel fit_linear_regression(const DataView& F, const std::vector<double>& y, double ridge);

// Multinomial maximum likelihood with L2 penalty, deterministic full-batch
// gradient descent from zero initialization.
LogisticModel fit_logistic_regression(const DataView& F, const std::vector<int>& y, double l2,
                                      std::size_t iters, double step = 0.1);

}  // namespace budget
