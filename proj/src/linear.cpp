#include "budget/linear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace budget {
namespace {

// Gaussian elimination with partial pivoting on A|b, A is k x k row-major.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b, std::size_t k) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::fabs(A[r * k + col]) > std::fabs(A[pivot * k + col])) pivot = r;
        }
        if (std::fabs(A[pivot * k + col]) < 1e-12) {
            throw std::runtime_error("fit_linear_regression: degenerate system (rank deficient)");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(A[pivot * k + c], A[col * k + c]);
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < k; ++r) {
            const double factor = A[r * k + col] / A[col * k + col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < k; ++c) A[r * k + c] -= factor * A[col * k + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(k);
    for (std::size_t ri = k; ri-- > 0;) {
        double v = b[ri];
        for (std::size_t c = ri + 1; c < k; ++c) v -= A[ri * k + c] * x[c];
        x[ri] = v / A[ri * k + ri];
    }
    return x;
}

}  // namespace

std::vector<double> LinearModel::predict(const DataView& X) const {
    std::vector<double> out(X.n);
    for (std::size_t r = 0; r < X.n; ++r) out[r] = predict_one(X.data + r * X.d);
    return out;
}

int LogisticModel::predict_one(const double* x) const {
    int best = 0;
    double best_logit = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        double logit = biases[c];
        for (std::size_t i = 0; i < weights[c].size(); ++i) logit += weights[c][i] * x[i];
        if (c == 0 || logit > best_logit) {
            best = int(c);
            best_logit = logit;
        }
    }
    return best;
}

std::vector<int> LogisticModel::predict(const DataView& X) const {
    std::vector<int> out(X.n);
    for (std::size_t r = 0; r < X.n; ++r) out[r] = predict_one(X.data + r * X.d);
    return out;
}

LinearModel fit_linear_regression(const DataView& F, const std::vector<double>& y, double ridge) {
    if (F.n < 2) throw std::runtime_error("fit_linear_regression: need at least 2 rows");
    if (y.size() != F.n) throw std::runtime_error("fit_linear_regression: target length mismatch");
    if (ridge < 0.0) throw std::runtime_error("fit_linear_regression: negative ridge");

    const std::size_t k = F.d + 1;  // weights then bias
    std::vector<double> A(k * k, 0.0), rhs(k, 0.0);
    for (std::size_t r = 0; r < F.n; ++r) {
        const double* x = F.data + r * F.d;
        for (std::size_t i = 0; i < F.d; ++i) {
            for (std::size_t j = i; j < F.d; ++j) A[i * k + j] += x[i] * x[j];
            A[i * k + F.d] += x[i];
            rhs[i] += x[i] * y[r];
        }
        rhs[F.d] += y[r];
    }
    A[F.d * k + F.d] = double(F.n);
    for (std::size_t i = 0; i < F.d; ++i) {
        A[i * k + i] += ridge;
        A[F.d * k + i] = A[i * k + F.d];
        for (std::size_t j = i + 1; j < F.d; ++j) A[j * k + i] = A[i * k + j];
    }

    auto beta = solve_dense(std::move(A), std::move(rhs), k);
    LinearModel model;
    model.weights.assign(beta.begin(), beta.begin() + long(F.d));
    model.bias = beta[F.d];
    return model;
}

LogisticModel fit_logistic_regression(const DataView& F, const std::vector<int>& y, double l2,
                                      std::size_t iters, double step) {
    if (F.n == 0 || y.size() != F.n) throw std::runtime_error("fit_logistic_regression: bad input");
    int n_classes = 0;
    for (int label : y) n_classes = std::max(n_classes, label + 1);
    if (n_classes < 2) throw std::runtime_error("fit_logistic_regression: single class");

    const std::size_t C = std::size_t(n_classes);
    LogisticModel model;
    model.weights.assign(C, std::vector<double>(F.d, 0.0));
    model.biases.assign(C, 0.0);

    std::vector<double> logits(C), probs(C);
    std::vector<std::vector<double>> grad_w(C, std::vector<double>(F.d));
    std::vector<double> grad_b(C);
    const double inv_n = 1.0 / double(F.n);

    for (std::size_t it = 0; it < iters; ++it) {
        for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t r = 0; r < F.n; ++r) {
            const double* x = F.data + r * F.d;
            double max_logit = -1e300;
            for (std::size_t c = 0; c < C; ++c) {
                double v = model.biases[c];
                for (std::size_t i = 0; i < F.d; ++i) v += model.weights[c][i] * x[i];
                logits[c] = v;
                max_logit = std::max(max_logit, v);
            }
            double z = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                probs[c] = std::exp(logits[c] - max_logit);
                z += probs[c];
            }
            for (std::size_t c = 0; c < C; ++c) {
                const double delta = probs[c] / z - (int(c) == y[r] ? 1.0 : 0.0);
                for (std::size_t i = 0; i < F.d; ++i) grad_w[c][i] += delta * x[i];
                grad_b[c] += delta;
            }
        }
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < F.d; ++i) {
                model.weights[c][i] -=
                    step * (grad_w[c][i] * inv_n + l2 * model.weights[c][i]);
            }
            model.biases[c] -= step * grad_b[c] * inv_n;
        }
    }
    return model;
}

}  // namespace budget
