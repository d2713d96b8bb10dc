#include "budget/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace budget {
namespace {

constexpr double kSaturationEps = 1e-6;
constexpr std::size_t kRefineIters = 200;

double squared_loss(const LearningCurve& curve, double b, double c) {
    double loss = 0.0;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const double r = 1.0 - b * std::pow(double(curve.grid[i]), c) - curve.s[i];
        loss += r * r;
    }
    return loss;
}

}  // namespace

double PowerLawFit::eval(std::size_t x) const {
    return 1.0 - b * std::pow(double(x), c);
}

PowerLawFit fit_power_law(const LearningCurve& curve, std::size_t horizon) {
    if (curve.grid.size() < 3) throw std::runtime_error("fit_power_law: need >= 3 grid points");

    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (curve.s[i] < 1.0 - kSaturationEps) usable.push_back(i);
    }
    PowerLawFit fit;
    fit.horizon = horizon;
    if (usable.empty()) {  // saturated everywhere: f == 1
        fit.b = 0.0;
        fit.c = 0.0;
        fit.rms_residual = std::sqrt(squared_loss(curve, 0.0, 0.0) / double(curve.grid.size()));
        return fit;
    }
    if (usable.size() < 3) {
        throw std::runtime_error("fit_power_law: too few non-saturated points");
    }

    // log(1 - s_x) = log b + c * log x
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = double(usable.size());
    for (std::size_t i : usable) {
        const double lx = std::log(double(curve.grid[i]));
        const double ly = std::log(1.0 - curve.s[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    double c = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    double b = std::exp((sy - c * sx) / n);

    // Bounded descent with backtracking on the original squared loss; at a
    // loss minimum no step is accepted and the log-space solution stands.
    double loss = squared_loss(curve, b, c);
    for (std::size_t it = 0; it < kRefineIters; ++it) {
        double gb = 0.0, gc = 0.0;
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            const double lx = std::log(double(curve.grid[i]));
            const double p = std::pow(double(curve.grid[i]), c);
            const double r = 1.0 - b * p - curve.s[i];
            gb += -2.0 * r * p;
            gc += -2.0 * r * b * p * lx;
        }
        const double gnorm = std::sqrt(gb * gb + gc * gc);
        if (gnorm < 1e-14) break;
        double step = 1.0 / (1.0 + gnorm);
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            const double nb = std::max(0.0, b - step * gb);
            const double nc = c - step * gc;
            const double nloss = squared_loss(curve, nb, nc);
            if (nloss < loss - 1e-18) {
                b = nb;
                c = nc;
                loss = nloss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }

    fit.b = b;
    fit.c = c;
    fit.rms_residual = std::sqrt(loss / double(curve.grid.size()));
    return fit;
}

double extrapolate_final(const PowerLawFit& fit) {
    return std::clamp(fit.eval(fit.horizon), 0.0, 1.0);
}

PowerLawNeeded extrapolate_needed(const PowerLawFit& fit, double threshold) {
    const std::size_t N = fit.horizon;
    const double target = threshold * fit.eval(N);
    PowerLawNeeded out;

    if (fit.b > 0.0 && fit.c < 0.0) {
        // f(x) > target  <=>  x^c < (1 - target)/b  <=>  x > ((1-target)/b)^(1/c)
        const double q = 1.0 - target;
        if (q <= 0.0) {
            out.amount = N;
            return out;
        }
        double x0 = std::pow(q / fit.b, 1.0 / fit.c);
        std::size_t candidate =
            x0 < 1.0 ? 1 : std::size_t(std::min(std::floor(x0) + 1.0, double(N) + 1.0));
        // Strict inequality plus floating-point slack: verify and nudge.
        while (candidate > 1 && fit.eval(candidate - 1) > target) --candidate;
        while (candidate <= N && !(fit.eval(candidate) > target)) ++candidate;
        if (candidate > N) {
            out.amount = N;
            return out;
        }
        out.amount = candidate;
        out.satisfied = true;
        return out;
    }

    out.used_scan = true;
    for (std::size_t x = 1; x <= N; ++x) {
        if (fit.eval(x) > target) {
            out.amount = x;
            out.satisfied = true;
            return out;
        }
    }
    out.amount = N;
    return out;
}

}  // namespace budget
