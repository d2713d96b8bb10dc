#pragma once

#include <cstddef>

#include "budget/curves.hpp"

namespace budget {

// Saturating power law f(x) = 1 - b * x^c fitted to a pilot curve.
struct PowerLawFit {
    double b = 0.0;
    double c = 0.0;
    double rms_residual = 0.0;
    std::size_t horizon = 2500;

    double eval(std::size_t x) const;  // raw f(x), no clamping
};

struct PowerLawNeeded {
    std::size_t amount = 0;
    bool satisfied = false;  // false = never reaches the target within [1, horizon]
    bool used_scan = false;  // fallback path for degenerate fits (b = 0 or c >= 0)
};

// Log-space linear least squares on log(1 - s_x) over non-saturated points,
// refined by bounded deterministic descent on the original squared loss. A
// curve saturated everywhere short-circuits to b = 0.
PowerLawFit fit_power_law(const LearningCurve& curve, std::size_t horizon = 2500);

// clamp(f(horizon), 0, 1)
double extrapolate_final(const PowerLawFit& fit);

// Smallest integer x in [1, horizon] with f(x) > threshold * f(horizon);
// closed-form inversion when b > 0 and c < 0, exhaustive scan otherwise.
PowerLawNeeded extrapolate_needed(const PowerLawFit& fit, double threshold = 0.99);

}  // namespace budget
