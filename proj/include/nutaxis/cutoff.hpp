#pragma once

// Smooth localization weight phi^2: identically 1 on the plateau (-R, R),
// identically 0 outside (-S, S), C^inf in between via the classical
// exp(-1/t) blend.  First and second derivatives are closed forms, not
// finite differences, so localized integrals never pick up differencing
// noise from the weight.

#include <cmath>
#include <string>

#include "nutaxis/errors.hpp"

namespace nutaxis {

namespace detail {

// h(t) = exp(-1/t) for t > 0, 0 otherwise; all derivatives vanish at 0+.
inline double blend_h(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
inline double blend_h1(double t) {
    if (t <= 0.0) return 0.0;
    const double h = std::exp(-1.0 / t);
    return h / (t * t);
}
inline double blend_h2(double t) {
    if (t <= 0.0) return 0.0;
    const double h = std::exp(-1.0 / t);
    return h * (1.0 / (t * t * t * t) - 2.0 / (t * t * t));
}

// g(s) = h(s) / (h(s) + h(1-s)) rises monotonically from 0 to 1 on [0,1]
// with all derivatives vanishing at both ends.
inline double smooth_step(double s) {
    const double a = blend_h(s);
    const double b = blend_h(1.0 - s);
    return a / (a + b);
}
inline double smooth_step_d1(double s) {
    const double a = blend_h(s);
    const double b = blend_h(1.0 - s);
    const double a1 = blend_h1(s);
    const double b1 = -blend_h1(1.0 - s);
    const double D = a + b;
    return (a1 * b - a * b1) / (D * D);
}
inline double smooth_step_d2(double s) {
    const double a = blend_h(s);
    const double b = blend_h(1.0 - s);
    const double a1 = blend_h1(s);
    const double b1 = -blend_h1(1.0 - s);
    const double a2 = blend_h2(s);
    const double b2 = blend_h2(1.0 - s);
    const double D = a + b;
    const double M = a1 * b - a * b1; // numerator of g' * D^2
    const double M1 = a2 * b - a * b2;
    const double D1 = a1 + b1;
    return (M1 * D - 2.0 * M * D1) / (D * D * D);
}

} // namespace detail

class Cutoff {
public:
    Cutoff(double plateau_R, double support_S) : R_(plateau_R), S_(support_S) {
        if (!(plateau_R > 0.0) || !(support_S > plateau_R))
            throw ConfigError("Cutoff: need 0 < R < S, got R=" +
                                        std::to_string(plateau_R) +
                                        " S=" + std::to_string(support_S));
        w_ = S_ - R_;
    }

    double plateau() const { return R_; }
    double support() const { return S_; }

    // phi^2(x)
    double value(double x) const {
        const double a = std::fabs(x);
        if (a <= R_) return 1.0;
        if (a >= S_) return 0.0;
        return 1.0 - detail::smooth_step((a - R_) / w_);
    }

    // d/dx phi^2(x)
    double d1(double x) const {
        const double a = std::fabs(x);
        if (a <= R_ || a >= S_) return 0.0;
        const double sign = x > 0.0 ? 1.0 : -1.0;
        return -sign * detail::smooth_step_d1((a - R_) / w_) / w_;
    }

    // d^2/dx^2 phi^2(x)
    double d2(double x) const {
        const double a = std::fabs(x);
        if (a <= R_ || a >= S_) return 0.0;
        return -detail::smooth_step_d2((a - R_) / w_) / (w_ * w_);
    }

private:
    double R_;
    double S_;
    double w_;
};

} // namespace nutaxis
