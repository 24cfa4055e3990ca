#pragma once

// Closed-form scalar profiles with analytic first derivatives.  These back
// the initial-data families, the hypothesis validator (which needs exact
// derivatives and decay envelopes), and the interpolation-inequality sampler.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace nutaxis {

// Type-erased analytic function on the line.  decay_rate > 0 means
// |f(x)| <= |f(X)| * exp(-decay_rate (|x|-X)) for |x| >= X once X is past the
// profile's core; decay_rate == 0 means no usable decay envelope (constants).
struct AnalyticFn {
    std::function<double(double)> f;
    std::function<double(double)> df;
    double decay_rate = 0.0;
};

inline AnalyticFn analytic_constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, 0.0};
}

inline AnalyticFn analytic_zero() { return analytic_constant(0.0); }

// a * exp(-x^2 / (2 sigma^2))
inline AnalyticFn analytic_gaussian(double a, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
    const double s2 = sigma * sigma;
    return {[a, s2](double x) { return a * std::exp(-x * x / (2.0 * s2)); },
            [a, s2](double x) { return -a * (x / s2) * std::exp(-x * x / (2.0 * s2)); },
            // Gaussian decays faster than any exponential; 1/sigma is a safe
            // envelope rate once |x| > sigma (used only for tail estimates
            // at large |x| where exp(-x^2/2s^2) << exp(-x/s)).
            1.0 / sigma};
}

// b * sech(kappa x)
inline AnalyticFn analytic_sech(double b, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("sech: kappa must be positive");
    return {[b, kappa](double x) { return b / std::cosh(kappa * x); },
            [b, kappa](double x) {
                const double s = 1.0 / std::cosh(kappa * x);
                return -b * kappa * s * std::tanh(kappa * x);
            },
            kappa};
}

// Smooth compactly supported bump: a * exp(-1 / (1 - (x/w)^2)) on |x| < w.
inline AnalyticFn analytic_bump(double a, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("bump: width must be positive");
    auto val = [a, w](double x) {
        const double t = x / w;
        const double r = 1.0 - t * t;
        return r > 0.0 ? a * std::exp(-1.0 / r) : 0.0;
    };
    auto der = [a, w](double x) {
        const double t = x / w;
        const double r = 1.0 - t * t;
        if (r <= 0.0) return 0.0;
        const double e = std::exp(-1.0 / r);
        // d/dx exp(-1/r) = exp(-1/r) * (-2t/w) / r^2
        return a * e * (-2.0 * t / w) / (r * r);
    };
    // Compact support: any positive rate works as an envelope beyond w.
    return {val, der, 1.0};
}

// b * exp(-x^2/(2 sigma^2)) + floor  (strictly positive when b > 0 or floor > 0)
inline AnalyticFn analytic_gaussian_shifted(double b, double sigma, double floor) {
    AnalyticFn gauss = analytic_gaussian(b, sigma);
    return {[gauss, floor](double x) { return gauss.f(x) + floor; },
            gauss.df,
            floor > 0.0 ? 0.0 : gauss.decay_rate};
}

} // namespace nutaxis
