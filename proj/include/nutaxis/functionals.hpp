#pragma once

// Monitored functionals of a state: masses, sup norms, weighted gradient
// integrals, localized dissipation integrands, and the Gronwall-type growth
// envelope pieces.  One FunctionalSample is one CSV row of the monitor
// time series.
//
// Exponent conventions used throughout:
//   alpha(p, q)    = (2p - 1) q / (2 (p + 1))
//   q_from_p(p)    = 2 (p + 1)(p + 2) / (p + 4)       (lower end of the window)
//   admissible q   : q_from_p(p) <= q < 2 (p + 2)
//   growth RHS     = C * sup_v * (|u|_p^p + 1 + eps^((p(q+2)+2)/q) + eps^(q/2))
//   y(t)           = |u|_p^p + \int v^-alpha |v_x|^q + 3

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nutaxis/cutoff.hpp"
#include "nutaxis/errors.hpp"
#include "nutaxis/grid.hpp"
#include "nutaxis/state.hpp"

namespace nutaxis {

inline double alpha_exponent(double p, double q) {
    return (2.0 * p - 1.0) * q / (2.0 * (p + 1.0));
}

inline double q_from_p(double p) {
    return 2.0 * (p + 1.0) * (p + 2.0) / (p + 4.0);
}

inline bool pq_admissible(double p, double q) {
    return q >= q_from_p(p) && q < 2.0 * (p + 2.0);
}

// Right-hand side of the monitored differential inequality
//   d/dt (|u|_p^p + \int v^-alpha |v_x|^q) <= C sup_v (|u|_p^p + 1 + eps-powers).
inline double growth_rhs(double p, double q, double epsilon, double lp_u, double sup_v,
                         double C) {
    if (!pq_admissible(p, q))
        throw std::invalid_argument("growth_rhs: exponent pair (p, q) outside the "
                                    "admissible window [2(p+1)(p+2)/(p+4), 2(p+2))");
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("growth_rhs: epsilon must lie in (0, 1]");
    const double e1 = (p * (q + 2.0) + 2.0) / q;
    const double e2 = q / 2.0;
    return C * sup_v * (lp_u + 1.0 + std::pow(epsilon, e1) + std::pow(epsilon, e2));
}

struct MonitorConfig {
    std::vector<double> p_list{2.0};  // each p >= 2
    std::vector<double> q_list{};     // empty: q = q_from_p(p) per entry
    double q_tilde = 0.5;             // sub-linear dissipation exponent in (0, 1)
    Cutoff cutoff{1.0, 2.0};
    double sample_interval = 0.01;    // monitor row cadence
    double snapshot_interval = 0.05;  // stored-state cadence
    std::size_t psi_dict_size = 8;    // dual-pairing dictionary size

    double q_for(std::size_t idx) const {
        return q_list.empty() ? q_from_p(p_list[idx]) : q_list[idx];
    }

    void validate(const Grid& g) const {
        if (p_list.empty()) throw ConfigError("monitors: p_list must not be empty");
        for (double p : p_list)
            if (!(p >= 2.0)) throw ConfigError("monitors: every p must be >= 2");
        if (!q_list.empty() && q_list.size() != p_list.size())
            throw ConfigError("monitors: q_list must match p_list in length");
        for (std::size_t i = 0; i < p_list.size(); ++i)
            if (!pq_admissible(p_list[i], q_for(i)))
                throw ConfigError("monitors: (p, q) outside the admissible window");
        if (!(q_tilde > 0.0) || !(q_tilde < 1.0))
            throw ConfigError("monitors: q_tilde must lie in (0, 1)");
        if (!(cutoff.support() < g.half_length))
            throw ConfigError("monitors: cutoff support must fit inside the ball");
        if (!(sample_interval > 0.0) || !(snapshot_interval > 0.0))
            throw ConfigError("monitors: intervals must be positive");
    }
};

// Per-exponent block of one sample row.
struct PBlock {
    double p = 0.0;
    double q = 0.0;
    double alpha = 0.0;
    double lp_u = 0.0;      // \int u^p
    double wgrad = 0.0;     // \int v^-alpha |v_x|^q
    double y = 0.0;         // lp_u + wgrad + 3
    double lp_u_cut = 0.0;  // \int u^p phi^2
    double diss_u = 0.0;    // \int u^(p-1) v u_x^2 phi^2
    double w11 = 0.0;       // | u^((p+1)/2) v phi^2 |_(W^1,1)
};

struct FunctionalSample {
    double t = 0.0;
    double mass_u = 0.0;
    double mass_v = 0.0;
    double cross_uv = 0.0;    // \int u v
    double sup_v = 0.0;
    double sup_abs_vx = 0.0;
    double fisher = 0.0;      // \int v_x^2 / v
    double quartic = 0.0;     // \int v_x^4 / v^3
    double fisher_cut = 0.0;  // \int (v_x^2 / v) phi^2
    double diss_q = 0.0;      // \int u^(q_tilde - 1) v u_x^2 phi^2
    double diss_v = 0.0;      // \int (u / v) v_x^2 phi^2
    double logv = 0.0;        // \int log(sup_v0 / v) phi^2
    std::vector<PBlock> p_blocks;
};

// W^1,1 norm of w = u^((p+1)/2) v phi^2 with the product rule expanded:
//   w_x = (p+1)/2 u^((p-1)/2) u_x v phi^2 + u^((p+1)/2) v_x phi^2
//       + u^((p+1)/2) v (phi^2)_x,
// using discrete gradients for u_x, v_x and the closed-form cutoff slope.
inline double cutoff_w11_norm(const State& s, const Grid& g, const Cutoff& cut, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("cutoff_w11_norm: p must be >= 2");
    const Field du = gradient(s.u, g);
    const Field dv = gradient(s.v, g);
    const double bp = 0.5 * (p + 1.0);
    long double acc = 0.0L, acc_dx = 0.0L;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.centers[i];
        const double phi2 = cut.value(x);
        const double up = std::pow(s.u[i], bp);
        const double w = up * s.v[i] * phi2;
        const double wx = bp * std::pow(s.u[i], bp - 1.0) * du[i] * s.v[i] * phi2 +
                          up * dv[i] * phi2 + up * s.v[i] * cut.d1(x);
        acc += std::fabs(w);
        acc_dx += std::fabs(wx);
    }
    const double val = static_cast<double>((acc + acc_dx) * static_cast<long double>(g.dx));
    if (!std::isfinite(val)) throw NonFiniteFunctional("cutoff_w11_norm: non-finite value");
    return val;
}

// Evaluate every monitored functional on one state.  sup_v_baseline is the
// sup of the initial v (the reference level inside the log functional).
inline FunctionalSample evaluate_monitors(const State& s, const Grid& g,
                                          const MonitorConfig& cfg, double sup_v_baseline) {
    cfg.validate(g);
    if (s.u.size() != g.n_cells || s.v.size() != g.n_cells)
        throw std::invalid_argument("evaluate_monitors: state does not match grid");
    if (!(sup_v_baseline > 0.0))
        throw std::invalid_argument("evaluate_monitors: baseline sup v must be positive");

    const Field du = gradient(s.u, g);
    const Field dv = gradient(s.v, g);

    FunctionalSample out;
    out.t = s.t;
    out.mass_u = integrate(s.u, g);
    out.mass_v = integrate(s.v, g);
    out.sup_v = max_val(s.v);
    out.sup_abs_vx = max_abs(dv);

    long double cross = 0.0L, fisher = 0.0L, quartic = 0.0L;
    long double fisher_cut = 0.0L, diss_q = 0.0L, diss_v = 0.0L, logv = 0.0L;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.centers[i];
        const double u = s.u[i], v = s.v[i];
        if (!(v > 0.0)) throw NonFiniteFunctional("evaluate_monitors: v not positive");
        const double phi2 = cfg.cutoff.value(x);
        const double vx2 = dv[i] * dv[i];
        const double ux2 = du[i] * du[i];
        cross += u * v;
        fisher += vx2 / v;
        quartic += vx2 * vx2 / (v * v * v);
        fisher_cut += vx2 / v * phi2;
        // Cells where u vanished (clamped tails) carry no dissipation: the
        // degenerate coefficient u v shuts the flux off there.
        if (u > 0.0 && ux2 > 0.0)
            diss_q += std::pow(u, cfg.q_tilde - 1.0) * v * ux2 * phi2;
        diss_v += (u / v) * vx2 * phi2;
        logv += std::log(sup_v_baseline / v) * phi2;
    }
    out.cross_uv = static_cast<double>(cross * g.dx);
    out.fisher = static_cast<double>(fisher * g.dx);
    out.quartic = static_cast<double>(quartic * g.dx);
    out.fisher_cut = static_cast<double>(fisher_cut * g.dx);
    out.diss_q = static_cast<double>(diss_q * g.dx);
    out.diss_v = static_cast<double>(diss_v * g.dx);
    out.logv = static_cast<double>(logv * g.dx);

    for (std::size_t k = 0; k < cfg.p_list.size(); ++k) {
        PBlock blk;
        blk.p = cfg.p_list[k];
        blk.q = cfg.q_for(k);
        blk.alpha = alpha_exponent(blk.p, blk.q);
        long double lp = 0.0L, wgrad = 0.0L, lp_cut = 0.0L, diss_u = 0.0L;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            const double x = g.centers[i];
            const double u = s.u[i], v = s.v[i];
            const double phi2 = cfg.cutoff.value(x);
            const double up = std::pow(u, blk.p);
            const double avx = std::fabs(dv[i]);
            lp += up;
            lp_cut += up * phi2;
            if (avx > 0.0) wgrad += std::pow(v, -blk.alpha) * std::pow(avx, blk.q);
            diss_u += std::pow(u, blk.p - 1.0) * v * du[i] * du[i] * phi2;
        }
        blk.lp_u = static_cast<double>(lp * g.dx);
        blk.wgrad = static_cast<double>(wgrad * g.dx);
        blk.y = blk.lp_u + blk.wgrad + 3.0;
        blk.lp_u_cut = static_cast<double>(lp_cut * g.dx);
        blk.diss_u = static_cast<double>(diss_u * g.dx);
        blk.w11 = cutoff_w11_norm(s, g, cfg.cutoff, blk.p);
        out.p_blocks.push_back(blk);
    }

    // Non-finite anywhere is a reportable failure, not a value to clip.
    auto finite = [](double x) { return std::isfinite(x); };
    bool ok = finite(out.mass_u) && finite(out.mass_v) && finite(out.cross_uv) &&
              finite(out.sup_v) && finite(out.sup_abs_vx) && finite(out.fisher) &&
              finite(out.quartic) && finite(out.fisher_cut) && finite(out.diss_q) &&
              finite(out.diss_v) && finite(out.logv);
    for (const PBlock& b : out.p_blocks)
        ok = ok && finite(b.lp_u) && finite(b.wgrad) && finite(b.lp_u_cut) &&
             finite(b.diss_u) && finite(b.w11);
    if (!ok)
        throw NonFiniteFunctional("evaluate_monitors: non-finite functional at t=" +
                                  std::to_string(s.t));
    return out;
}

} // namespace nutaxis
