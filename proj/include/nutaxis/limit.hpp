#pragma once

// Vanishing-regularization study: run the same initial profile on a ladder
// of growing balls (decreasing epsilon) with a shared cell width, compare
// the solutions on a fixed observation window (the grids are nested cell by
// cell), and measure how well the discrete solutions satisfy the two weak
// formulations against smooth compactly supported space-time test functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <string>
#include <vector>

#include "nutaxis/cutoff.hpp"
#include "nutaxis/errors.hpp"
#include "nutaxis/initial_data.hpp"
#include "nutaxis/solver.hpp"

namespace nutaxis {

struct SweepConfig {
    std::vector<double> epsilons; // strictly decreasing ladder, >= 3 entries
    double dx = 1.0 / 64.0;       // shared cell width; n(eps) = 2/(eps dx)
    double T = 1.0;
    double window_W = 1.0;        // observation window (-W, W)
};

struct SweepResult {
    std::vector<Trajectory> members;        // one per epsilon, ladder order
    std::vector<std::size_t> window_begin;  // first window cell per member
    std::size_t window_cells = 0;
    std::vector<double> window_x;           // shared window cell centers
    double window_W = 0.0;
    double min_window_v = 0.0; // min of v over window and time, finest member
};

namespace detail {

inline std::size_t cells_for(double epsilon, double dx) {
    const double nd = 2.0 / (epsilon * dx);
    const long long n = std::llround(nd);
    if (n < 8 || n % 2 != 0 || std::fabs(nd - static_cast<double>(n)) > 1e-9 * nd)
        throw ConfigError("sweep: 2/(epsilon dx) must be an even integer >= 8 "
                          "(epsilon=" + std::to_string(epsilon) + ")");
    return static_cast<std::size_t>(n);
}

} // namespace detail

// Run every ladder member (in parallel; each member is internally
// deterministic) and assemble the shared observation window.
inline SweepResult run_sweep(const InitialDataSpec& init_spec, const SolverParams& prm,
                             const MonitorConfig& monitors, const SweepConfig& sw) {
    if (sw.epsilons.size() < 3)
        throw ConfigError("sweep: need at least 3 epsilon values");
    for (std::size_t j = 0; j + 1 < sw.epsilons.size(); ++j)
        if (!(sw.epsilons[j + 1] < sw.epsilons[j]))
            throw ConfigError("sweep: epsilons must be strictly decreasing");
    if (!(sw.window_W > 0.0))
        throw ConfigError("sweep: window_W must be positive");
    if (sw.window_W > 1.0 / sw.epsilons.front() + 1e-12)
        throw ConfigError("sweep: window does not fit inside the smallest ball");
    const double ncw = 2.0 * sw.window_W / sw.dx;
    const long long n_win = std::llround(ncw);
    if (n_win < 2 || n_win % 2 != 0 || std::fabs(ncw - static_cast<double>(n_win)) > 1e-9 * ncw)
        throw ConfigError("sweep: 2 window_W / dx must be an even integer >= 2");

    SweepResult res;
    res.window_W = sw.window_W;
    res.window_cells = static_cast<std::size_t>(n_win);

    std::vector<std::future<Trajectory>> futs;
    for (double eps : sw.epsilons) {
        futs.push_back(std::async(std::launch::async, [&, eps]() {
            const Grid g = make_grid(eps, detail::cells_for(eps, sw.dx));
            const State init = build_initial(init_spec, g);
            return simulate(init, g, prm, monitors, sw.T,
                            "eps=" + std::to_string(eps));
        }));
    }
    for (auto& f : futs) res.members.push_back(f.get());

    // Nested-window bookkeeping: every member must expose the identical
    // window cell centers (same dx, symmetric grids).
    for (const Trajectory& tr : res.members) {
        const std::size_t n = tr.grid.n_cells;
        if (n < res.window_cells)
            throw ConfigError("sweep: window wider than a member ball");
        res.window_begin.push_back((n - res.window_cells) / 2);
    }
    res.window_x.resize(res.window_cells);
    for (std::size_t k = 0; k < res.window_cells; ++k)
        res.window_x[k] = -sw.window_W + (static_cast<double>(k) + 0.5) * sw.dx;
    for (std::size_t j = 0; j < res.members.size(); ++j) {
        const Grid& g = res.members[j].grid;
        for (std::size_t k = 0; k < res.window_cells; ++k)
            if (std::fabs(g.centers[res.window_begin[j] + k] - res.window_x[k]) > 1e-12)
                throw ConfigError("sweep: member grids are not nested on the window");
    }

    // Snapshot times must agree across members for space-time comparisons.
    const auto& first = res.members.front().snapshots;
    for (const Trajectory& tr : res.members) {
        if (tr.snapshots.size() != first.size())
            throw ConfigError("sweep: members disagree on snapshot count");
        for (std::size_t m = 0; m < first.size(); ++m)
            if (tr.snapshots[m].t != first[m].t)
                throw ConfigError("sweep: members disagree on snapshot times");
    }

    const Trajectory& finest = res.members.back();
    double vmin = std::numeric_limits<double>::infinity();
    const std::size_t off = res.window_begin.back();
    for (const State& s : finest.snapshots)
        for (std::size_t k = 0; k < res.window_cells; ++k)
            vmin = std::min(vmin, s.v[off + k]);
    res.min_window_v = vmin;
    return res;
}

// Space-time L^q distances between ladder members restricted to the window:
//   d_jk = ( int_0^T int_W |f_j - f_k|^q dx dt )^(1/q),
// trapezoid in time over the shared snapshots.  cauchy_decreasing reports
// whether the consecutive distances d_(j, j+1) strictly decrease along the
// ladder, the observable shadow of a Cauchy property in epsilon.
struct DistanceMatrix {
    char field = 'u'; // 'u' or 'v'
    double q = 1.0;
    std::size_t n = 0;
    std::vector<double> d; // row-major n x n, symmetric, zero diagonal
    std::vector<double> consecutive; // d_(j, j+1)
    bool cauchy_decreasing = false;

    double at(std::size_t j, std::size_t k) const { return d[j * n + k]; }
};

inline DistanceMatrix pairwise_distances(const SweepResult& sw, char field, double q) {
    if (!(q >= 1.0)) throw ConfigError("distances: need q >= 1");
    if (field != 'u' && field != 'v') throw ConfigError("distances: field must be u or v");
    const std::size_t n = sw.members.size();
    const std::size_t nw = sw.window_cells;
    const std::size_t n_snap = sw.members.front().snapshots.size();

    DistanceMatrix mat;
    mat.field = field;
    mat.q = q;
    mat.n = n;
    mat.d.assign(n * n, 0.0);

    const double dx = sw.members.front().grid.dx;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            long double acc = 0.0L;
            long double prev_space = -1.0L;
            for (std::size_t m = 0; m < n_snap; ++m) {
                const State& a = sw.members[j].snapshots[m];
                const State& b = sw.members[k].snapshots[m];
                const Field& fa = field == 'u' ? a.u : a.v;
                const Field& fb = field == 'u' ? b.u : b.v;
                long double space = 0.0L;
                for (std::size_t i = 0; i < nw; ++i) {
                    const double diff = fa[sw.window_begin[j] + i] - fb[sw.window_begin[k] + i];
                    space += std::pow(std::fabs(diff), static_cast<long double>(q));
                }
                space *= dx;
                if (m > 0) {
                    const double dt = a.t - sw.members[j].snapshots[m - 1].t;
                    acc += 0.5L * (prev_space + space) * dt;
                }
                prev_space = space;
            }
            const double dist = std::pow(static_cast<double>(acc), 1.0 / q);
            mat.d[j * n + k] = dist;
            mat.d[k * n + j] = dist;
        }
    }
    mat.cauchy_decreasing = true;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        mat.consecutive.push_back(mat.at(j, j + 1));
        if (j > 0 && !(mat.consecutive[j] < mat.consecutive[j - 1]))
            mat.cauchy_decreasing = false;
    }
    return mat;
}

// ---------------------------------------------------------------------------
// Weak-formulation residuals.
// ---------------------------------------------------------------------------

// Separable space-time test function phi(x, t) = psi(x) tau(t): psi is the
// smooth plateau profile (compactly supported inside the ball), tau either
// starts at 1 and decays smoothly to 0 before the horizon, or is a smooth
// interior bump vanishing at t = 0.
struct TimeProfile {
    enum class Kind { plateau_decay, interior_bump };
    Kind kind = Kind::plateau_decay;
    double t0 = 0.0; // plateau_decay: full strength until t0; bump: support start
    double t1 = 1.0; // zero from t1 on

    double value(double t) const {
        if (kind == Kind::plateau_decay) {
            if (t <= t0) return 1.0;
            if (t >= t1) return 0.0;
            return 1.0 - detail::smooth_step((t - t0) / (t1 - t0));
        }
        const double s = (2.0 * t - t0 - t1) / (t1 - t0);
        const double r = 1.0 - s * s;
        return r > 0.0 ? std::exp(1.0 - 1.0 / r) : 0.0;
    }
    double d1(double t) const {
        if (kind == Kind::plateau_decay) {
            if (t <= t0 || t >= t1) return 0.0;
            return -detail::smooth_step_d1((t - t0) / (t1 - t0)) / (t1 - t0);
        }
        const double s = (2.0 * t - t0 - t1) / (t1 - t0);
        const double r = 1.0 - s * s;
        if (r <= 0.0) return 0.0;
        return std::exp(1.0 - 1.0 / r) * (-2.0 * s / (r * r)) * 2.0 / (t1 - t0);
    }
};

struct TestFunction {
    Cutoff space;      // psi(x): plateau profile with closed-form derivatives
    TimeProfile time;  // tau(t)
};

// Bank of separable test functions fitted to a ball of the given half
// length and horizon T; supports stay strictly inside both.  At least one
// member has phi(., 0) != 0, so the initial term is exercised.
inline std::vector<TestFunction> default_test_bank(double half_length, double T) {
    const double L = half_length;
    using K = TimeProfile::Kind;
    return {
        {Cutoff(0.20 * L, 0.45 * L), {K::plateau_decay, 0.30 * T, 0.75 * T}},
        {Cutoff(0.30 * L, 0.70 * L), {K::interior_bump, 0.10 * T, 0.70 * T}},
        {Cutoff(0.50 * L, 0.95 * L), {K::plateau_decay, 0.50 * T, 0.90 * T}},
        {Cutoff(0.15 * L, 0.80 * L), {K::interior_bump, 0.20 * T, 0.85 * T}},
        {Cutoff(0.40 * L, 0.60 * L), {K::plateau_decay, 0.25 * T, 0.60 * T}},
    };
}

// Which second-order term enters the u-equation residual: the derived form
// (u^2 v against phi_xx, consistent with the flux identity u u_x =
// (u^2)_x / 2) or the printed form (u v against phi_xx).
enum class WeakFormVariant { derived, printed };

struct WeakResidual {
    std::size_t fn_index = 0;
    char equation = 'u';
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0; // |lhs - rhs| / max(|lhs|, |rhs|), 0 when both vanish
};

// Evaluate both weak formulations on a recorded trajectory against a bank of
// test functions: midpoint quadrature in space over the cells, trapezoid in
// time over the stored snapshots.
//
//   u-equation: \int\int u phi_t + \int u0 phi(., 0)
//             = -1/2 \int\int u^2 v_x phi_x - 1/2 \int\int (u^2 v | u v) phi_xx
//               - \int\int u^2 v v_x phi_x - \int\int u v phi
//   v-equation: \int\int v phi_t + \int v0 phi(., 0)
//             = \int\int v_x phi_x + \int\int u v phi
inline std::vector<WeakResidual> weak_residual(const Trajectory& traj,
                                               const std::vector<TestFunction>& bank,
                                               WeakFormVariant variant) {
    if (bank.empty()) throw ConfigError("weak_residual: empty test bank");
    const Grid& g = traj.grid;
    for (const TestFunction& fn : bank)
        if (!(fn.space.support() < g.half_length))
            throw ConfigError("weak_residual: test function support exceeds the ball");

    const std::size_t n_snap = traj.snapshots.size();
    const std::size_t nb = bank.size();
    const double chi = traj.params.chi;

    // Per snapshot and test function: spatial integrals multiplying tau'
    // (A terms) and tau (B terms) in each equation.
    std::vector<std::vector<double>> Au(nb, std::vector<double>(n_snap)),
        Bu(nb, std::vector<double>(n_snap)), Av(nb, std::vector<double>(n_snap)),
        Bv(nb, std::vector<double>(n_snap));

    for (std::size_t m = 0; m < n_snap; ++m) {
        const State& s = traj.snapshots[m];
        const Field vx = gradient(s.v, g);
        for (std::size_t b = 0; b < nb; ++b) {
            const Cutoff& psi = bank[b].space;
            long double au = 0.0L, bu = 0.0L, av = 0.0L, bv = 0.0L;
            for (std::size_t i = 0; i < g.n_cells; ++i) {
                const double x = g.centers[i];
                const double p0 = psi.value(x);
                if (p0 == 0.0 && psi.d1(x) == 0.0 && psi.d2(x) == 0.0) continue;
                const double p1 = psi.d1(x);
                const double p2 = psi.d2(x);
                const double u = s.u[i], v = s.v[i], dvx = vx[i];
                const double second = variant == WeakFormVariant::derived ? u * u * v : u * v;
                au += u * p0;
                bu += -0.5 * u * u * dvx * p1 - 0.5 * second * p2 -
                      chi * u * u * v * dvx * p1 - u * v * p0;
                av += v * p0;
                bv += dvx * p1 + u * v * p0;
            }
            Au[b][m] = static_cast<double>(au * g.dx);
            Bu[b][m] = static_cast<double>(bu * g.dx);
            Av[b][m] = static_cast<double>(av * g.dx);
            Bv[b][m] = static_cast<double>(bv * g.dx);
        }
    }

    auto trapezoid = [&](const std::vector<double>& vals, const TimeProfile& tau,
                         bool derivative) {
        long double acc = 0.0L;
        for (std::size_t m = 0; m + 1 < n_snap; ++m) {
            const double ta = traj.snapshots[m].t, tb = traj.snapshots[m + 1].t;
            const double wa = derivative ? tau.d1(ta) : tau.value(ta);
            const double wb = derivative ? tau.d1(tb) : tau.value(tb);
            acc += 0.5L * (static_cast<long double>(vals[m]) * wa + vals[m + 1] * wb) *
                   (tb - ta);
        }
        return static_cast<double>(acc);
    };

    std::vector<WeakResidual> out;
    for (std::size_t b = 0; b < nb; ++b) {
        const TimeProfile& tau = bank[b].time;
        WeakResidual ru;
        ru.fn_index = b;
        ru.equation = 'u';
        ru.lhs = trapezoid(Au[b], tau, true) + Au[b][0] * tau.value(0.0);
        ru.rhs = trapezoid(Bu[b], tau, false);
        const double du = std::max(std::fabs(ru.lhs), std::fabs(ru.rhs));
        ru.residual = du > 0.0 ? std::fabs(ru.lhs - ru.rhs) / du : 0.0;
        out.push_back(ru);

        WeakResidual rv;
        rv.fn_index = b;
        rv.equation = 'v';
        rv.lhs = trapezoid(Av[b], tau, true) + Av[b][0] * tau.value(0.0);
        rv.rhs = trapezoid(Bv[b], tau, false);
        const double dv = std::max(std::fabs(rv.lhs), std::fabs(rv.rhs));
        rv.residual = dv > 0.0 ? std::fabs(rv.lhs - rv.rhs) / dv : 0.0;
        out.push_back(rv);
    }
    return out;
}

} // namespace nutaxis
