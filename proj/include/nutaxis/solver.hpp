#pragma once

// Time stepping for the coupled degenerate system on the ball with zero-flux
// walls:
//
//   u_t = (u v u_x)_x - chi (u^2 v v_x)_x + u v
//   v_t = v_xx - u v
//
// One step at size dt:
//   1. v-update (semi-implicit): solve (I - dt Lap + dt diag(u_old)) v_new
//      = v_old.  The matrix is tridiagonal, strictly diagonally dominant
//      with nonpositive off-diagonal entries, so v stays positive and obeys
//      the discrete maximum principle unconditionally.
//   2. u-update (explicit, conservative): face fluxes
//        F = (u v)_face (u_i+1 - u_i)/dx - chi (u^2 v)_face (v_new,i+1 - v_new,i)/dx
//      with arithmetic-mean face coefficients built from v_new, zero flux at
//      the walls, plus the reaction dt * u_old * v_new.
//
// Using the identical product u_old * v_new as the reaction in both updates
// makes sum(u) + sum(v) conserved exactly (up to rounding): the u-equation
// gains per step exactly what the v-equation loses.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nutaxis/errors.hpp"
#include "nutaxis/functionals.hpp"
#include "nutaxis/grid.hpp"
#include "nutaxis/state.hpp"

namespace nutaxis {

struct SolverParams {
    double chi = 1.0;               // taxis strength
    double cfl_safety = 0.4;        // fraction of the explicit stability bound
    double dt_max = 1e-2;           // hard cap on the step size
    double positivity_floor = 1e-14; // undershoots beyond this abort the step
    int max_dt_retries = 20;        // dt halvings before giving up

    void validate() const {
        if (!(chi >= 0.0)) throw ConfigError("solver: chi must be >= 0");
        if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
            throw ConfigError("solver: cfl_safety must lie in (0, 1]");
        if (!(dt_max > 0.0)) throw ConfigError("solver: dt_max must be positive");
        if (!(positivity_floor >= 0.0))
            throw ConfigError("solver: positivity_floor must be >= 0");
        if (max_dt_retries < 0) throw ConfigError("solver: max_dt_retries must be >= 0");
    }
};

// Per-step accounting that the balance checks consume.
struct StepInfo {
    double consumed = 0.0;     // dt * sum(u_old * v_new) dx, the mass moved u <- v
    double clamped_mass = 0.0; // mass added by clamping roundoff undershoots
};

namespace detail {

// Thomas algorithm for the strictly diagonally dominant tridiagonal system.
inline void solve_tridiagonal(const std::vector<double>& lower,
                              const std::vector<double>& diag,
                              const std::vector<double>& upper,
                              std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    double den = diag[0];
    if (den == 0.0) throw SolveFailure("tridiagonal solve: zero pivot");
    c[0] = upper[0] / den;
    d[0] = rhs[0] / den;
    for (std::size_t i = 1; i < n; ++i) {
        den = diag[i] - lower[i] * c[i - 1];
        if (den == 0.0) throw SolveFailure("tridiagonal solve: zero pivot");
        c[i] = i + 1 < n ? upper[i] / den : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    rhs[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = d[i] - c[i] * rhs[i + 1];
}

} // namespace detail

// Stability-limited step size: dt = cfl_safety * min over faces of
// dx^2 / (2 max(D_face, machine_eps)) where D_face combines the degenerate
// diffusion coefficient (u v)_face with the taxis activity
// chi (u^2 v)_face |v_i+1 - v_i|.  Capped by dt_max.
inline double select_dt(const State& s, const Grid& g, const SolverParams& prm) {
    prm.validate();
    const std::size_t n = g.n_cells;
    double dmax = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double uv = 0.5 * (s.u[i] * s.v[i] + s.u[i + 1] * s.v[i + 1]);
        const double uuv = 0.5 * (s.u[i] * s.u[i] * s.v[i] + s.u[i + 1] * s.u[i + 1] * s.v[i + 1]);
        const double d = uv + prm.chi * uuv * std::fabs(s.v[i + 1] - s.v[i]);
        dmax = std::max(dmax, d);
    }
    const double dt = prm.cfl_safety * g.dx * g.dx /
                      (2.0 * std::max(dmax, std::numeric_limits<double>::epsilon()));
    return std::min(dt, prm.dt_max);
}

// One step of size dt.  Throws PositivityViolation if u undershoots below
// -positivity_floor anywhere (the driver halves dt and retries); undershoots
// within the floor are clamped to zero and the added mass is logged.
inline State step(const State& s, const Grid& g, const SolverParams& prm, double dt,
                  StepInfo* info = nullptr) {
    prm.validate();
    const std::size_t n = g.n_cells;
    if (s.u.size() != n || s.v.size() != n)
        throw std::invalid_argument("step: state does not match grid");
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");

    const double r = dt / (g.dx * g.dx);

    // v-update: (I - dt Lap + dt diag(u)) v_new = v_old with zero-flux walls.
    std::vector<double> lower(n, -r), diag(n), upper(n, -r);
    for (std::size_t i = 0; i < n; ++i) {
        const double stencil = (i == 0 || i + 1 == n) ? 1.0 : 2.0;
        diag[i] = 1.0 + r * stencil + dt * s.u[i];
    }
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    std::vector<double> vnew = s.v;
    detail::solve_tridiagonal(lower, diag, upper, vnew);
    for (std::size_t i = 0; i < n; ++i)
        if (!(vnew[i] > 0.0) || !std::isfinite(vnew[i]))
            throw SolveFailure("step: v lost positivity (t=" + std::to_string(s.t) + ")");

    // u-update: conservative fluxes on interior faces, zero flux at the walls.
    std::vector<double> flux(n + 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double uv = 0.5 * (s.u[i] * vnew[i] + s.u[i + 1] * vnew[i + 1]);
        const double uuv =
            0.5 * (s.u[i] * s.u[i] * vnew[i] + s.u[i + 1] * s.u[i + 1] * vnew[i + 1]);
        flux[i + 1] = uv * (s.u[i + 1] - s.u[i]) / g.dx -
                      prm.chi * uuv * (vnew[i + 1] - vnew[i]) / g.dx;
    }

    State out;
    out.t = s.t + dt;
    out.v = std::move(vnew);
    out.u.resize(n);
    long double consumed = 0.0L, clamped = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double reaction = s.u[i] * out.v[i];
        double ui = s.u[i] + dt * (flux[i + 1] - flux[i]) / g.dx + dt * reaction;
        if (!std::isfinite(ui))
            throw PositivityViolation("step: non-finite u (t=" + std::to_string(s.t) + ")");
        if (ui < 0.0) {
            if (ui < -prm.positivity_floor)
                throw PositivityViolation("step: u undershoot " + std::to_string(ui) +
                                          " at x=" + std::to_string(g.centers[i]));
            clamped += -ui;
            ui = 0.0;
        }
        out.u[i] = ui;
        consumed += reaction;
    }
    if (info) {
        info->consumed = static_cast<double>(consumed * g.dx) * dt;
        info->clamped_mass = static_cast<double>(clamped * g.dx);
    }
    return out;
}

// Full run record: sampled monitor rows, stored states, and the exact
// per-step reaction accounting both sampled at row cadence.
struct Trajectory {
    Grid grid;
    SolverParams params;
    MonitorConfig monitors;
    double T = 0.0;
    double sup_v_baseline = 0.0;
    std::vector<FunctionalSample> rows;
    std::vector<double> consumed_at_row; // cumulative \int\int u v up to row time
    std::vector<double> clamp_at_row;    // cumulative clamped mass up to row time
    std::vector<State> snapshots;
    double clamped_mass_total = 0.0;
    long long n_steps = 0;
    std::string label;
};

// Advance the state from t=0 to T, sampling monitor rows every
// sample_interval and storing snapshots every snapshot_interval (plus both
// endpoints).  Event times are hit exactly: the step size never crosses the
// next sample/snapshot boundary, so sweeps over epsilon share identical
// sample times.  On PositivityViolation the step is retried with half the
// dt up to max_dt_retries times.
inline Trajectory simulate(const State& init, const Grid& g, const SolverParams& prm,
                           const MonitorConfig& monitors, double T,
                           const std::string& label = "") {
    prm.validate();
    monitors.validate(g);
    if (!(T > 0.0)) throw ConfigError("simulate: horizon T must be positive");
    for (double ui : init.u)
        if (ui < 0.0 || !std::isfinite(ui))
            throw ConfigError("simulate: initial u must be finite and >= 0");
    for (double vi : init.v)
        if (!(vi > 0.0) || !std::isfinite(vi))
            throw ConfigError("simulate: initial v must be finite and > 0");

    Trajectory traj;
    traj.grid = g;
    traj.params = prm;
    traj.monitors = monitors;
    traj.T = T;
    traj.sup_v_baseline = max_val(init.v);
    traj.label = label;

    // Events live on the integer lattice of sample_interval so that members
    // of an epsilon sweep share bitwise-identical sample and snapshot times.
    const double si = monitors.sample_interval;
    const double stride_f = monitors.snapshot_interval / si;
    const long long snap_stride = std::llround(stride_f);
    if (snap_stride < 1 || std::fabs(stride_f - static_cast<double>(snap_stride)) > 1e-9)
        throw ConfigError("simulate: snapshot_interval must be an integer multiple "
                          "of sample_interval");

    const double tiny = 1e-12 * T;
    long double consumed = 0.0L, clamped = 0.0L;

    State cur = init;
    cur.t = 0.0;
    auto emit_row = [&](const State& s) {
        traj.rows.push_back(evaluate_monitors(s, g, monitors, traj.sup_v_baseline));
        traj.consumed_at_row.push_back(static_cast<double>(consumed));
        traj.clamp_at_row.push_back(static_cast<double>(clamped));
    };
    emit_row(cur);
    traj.snapshots.push_back(cur);

    long long m = 1; // index of the next sample event
    while (cur.t < T) {
        const double t_event = std::min(static_cast<double>(m) * si, T);

        double dt = std::min(select_dt(cur, g, prm), t_event - cur.t);
        StepInfo info;
        State next;
        int retries = 0;
        for (;;) {
            try {
                next = step(cur, g, prm, dt, &info);
                break;
            } catch (const PositivityViolation&) {
                if (++retries > prm.max_dt_retries) throw;
                dt *= 0.5;
            }
        }
        consumed += static_cast<long double>(info.consumed);
        clamped += static_cast<long double>(info.clamped_mass);
        cur = std::move(next);
        ++traj.n_steps;

        if (cur.t >= t_event - tiny) {
            cur.t = t_event; // land exactly on the event time
            emit_row(cur);
            if (t_event == T || m % snap_stride == 0) traj.snapshots.push_back(cur);
            if (t_event == T) break;
            ++m;
        }
    }
    traj.clamped_mass_total = static_cast<double>(clamped);
    return traj;
}

} // namespace nutaxis
