#pragma once

// Inequality checks over recorded trajectories.  Every check reports a
// margin series (RHS - LHS at each sampled time, so nonnegative means the
// inequality holds), the worst time, any fitted constants, and a verdict.
// Margins are recorded verbatim: a check may fail, but it never rescales
// its own tolerance to pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nutaxis/cutoff.hpp"
#include "nutaxis/errors.hpp"
#include "nutaxis/functionals.hpp"
#include "nutaxis/grid.hpp"
#include "nutaxis/solver.hpp"

namespace nutaxis {

struct InequalityReport {
    std::string check_name;
    bool pass = false;
    double tolerance = 0.0; // pass requires min_margin >= -tolerance
    std::vector<double> times;
    std::vector<double> margins; // RHS - LHS per time
    double min_margin = 0.0;
    double worst_time = 0.0;
    std::vector<std::pair<std::string, double>> fitted;
    std::string notes;
};

namespace detail {

inline void finalize(InequalityReport& rep) {
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.worst_time = 0.0;
    for (std::size_t i = 0; i < rep.margins.size(); ++i) {
        if (rep.margins[i] < rep.min_margin) {
            rep.min_margin = rep.margins[i];
            rep.worst_time = rep.times[i];
        }
    }
    if (rep.margins.empty()) rep.min_margin = 0.0;
    rep.pass = rep.min_margin >= -rep.tolerance;
}

// Trapezoid rule over the (time, value) series of one trajectory.
inline double time_integral(const std::vector<double>& t, const std::vector<double>& y) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5L * (static_cast<long double>(y[i]) + y[i + 1]) * (t[i + 1] - t[i]);
    return static_cast<double>(acc);
}

} // namespace detail

// The five exact balance laws of the scheme, each checked along the row
// series relative to the initial masses:
//   (a) total mass sum(u)+sum(v) is constant,
//   (b) sum(v) never increases,        (c) sum(u) never decreases,
//   (d) max v(t) <= max v(0) * (1 + tol),
//   (e) cumulative consumption \int\int u v <= initial sum(v) at all times.
inline std::vector<InequalityReport> check_balance_laws(const Trajectory& traj,
                                                        double tol_rel = 1e-10) {
    if (traj.rows.size() < 2)
        throw std::invalid_argument("check_balance_laws: need at least two rows");
    const double mass0 = traj.rows.front().mass_u + traj.rows.front().mass_v;
    const double massv0 = traj.rows.front().mass_v;
    const double supv0 = traj.rows.front().sup_v;
    const double scale = std::max(mass0, 1e-300);

    std::vector<InequalityReport> out(5);
    for (auto& rep : out) rep.tolerance = 0.0;

    out[0].check_name = "balance_total_mass";
    out[0].notes = "relative drift of sum(u)+sum(v), tolerance " + std::to_string(tol_rel);
    out[1].check_name = "balance_v_nonincreasing";
    out[2].check_name = "balance_u_nondecreasing";
    out[3].check_name = "balance_v_max_principle";
    out[4].check_name = "balance_consumption";
    out[4].notes = "cumulative reaction transfer vs initial sum(v)";

    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
        const FunctionalSample& r = traj.rows[i];
        out[0].times.push_back(r.t);
        out[0].margins.push_back(tol_rel - std::fabs(r.mass_u + r.mass_v - mass0) / scale);
        if (i + 1 < traj.rows.size()) {
            const FunctionalSample& rn = traj.rows[i + 1];
            out[1].times.push_back(rn.t);
            out[1].margins.push_back(r.mass_v - rn.mass_v + tol_rel * scale);
            out[2].times.push_back(rn.t);
            out[2].margins.push_back(rn.mass_u - r.mass_u + tol_rel * scale);
        }
        out[3].times.push_back(r.t);
        out[3].margins.push_back(supv0 * (1.0 + tol_rel) - r.sup_v);
        out[4].times.push_back(r.t);
        out[4].margins.push_back(massv0 + tol_rel * scale - traj.consumed_at_row[i]);
    }
    for (auto& rep : out) detail::finalize(rep);
    return out;
}

// Fit the envelope constant on a calibration trajectory, then check the
// differential inequality and the resulting exponential envelope on an
// independent trajectory, with the fitted constant inflated by
// margin_inflation (default 10%).
//
//   fit:      C = max over calibration rows of [dy/dt]_+ / rhs(C=1)
//   check 1:  dy/dt <= (1+infl) C rhs(C=1)   (forward differences)
//   check 2:  y(t) <= y(0) exp((1+infl) C sup_v(0) t)
//
// Fitting and validating on the same trajectory object is refused: the
// check is only meaningful out of sample.
inline InequalityReport check_gronwall(const Trajectory& traj, double p, double q,
                                       const Trajectory& calibration,
                                       double margin_inflation = 0.1) {
    if (&traj == &calibration)
        throw std::invalid_argument("check_gronwall: refusing to validate the fitted "
                                    "constant on the calibration trajectory itself");
    if (!pq_admissible(p, q))
        throw std::invalid_argument("check_gronwall: inadmissible (p, q)");

    auto block_index = [&](const Trajectory& tr) -> std::size_t {
        const auto& ps = tr.monitors.p_list;
        for (std::size_t k = 0; k < ps.size(); ++k)
            if (ps[k] == p && tr.monitors.q_for(k) == q) return k;
        throw std::invalid_argument("check_gronwall: trajectory does not monitor (p, q)");
    };

    auto fit_on = [&](const Trajectory& tr) {
        const std::size_t k = block_index(tr);
        double C = 0.0;
        for (std::size_t i = 0; i + 1 < tr.rows.size(); ++i) {
            const auto& a = tr.rows[i];
            const auto& b = tr.rows[i + 1];
            const double dydt =
                (b.p_blocks[k].y - a.p_blocks[k].y) / (b.t - a.t);
            if (dydt <= 0.0) continue;
            const double rhs1 = growth_rhs(p, q, tr.grid.epsilon, a.p_blocks[k].lp_u,
                                           a.sup_v, 1.0);
            C = std::max(C, dydt / rhs1);
        }
        return C;
    };

    const double C = fit_on(calibration);
    const double Cinf = C * (1.0 + margin_inflation);

    InequalityReport rep;
    rep.check_name = "gronwall_envelope";
    rep.tolerance = 0.0;
    rep.fitted = {{"C", C}, {"C_inflated", Cinf}};

    const std::size_t k = block_index(traj);
    const double y0 = traj.rows.front().p_blocks[k].y;
    const double supv0 = traj.rows.front().sup_v;
    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
        const auto& a = traj.rows[i];
        // envelope check at every row
        rep.times.push_back(a.t);
        rep.margins.push_back(y0 * std::exp(Cinf * supv0 * a.t) - a.p_blocks[k].y);
        // differential check on each forward interval
        if (i + 1 < traj.rows.size()) {
            const auto& b = traj.rows[i + 1];
            const double dydt = (b.p_blocks[k].y - a.p_blocks[k].y) / (b.t - a.t);
            const double rhs = growth_rhs(p, q, traj.grid.epsilon, a.p_blocks[k].lp_u,
                                          a.sup_v, Cinf);
            rep.times.push_back(b.t);
            rep.margins.push_back(rhs - dydt);
        }
    }
    rep.notes = "fit on eps=" + std::to_string(calibration.grid.epsilon) +
                ", validated on eps=" + std::to_string(traj.grid.epsilon) +
                ", inflation " + std::to_string(margin_inflation);
    detail::finalize(rep);
    return rep;
}

// Uniform-in-epsilon dissipation budgets along a family of trajectories with
// strictly decreasing epsilon: for each monitored quantity, the value for the
// smallest epsilon may not exceed (1 + slack) times the max over the earlier
// family members.  Time-integrated quantities: \int v_x^4/v^3, the localized
// dissipation integrals (u^(p-1) and u^(q~-1) weights, (u/v) v_x^2), and the
// localized log-drop functional.  The localized relative-gradient functional
// \int (v_x^2/v) phi^2 is checked through its sup over time.
inline std::vector<InequalityReport>
check_dissipation_bounds(const std::vector<const Trajectory*>& family, double slack = 0.2) {
    if (family.size() < 3)
        throw std::invalid_argument("check_dissipation_bounds: need at least 3 trajectories");
    for (std::size_t j = 0; j + 1 < family.size(); ++j)
        if (!(family[j + 1]->grid.epsilon < family[j]->grid.epsilon))
            throw std::invalid_argument("check_dissipation_bounds: epsilon must be "
                                        "strictly decreasing along the family");
    const std::size_t n_p = family.front()->monitors.p_list.size();
    for (const Trajectory* tr : family)
        if (tr->monitors.p_list.size() != n_p)
            throw std::invalid_argument("check_dissipation_bounds: mismatched p lists");

    struct Quantity {
        std::string name;
        bool sup_norm; // false: trapezoid time integral of the row series
        std::function<double(const FunctionalSample&)> get;
    };
    std::vector<Quantity> quantities = {
        {"diss_quartic_time_integral", false, [](const FunctionalSample& r) { return r.quartic; }},
        {"diss_sublinear_time_integral", false, [](const FunctionalSample& r) { return r.diss_q; }},
        {"diss_vgrad_time_integral", false, [](const FunctionalSample& r) { return r.diss_v; }},
        {"logdrop_time_integral", false, [](const FunctionalSample& r) { return r.logv; }},
        {"fisher_cut_sup", true, [](const FunctionalSample& r) { return r.fisher_cut; }},
    };
    for (std::size_t k = 0; k < n_p; ++k) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "diss_u_p%g_time_integral",
                      family.front()->monitors.p_list[k]);
        quantities.push_back(
            {buf, false, [k](const FunctionalSample& r) { return r.p_blocks[k].diss_u; }});
    }

    std::vector<InequalityReport> out;
    for (const Quantity& Q : quantities) {
        InequalityReport rep;
        rep.check_name = Q.name;
        rep.tolerance = 0.0;
        std::vector<double> vals;
        for (const Trajectory* tr : family) {
            std::vector<double> ts, ys;
            for (const auto& r : tr->rows) {
                ts.push_back(r.t);
                ys.push_back(Q.get(r));
            }
            double v;
            if (Q.sup_norm)
                v = *std::max_element(ys.begin(), ys.end());
            else
                v = detail::time_integral(ts, ys);
            vals.push_back(v);
            rep.fitted.emplace_back("eps_" + std::to_string(tr->grid.epsilon), v);
        }
        const double prev_max = *std::max_element(vals.begin(), vals.end() - 1);
        rep.times.push_back(family.back()->rows.back().t);
        rep.margins.push_back((1.0 + slack) * prev_max - vals.back());
        rep.notes = "last epsilon value vs (1+slack) * max of earlier family members, "
                    "slack " + std::to_string(slack);
        detail::finalize(rep);
        out.push_back(std::move(rep));
    }
    return out;
}

// Duality monitor: lower bound for the norm of the time derivative of
// w = u^((p+1)/2) v phi^2 against a fixed dictionary of smooth normalized
// test profiles psi_k(x) = cos(k pi (x + L) / (2 L)), each scaled to unit
// discrete W^3,2 norm.  For consecutive snapshots the pairing
// |sum (w(t+dt) - w(t))/dt psi_k dx| is maximized over the dictionary.
struct DualPairingResult {
    std::vector<double> t_mid;  // midpoint of each snapshot interval
    std::vector<double> value;  // max pairing over the dictionary
    double time_integral = 0.0; // trapezoid-free: sum of value * interval length
    std::size_t dict_size = 0;
};

inline DualPairingResult dual_pairing_monitor(const Trajectory& traj, double p,
                                              const Cutoff& cut, std::size_t dict_size) {
    if (dict_size == 0)
        throw std::invalid_argument("dual_pairing_monitor: empty dictionary");
    if (traj.snapshots.size() < 2)
        throw std::invalid_argument("dual_pairing_monitor: need at least two snapshots");
    const Grid& g = traj.grid;
    const double L = g.half_length;

    // Dictionary with analytic derivatives; normalization uses the exact
    // derivatives of the cosine profile, not differencing.
    std::vector<Field> psi(dict_size, Field(g.n_cells));
    for (std::size_t k = 0; k < dict_size; ++k) {
        const double mu = static_cast<double>(k) * std::numbers::pi / (2.0 * L);
        long double norm2 = 0.0L;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            const double s = mu * (g.centers[i] + L);
            const double c0 = std::cos(s);
            const double c1 = -mu * std::sin(s);
            const double c2 = -mu * mu * c0;
            const double c3 = -mu * mu * c1;
            psi[k][i] = c0;
            norm2 += (c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3);
        }
        const double norm = std::sqrt(static_cast<double>(norm2 * g.dx));
        for (double& x : psi[k]) x /= norm;
    }

    auto weighted = [&](const State& s) {
        Field w(g.n_cells);
        for (std::size_t i = 0; i < g.n_cells; ++i)
            w[i] = std::pow(s.u[i], 0.5 * (p + 1.0)) * s.v[i] * cut.value(g.centers[i]);
        return w;
    };

    DualPairingResult res;
    res.dict_size = dict_size;
    Field w_prev = weighted(traj.snapshots.front());
    long double integral = 0.0L;
    for (std::size_t m = 1; m < traj.snapshots.size(); ++m) {
        const double dt = traj.snapshots[m].t - traj.snapshots[m - 1].t;
        Field w_cur = weighted(traj.snapshots[m]);
        double best = 0.0;
        for (std::size_t k = 0; k < dict_size; ++k) {
            long double pair = 0.0L;
            for (std::size_t i = 0; i < g.n_cells; ++i)
                pair += (w_cur[i] - w_prev[i]) / dt * psi[k][i];
            best = std::max(best, std::fabs(static_cast<double>(pair * g.dx)));
        }
        res.t_mid.push_back(0.5 * (traj.snapshots[m].t + traj.snapshots[m - 1].t));
        res.value.push_back(best);
        integral += static_cast<long double>(best) * dt;
        w_prev = std::move(w_cur);
    }
    res.time_integral = static_cast<double>(integral);
    return res;
}

} // namespace nutaxis
