#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "nutaxis/solver.hpp"
#include "oracles.hpp"

using namespace nutaxis;

namespace {

State homogeneous_state(const Grid& g, double u, double v) {
    State st;
    st.t = 0.0;
    st.u.assign(g.n_cells, u);
    st.v.assign(g.n_cells, v);
    return st;
}

// Dense Gaussian elimination with partial pivoting; reference for the
// tridiagonal solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

} // namespace

TEST_CASE("tridiagonal solve matches dense elimination", "[solver][oracle]") {
    const std::size_t n = 12;
    std::vector<double> lower(n), diag(n), upper(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = i == 0 ? 0.0 : -0.3 - 0.01 * static_cast<double>(i);
        upper[i] = i + 1 == n ? 0.0 : -0.2 - 0.02 * static_cast<double>(i);
        diag[i] = 1.7 + 0.1 * static_cast<double>(i);
        rhs[i] = std::sin(1.0 + static_cast<double>(i));
    }
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        A[i][i] = diag[i];
        if (i > 0) A[i][i - 1] = lower[i];
        if (i + 1 < n) A[i][i + 1] = upper[i];
    }
    const auto ref = dense_solve(A, rhs);
    auto x = rhs;
    detail::solve_tridiagonal(lower, diag, upper, x);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(x[i] == Catch::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("step size selection on homogeneous unit data", "[solver][oracle]") {
    // dx = 0.1 on the unit ball with 20 cells; all faces carry D = u v = 1,
    // so dt = cfl * dx^2 / 2 = 0.4 * 0.01 / 2 = 0.002
    const Grid g = make_grid(1.0, 20);
    REQUIRE(g.dx == Catch::Approx(0.1));
    SolverParams prm;
    const State st = homogeneous_state(g, 1.0, 1.0);
    CHECK(select_dt(st, g, prm) == Catch::Approx(0.002).epsilon(1e-12));

    // vanished u removes every stability constraint: the cap takes over
    const State rest = homogeneous_state(g, 0.0, 1.0);
    CHECK(select_dt(rest, g, prm) == prm.dt_max);

    // quadrupling with the cell width (until the cap)
    const Grid g2 = make_grid(1.0, 10);
    SolverParams loose = prm;
    loose.dt_max = 1.0;
    CHECK(select_dt(homogeneous_state(g2, 1.0, 1.0), g2, loose) ==
          Catch::Approx(4.0 * 0.002).epsilon(1e-12));
}

TEST_CASE("parameter validation", "[solver]") {
    const Grid g = make_grid(0.5, 16);
    const State st = homogeneous_state(g, 1.0, 1.0);
    SolverParams bad;
    bad.cfl_safety = 0.0;
    CHECK_THROWS_AS(select_dt(st, g, bad), ConfigError);
    bad = SolverParams{};
    bad.dt_max = -1.0;
    CHECK_THROWS_AS(select_dt(st, g, bad), ConfigError);
    bad = SolverParams{};
    bad.chi = -0.5;
    CHECK_THROWS_AS(select_dt(st, g, bad), ConfigError);
}

TEST_CASE("pure diffusion: one implicit step is exact per discrete mode",
          "[solver][oracle]") {
    // With u identically zero the update is backward Euler for the Neumann
    // heat equation; cell-centered cosine modes are exact eigenvectors of
    // the discrete Laplacian, so one step divides the mode amplitude by
    // exactly (1 + dt lambda_h).
    const Grid g = make_grid(0.5, 64);
    const int k = 3;
    const double lam = oracles::heat_mode_rate_discrete(g.n_cells, g.dx, k);

    State st = homogeneous_state(g, 0.0, 1.0);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        st.v[i] = 1.0 + 0.5 * std::cos(static_cast<double>(k) * std::numbers::pi *
                                       (g.centers[i] + g.half_length) /
                                       (2.0 * g.half_length));

    SolverParams prm;
    const double dt = 1e-3;
    const State out = step(st, g, prm, dt);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double expected =
            1.0 + 0.5 / (1.0 + dt * lam) *
                      std::cos(static_cast<double>(k) * std::numbers::pi *
                               (g.centers[i] + g.half_length) / (2.0 * g.half_length));
        CHECK(out.v[i] == Catch::Approx(expected).margin(1e-13));
        CHECK(out.u[i] == 0.0); // nothing feeds u when it starts at zero
    }
}

TEST_CASE("pure diffusion converges to the heat kernel at second order in space",
          "[solver][oracle]") {
    const int k = 2;
    const double T = 0.5, dt = 2e-5;
    auto amp_error = [&](std::size_t n) {
        const Grid g = make_grid(0.5, n);
        State st = homogeneous_state(g, 0.0, 1.0);
        for (std::size_t i = 0; i < g.n_cells; ++i)
            st.v[i] = 1.0 + 0.5 * std::cos(static_cast<double>(k) * std::numbers::pi *
                                           (g.centers[i] + g.half_length) /
                                           (2.0 * g.half_length));
        SolverParams prm;
        prm.dt_max = 1.0;
        State cur = st;
        const auto steps = static_cast<std::size_t>(std::llround(T / dt));
        for (std::size_t s = 0; s < steps; ++s) cur = step(cur, g, prm, dt);
        const double mu2 = oracles::heat_mode_rate(g.half_length, k);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            const double exact =
                1.0 + 0.5 * std::exp(-mu2 * T) *
                          std::cos(static_cast<double>(k) * std::numbers::pi *
                                   (g.centers[i] + g.half_length) / (2.0 * g.half_length));
            worst = std::max(worst, std::fabs(cur.v[i] - exact));
        }
        return worst;
    };
    const double e1 = amp_error(32), e2 = amp_error(64);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("space-homogeneous reduction follows the logistic reaction",
          "[solver][oracle]") {
    // closed form cross-checked against an RK4 integration first
    const double u0 = 1.0, v0 = 1.0, T = 1.0;
    const auto rk = oracles::rk4(
        [](const std::vector<double>& y) {
            return std::vector<double>{y[0] * y[1], -y[0] * y[1]};
        },
        {u0, v0}, T, 4000);
    CHECK(rk[1] == Catch::Approx(oracles::homog_v(u0, v0, T)).margin(1e-12));
    CHECK(oracles::homog_v(u0, v0, T) ==
          Catch::Approx(2.0 / (1.0 + std::exp(2.0))).epsilon(1e-15)); // frozen

    const Grid g = make_grid(1.0, 8);
    SolverParams prm;
    prm.dt_max = 1.0;
    auto run = [&](double dt) {
        State cur = homogeneous_state(g, u0, v0);
        const auto steps = static_cast<std::size_t>(std::llround(T / dt));
        for (std::size_t s = 0; s < steps; ++s) cur = step(cur, g, prm, dt);
        return cur;
    };
    const State a = run(1e-3), b = run(5e-4);
    const double exact_v = oracles::homog_v(u0, v0, T);
    const double exact_u = oracles::homog_u(u0, v0, T);
    const double ea = std::fabs(a.v[0] - exact_v), eb = std::fabs(b.v[0] - exact_v);
    CHECK(ea < 5e-3);
    CHECK(std::fabs(a.u[0] - exact_u) < 5e-3);
    // first order in time
    CHECK(ea / eb == Catch::Approx(2.0).margin(0.3));
    // homogeneity survives up to the sweep-direction rounding of the
    // tridiagonal elimination, a few ulps per step
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        CHECK(std::fabs(a.u[i] - a.u[0]) < 1e-12);
        CHECK(std::fabs(a.v[i] - a.v[0]) < 1e-12);
    }
}

TEST_CASE("sum of both masses is conserved to rounding", "[solver]") {
    const Grid g = make_grid(0.5, 128);
    State st;
    st.t = 0.0;
    st.u.resize(g.n_cells);
    st.v.resize(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.centers[i];
        st.u[i] = 0.5 + std::exp(-x * x);
        st.v[i] = 1.0 / std::cosh(x);
    }
    SolverParams prm;
    const double m0 = integrate(st.u, g) + integrate(st.v, g);
    State cur = st;
    double consumed_total = 0.0;
    const double mv0 = integrate(st.v, g);
    for (int s = 0; s < 400; ++s) {
        StepInfo info;
        cur = step(cur, g, prm, select_dt(cur, g, prm), &info);
        consumed_total += info.consumed;
    }
    const double m1 = integrate(cur.u, g) + integrate(cur.v, g);
    CHECK(std::fabs(m1 - m0) / m0 < 1e-13);
    // the logged reaction mass equals what v lost, exactly by construction
    CHECK(std::fabs((mv0 - integrate(cur.v, g)) - consumed_total) / mv0 < 1e-13);
}

TEST_CASE("oversized steps trip the positivity guard", "[solver]") {
    const Grid g = make_grid(1.0, 16);
    State st = homogeneous_state(g, 1.0, 1.0);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        st.u[i] = (i % 2 == 0) ? 1.95 : 0.05; // sawtooth: diffusion drains the peaks
    SolverParams prm;
    CHECK_THROWS_AS(step(st, g, prm, 10.0), PositivityViolation);
    // the stability-limited step stays clean
    CHECK_NOTHROW(step(st, g, prm, select_dt(st, g, prm)));
}

TEST_CASE("trajectory sampling lands exactly on the event lattice", "[solver]") {
    const Grid g = make_grid(0.5, 64);
    State st = homogeneous_state(g, 0.8, 1.0);
    MonitorConfig mon;
    mon.cutoff = Cutoff(0.5, 1.5);
    mon.sample_interval = 0.01;
    mon.snapshot_interval = 0.05;
    SolverParams prm;
    const double T = 0.3;
    const Trajectory tr = simulate(st, g, prm, mon, T, "lattice");

    REQUIRE(tr.rows.size() == 31);
    for (std::size_t k = 0; k < tr.rows.size(); ++k)
        CHECK(tr.rows[k].t ==
              std::min(static_cast<double>(k) * mon.sample_interval, T));
    REQUIRE(tr.snapshots.size() == 7); // t = 0, 0.05, ..., 0.25, 0.3
    CHECK(tr.snapshots.front().t == 0.0);
    CHECK(tr.snapshots.back().t == T);
    CHECK(tr.label == "lattice");
    CHECK(tr.n_steps > 0);

    // a member at a different epsilon shares the sample times bitwise
    const Grid g2 = make_grid(0.25, 64);
    MonitorConfig mon2 = mon;
    const Trajectory tr2 = simulate(homogeneous_state(g2, 0.8, 1.0), g2, prm, mon2, T);
    REQUIRE(tr2.rows.size() == tr.rows.size());
    for (std::size_t k = 0; k < tr.rows.size(); ++k)
        CHECK(tr2.rows[k].t == tr.rows[k].t);
}

TEST_CASE("monotone bulk quantities along a real trajectory", "[solver]") {
    const Grid g = make_grid(0.5, 128);
    State st;
    st.t = 0.0;
    st.u.resize(g.n_cells);
    st.v.resize(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.centers[i];
        st.u[i] = std::exp(-x * x / 2.0) + 0.5 * std::exp(-x * x / 2.0); // u0 + eps zeta
        st.v[i] = 1.0 / std::cosh(x);
    }
    MonitorConfig mon;
    mon.cutoff = Cutoff(0.5, 1.5);
    SolverParams prm;
    const Trajectory tr = simulate(st, g, prm, mon, 0.2);

    const double supv0 = tr.rows.front().sup_v;
    for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        CHECK(tr.rows[k].mass_u >= tr.rows[k - 1].mass_u - 1e-12);
        CHECK(tr.rows[k].mass_v <= tr.rows[k - 1].mass_v + 1e-12);
        CHECK(tr.rows[k].sup_v <= supv0 * (1.0 + 1e-12));
        CHECK(tr.rows[k].mass_u + tr.rows[k].mass_v ==
              Catch::Approx(tr.rows[0].mass_u + tr.rows[0].mass_v).epsilon(1e-12));
    }
    // cumulative consumption reproduces the v-mass drop at every row
    for (std::size_t k = 0; k < tr.rows.size(); ++k)
        CHECK(tr.consumed_at_row[k] ==
              Catch::Approx(tr.rows[0].mass_v - tr.rows[k].mass_v).margin(1e-11));
}

TEST_CASE("simulate rejects bad inputs", "[solver]") {
    const Grid g = make_grid(0.5, 64);
    MonitorConfig mon;
    mon.cutoff = Cutoff(0.5, 1.5);
    SolverParams prm;

    State neg = homogeneous_state(g, 1.0, 1.0);
    neg.u[3] = -0.1;
    CHECK_THROWS_AS(simulate(neg, g, prm, mon, 0.1), ConfigError);

    State flatv = homogeneous_state(g, 1.0, 1.0);
    flatv.v[5] = 0.0;
    CHECK_THROWS_AS(simulate(flatv, g, prm, mon, 0.1), ConfigError);

    const State ok = homogeneous_state(g, 1.0, 1.0);
    CHECK_THROWS_AS(simulate(ok, g, prm, mon, 0.0), ConfigError);

    MonitorConfig off = mon;
    off.snapshot_interval = 0.0137; // not a multiple of the sample cadence
    CHECK_THROWS_AS(simulate(ok, g, prm, off, 0.1), ConfigError);
}
