// SPDX-License-Identifier: MIT
//
// Solitary-wave solver against the n = 1 first integral
//   (m + omega) u^2 - (m - omega) v^2 + F(v^2 - u^2) = 0,  F(s) = int_0^s f,
// which pins the center amplitude v(0)^2 = ((k+1)(m-omega))^{1/k} for a pure
// power, and against the k = 1 closed form
//   tau(r) = 2 eps^2 / (m + omega cosh(2 eps r)),
//   v^2 = ((m+omega) tau - tau^2/2) / (2 omega),
//   u^2 = ((m-omega) tau - tau^2/2) / (2 omega),
// whose charge is exactly Q = 2 eps / omega. An independent Keller-box
// collocation solve (Richardson-extrapolated) cross-validates the profile.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "solwave/soliton.hpp"

using namespace solwave;

namespace {

struct ClosedForm1 {  // n = 1, k = 1 pure power
  double m, omega, eps;
  double tau(double r) const {
    return 2.0 * eps * eps / (m + omega * std::cosh(2.0 * eps * r));
  }
  double v(double r) const {
    const double t = tau(r);
    return std::sqrt(((m + omega) * t - 0.5 * t * t) / (2.0 * omega));
  }
  double u(double r) const {
    const double t = tau(r);
    return std::sqrt(std::max(0.0, ((m - omega) * t - 0.5 * t * t)) /
                     (2.0 * omega));
  }
};

// Keller-box collocation of the radial system on a staggered grid: two
// midpoint equations per interior interface, the odd-parity equation at the
// origin interface, and the stable-direction closure at the wall.
struct BoxSolve {
  std::vector<double> r;
  Vec v, u;
};

BoxSolve box_solve(int n, const Nonlinearity& nl, double m, double omega,
                   double r_max, int M) {
  const RadialGrid grid = make_radial_grid(n, r_max, M);
  const double h = grid.spacing();
  const double eps = std::sqrt(m * m - omega * omega);

  // Seed from the nonrelativistic limit profile.
  Vec z(2 * M);  // [v; u]
  const double amp = std::pow((1.0 + nl.k) * eps * eps / (2.0 * m),
                              1.0 / (2.0 * nl.k));
  for (int i = 0; i < M; ++i) {
    const double t = eps * grid.nodes[i];
    z[i] = amp * std::pow(1.0 / std::cosh(nl.k * t), 1.0 / nl.k);
    z[M + i] = z[i] * eps / (2.0 * m) * std::tanh(nl.k * t);
  }

  auto residual = [&](const Vec& y, Vec& F) {
    F.setZero(2 * M);
    // origin interface: even ghost for v, odd ghost for u
    F[0] = 2.0 * y[M] / h - (omega - m + nl.f(y[0] * y[0])) * y[0];
    for (int i = 0; i + 1 < M; ++i) {
      const double vb = 0.5 * (y[i] + y[i + 1]);
      const double ub = 0.5 * (y[M + i] + y[M + i + 1]);
      const double rb = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
      const double fb = nl.f(vb * vb - ub * ub);
      F[1 + i] = (y[i + 1] - y[i]) / h - (fb - m - omega) * ub;
      F[M + 1 + i] = (y[M + i + 1] - y[M + i]) / h -
                     (omega - m + fb) * vb +
                     (n > 1 ? (n - 1) * ub / rb : 0.0);
    }
    F[M] = (m + omega) * y[2 * M - 1] - eps * y[M - 1];
  };

  Vec F(2 * M);
  for (int it = 0; it < 30; ++it) {
    residual(z, F);
    if (F.lpNorm<Eigen::Infinity>() < 1e-13) break;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(12 * M);
    {
      const double v0 = z[0], f0 = nl.f(v0 * v0), fp0 = nl.fprime(v0 * v0);
      trip.emplace_back(0, 0, -(omega - m + f0) - fp0 * 2.0 * v0 * v0);
      trip.emplace_back(0, M, 2.0 / h);
    }
    for (int i = 0; i + 1 < M; ++i) {
      const double vb = 0.5 * (z[i] + z[i + 1]);
      const double ub = 0.5 * (z[M + i] + z[M + i + 1]);
      const double rb = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
      const double tb = vb * vb - ub * ub;
      const double fb = nl.f(tb), fp = nl.fprime(tb);
      // d/dv, d/du of the two midpoint equations (chain rule through tau)
      const double dfv = fp * 2.0 * vb * 0.5, dfu = fp * (-2.0 * ub) * 0.5;
      trip.emplace_back(1 + i, i, -1.0 / h - dfv * ub);
      trip.emplace_back(1 + i, i + 1, 1.0 / h - dfv * ub);
      trip.emplace_back(1 + i, M + i, -(fb - m - omega) * 0.5 - dfu * ub);
      trip.emplace_back(1 + i, M + i + 1,
                        -(fb - m - omega) * 0.5 - dfu * ub);
      const double cent = (n > 1 ? (n - 1) / rb : 0.0);
      trip.emplace_back(M + 1 + i, i, -(omega - m + fb) * 0.5 - dfv * vb);
      trip.emplace_back(M + 1 + i, i + 1,
                        -(omega - m + fb) * 0.5 - dfv * vb);
      trip.emplace_back(M + 1 + i, M + i, -1.0 / h - dfu * vb + 0.5 * cent);
      trip.emplace_back(M + 1 + i, M + i + 1,
                        1.0 / h - dfu * vb + 0.5 * cent);
    }
    trip.emplace_back(M, M - 1, -eps);
    trip.emplace_back(M, 2 * M - 1, m + omega);
    SpMat J(2 * M, 2 * M);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<SpMat> lu;
    lu.compute(J);
    REQUIRE(lu.info() == Eigen::Success);
    z -= lu.solve(F);
  }
  residual(z, F);
  REQUIRE(F.lpNorm<Eigen::Infinity>() < 1e-11);

  BoxSolve out;
  out.r = grid.nodes;
  out.v = z.head(M);
  out.u = z.tail(M);
  return out;
}

double lagrange4_at(const std::vector<double>& xs, const Vec& fs, double x) {
  const int M = static_cast<int>(xs.size());
  int j = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) -
                           xs.begin());
  j = std::min(std::max(j - 2, 0), M - 4);
  double acc = 0.0;
  for (int i = j; i < j + 4; ++i) {
    double li = 1.0;
    for (int q = j; q < j + 4; ++q)
      if (q != i) li *= (x - xs[q]) / (xs[i] - xs[q]);
    acc += fs[i] * li;
  }
  return acc;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("center amplitude matches the first integral") {
  struct Case {
    double k, m, omega;
  };
  for (const Case c :
       {Case{1.0, 1.0, 0.9}, Case{1.5, 0.8, 0.7}, Case{2.0, 1.0, 0.95}}) {
    CAPTURE(c.k);
    CAPTURE(c.omega);
    const double eps = std::sqrt(c.m * c.m - c.omega * c.omega);
    const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2800);
    Nonlinearity nl;
    nl.k = c.k;
    const SolitonProfile p = solve_soliton(1, nl, c.m, c.omega, grid);

    const double v0_exact =
        std::pow((c.k + 1.0) * (c.m - c.omega), 1.0 / (2.0 * c.k));
    CHECK(std::abs(p.v0 - v0_exact) < 1e-8 * v0_exact);
    CHECK(p.residual <= 1e-9);
    CHECK(p.epsilon == doctest::Approx(eps));

    // Positivity (branch invariant) and shape: v decreasing, u >= 0.
    for (int i = 0; i < grid.num_points; ++i) {
      CHECK(p.v[i] * p.v[i] - 3.0 * p.u[i] * p.u[i] >=
            -1e-10 * v0_exact * v0_exact);
      CHECK(p.u[i] >= -1e-14);
      if (i > 0) CHECK(p.v[i] <= p.v[i - 1] + 1e-14);
    }
  }
}

TEST_CASE("closed form at k = 1 and collocation oracle") {
  const double m = 1.0, omega = 0.9;
  const double eps = std::sqrt(m * m - omega * omega);
  const RadialGrid grid = make_radial_grid(1, 100.0, 2500);
  Nonlinearity nl;  // k = 1 pure power
  const SolitonProfile p = solve_soliton(1, nl, m, omega, grid);

  const ClosedForm1 cf{m, omega, eps};
  double dv = 0.0, du = 0.0;
  for (int i = 0; i < grid.num_points; ++i) {
    dv = std::max(dv, std::abs(p.v[i] - cf.v(grid.nodes[i])));
    du = std::max(du, std::abs(p.u[i] - cf.u(grid.nodes[i])));
  }
  CHECK(dv < 1e-8 * p.v0);
  CHECK(du < 1e-8 * p.v0);

  // Independent discretization: Keller-box solves at h and h/2, pointwise
  // Richardson-extrapolated onto the library nodes.
  const BoxSolve c1 = box_solve(1, nl, m, omega, 100.0, 2000);
  const BoxSolve c2 = box_solve(1, nl, m, omega, 100.0, 4000);
  double dbox = 0.0;
  for (int i = 0; i < grid.num_points; ++i) {
    const double r = grid.nodes[i];
    if (r > 60.0) break;  // box tail hits its wall closure accuracy
    const double f1 = lagrange4_at(c1.r, c1.v, r);
    const double f2 = lagrange4_at(c2.r, c2.v, r);
    dbox = std::max(dbox, std::abs((4.0 * f2 - f1) / 3.0 - p.v[i]));
  }
  CHECK(dbox < 1e-6 * p.v0);
}

TEST_CASE("box residual of the sampled profile refines at second order") {
  const double m = 1.0, omega = 0.9;
  Nonlinearity nl;
  auto residual_at = [&](int M) {
    const RadialGrid grid = make_radial_grid(1, 60.0, M);
    const SolitonProfile p = solve_soliton(1, nl, m, omega, grid);
    const double h = grid.spacing();
    double rmax = 0.0;
    for (int i = 0; i + 1 < grid.num_points; ++i) {
      if (p.v[i + 1] < 1e-6 * p.v0) break;
      const double vb = 0.5 * (p.v[i] + p.v[i + 1]);
      const double ub = 0.5 * (p.u[i] + p.u[i + 1]);
      const double fb = nl.f(vb * vb - ub * ub);
      const double r1 = std::abs((p.v[i + 1] - p.v[i]) / h -
                                 (fb - m - omega) * ub);
      const double r2 = std::abs((p.u[i + 1] - p.u[i]) / h -
                                 (omega - m + fb) * vb);
      rmax = std::max(rmax, std::max(r1, r2));
    }
    return rmax;
  };
  const double r1 = residual_at(1500);
  const double r2 = residual_at(3000);
  const double order = std::log2(r1 / r2);
  CHECK(order >= 1.9);
  CHECK(order <= 2.2);
}

TEST_CASE("amplitude and decay scale with epsilon") {
  Nonlinearity nl;
  nl.k = 1.5;
  std::vector<double> log_eps, log_sup;
  for (const double om : {0.9, 0.99, 0.999}) {
    const double eps = std::sqrt(1.0 - om * om);
    const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2800);
    const SolitonProfile p = solve_soliton(1, nl, 1.0, om, grid);
    log_eps.push_back(std::log(eps));
    log_sup.push_back(std::log(p.v.lpNorm<Eigen::Infinity>()));

    // Tail decay at rate eps: straight-line fit of log v.
    std::vector<double> xs, ys;
    for (int i = 0; i < grid.num_points; ++i)
      if (p.v[i] > 1e-10 * p.v0 && p.v[i] < 1e-4 * p.v0) {
        xs.push_back(grid.nodes[i]);
        ys.push_back(std::log(p.v[i]));
      }
    REQUIRE(xs.size() > 50);
    CHECK(std::abs(-fit_slope(xs, ys) / eps - 1.0) < 0.05);
  }
  CHECK(std::abs(fit_slope(log_eps, log_sup) - 1.0 / nl.k) < 0.05);
}

TEST_CASE("charge matches the exact k = 1 value and is grid-converged") {
  const double m = 1.0, omega = 0.9;
  const double eps = std::sqrt(m * m - omega * omega);
  Nonlinearity nl;
  const RadialGrid g1 = make_radial_grid(1, 100.0, 2500);
  const RadialGrid g2 = make_radial_grid(1, 100.0, 5000);
  const double q1 = charge(solve_soliton(1, nl, m, omega, g1));
  const double q2 = charge(solve_soliton(1, nl, m, omega, g2));

  const double q_exact = 2.0 * eps / omega;
  CHECK(q1 > 0.0);
  CHECK(std::abs(q1 - q_exact) < 1e-8 * q_exact);
  CHECK(std::abs(q2 - q1) < 1e-8 * q1);
}

TEST_CASE("charge curve signs near m and the serial reference path") {
  Nonlinearity nl;  // k = 1: subcritical, dQ/domega < 0
  const std::vector<double> omegas = {0.90, 0.92, 0.94, 0.96, 0.98};
  const ChargeCurve c = charge_curve(1, nl, 1.0, omegas);
  CHECK(c.sign_near_m == ChargeSign::negative);
  for (int i = 0; i < 5; ++i) {
    CHECK(c.failed[i] == 0);
    CHECK(c.Q[i] > 0.0);
  }
  // Centered differences against the exact slope -2 m^2 / (eps omega^2).
  for (int i = 1; i <= 3; ++i) {
    const double om = omegas[i];
    const double eps = std::sqrt(1.0 - om * om);
    const double exact = -2.0 / (eps * om * om);
    CHECK(std::abs(c.dQ_domega[i] - exact) < 0.05 * std::abs(exact));
  }
  CHECK(std::isnan(c.dQ_domega[0]));
  CHECK(std::isnan(c.dQ_domega[4]));

  // The serial reference path must reproduce the parallel sweep exactly.
  const ChargeCurve s = charge_curve(1, nl, 1.0, omegas, true);
  for (int i = 0; i < 5; ++i) CHECK(s.Q[i] == c.Q[i]);

  Nonlinearity cube;
  cube.k = 3.0;  // supercritical on the line: dQ/domega > 0
  const std::vector<double> near = {0.990, 0.992, 0.994, 0.996, 0.998};
  CHECK(charge_curve(1, cube, 1.0, near).sign_near_m == ChargeSign::positive);

  CHECK_THROWS_AS(charge_curve(1, nl, 1.0, {0.9, 0.92, 0.94}), InputError);
  CHECK_THROWS_AS(charge_curve(1, nl, 1.0, {0.9, 0.92, 0.94, 0.93, 0.96}),
                  InputError);
  CHECK_THROWS_AS(charge_curve(1, nl, 1.0, {0.4, 0.92, 0.94, 0.95, 0.96}),
                  InputError);
}

TEST_CASE("rescaled profiles converge to the limit at rate 2 varkappa") {
  const RadialGrid ygrid = make_radial_grid(1, 36.0, 2400);

  // Pure power k = 1: varkappa = 1, slope >= 1.9.
  {
    Nonlinearity nl;
    const GroundState gs = solve_ground_state(1, 1.0, 1.0, ygrid);
    std::vector<double> le, ln;
    double prev = 1e300;
    for (const double om : {0.9, 0.99, 0.999}) {
      const double eps = std::sqrt(1.0 - om * om);
      const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2800);
      const SolitonProfile p = solve_soliton(1, nl, 1.0, om, grid);
      const RescaledProfiles rp = rescaled_profiles(p, gs);
      CHECK(std::isfinite(rp.weighted_norm));
      CHECK(rp.weighted_norm < prev);
      prev = rp.weighted_norm;
      le.push_back(std::log(eps));
      ln.push_back(std::log(rp.weighted_norm));

      // U_tilde is odd: the first sample sits at t = eps h / 2 ~ 0.
      const double sup_ut = rp.U_tilde.cwiseAbs().maxCoeff();
      CHECK(std::abs(rp.U_tilde[0]) < 0.05 * sup_ut + 1e-10);
    }
    CHECK(fit_slope(le, ln) >= 1.9);
  }

  // Correction term k = 2, K = 3, c = 0.1: varkappa = 1/2, slope 1.0 +- 0.2.
  // The subleading terms carry mixed signs (the norm over eps has a shallow
  // minimum near eps ~ 0.08), so the family spans a decade for the fit to
  // average them out.
  {
    Nonlinearity nl;
    nl.k = 2.0;
    nl.K = 3.0;
    nl.c = 0.1;
    const GroundState gs = solve_ground_state(1, 2.0, 1.0, ygrid);
    std::vector<double> le, ln;
    for (const double om : {0.99, 0.997, 0.9985, 0.999, 0.9995, 0.9998}) {
      const double eps = std::sqrt(1.0 - om * om);
      const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2800);
      const SolitonProfile p = solve_soliton(1, nl, 1.0, om, grid);
      const RescaledProfiles rp = rescaled_profiles(p, gs);
      le.push_back(std::log(eps));
      ln.push_back(std::log(rp.weighted_norm));
    }
    const double slope = fit_slope(le, ln);
    CHECK(slope >= 0.9);
    CHECK(slope <= 1.2);
  }
}

TEST_CASE("rescaled profile validation") {
  Nonlinearity nl;
  const double om = 0.9, eps = std::sqrt(1.0 - om * om);
  const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2800);
  const SolitonProfile p = solve_soliton(1, nl, 1.0, om, grid);

  const RadialGrid ygrid = make_radial_grid(1, 36.0, 2400);
  const GroundState gs = solve_ground_state(1, 1.0, 1.0, ygrid);
  CHECK_THROWS_AS(rescaled_profiles(p, gs, 1.2), InputError);
  CHECK_THROWS_AS(rescaled_profiles(p, gs, -0.1), InputError);

  GroundState wrong_k = gs;
  wrong_k.k = 2.0;
  CHECK_THROWS_AS(rescaled_profiles(p, wrong_k), InputError);

  GroundState stub;  // too short for any overlap
  stub.n = 1;
  stub.k = 1.0;
  stub.m = 1.0;
  stub.grid = make_radial_grid(1, 0.2, 40);
  stub.values = closed_form_profile(1.0, 1.0, stub.grid.nodes);
  CHECK_THROWS_AS(rescaled_profiles(p, stub), GridError);
}

TEST_CASE("bi-frequency companion and the pointwise pairing identities") {
  Nonlinearity nl;
  const double om = 0.9, eps = std::sqrt(1.0 - om * om);
  const RadialGrid grid = make_radial_grid(1, 44.0 / eps, 2000);
  const SolitonProfile p = solve_soliton(1, nl, 1.0, om, grid);
  REQUIRE(p.N == 2);

  // xi = 1, eta = 0: the one-frequency wave, chi = 0.
  {
    CVec xi(1), eta(1);
    xi << 1.0;
    eta << 0.0;
    const BifrequencyPair bp = bifrequency_pair(p, xi, eta);
    for (int i = 0; i < grid.num_points; ++i) {
      CHECK(bp.chi.row(i).norm() == 0.0);
      CHECK(std::abs(bp.phi(i, 0) - Complex(p.v[i], 0.0)) < 1e-15);
      CHECK(std::abs(bp.phi(i, 1) - Complex(0.0, p.u[i])) < 1e-15);
    }
  }

  // Genuine pair: phi^* beta chi = 0 pointwise, |chi|^2 = |eta|^2/|xi|^2 |phi|^2.
  {
    CVec xi(1), eta(1);
    xi << std::sqrt(2.0);
    eta << Complex(0.6, 0.8);
    const BifrequencyPair bp = bifrequency_pair(p, xi, eta);
    double qphi = 0.0, qchi = 0.0, pair_max = 0.0;
    for (int i = 0; i < grid.num_points; ++i) {
      qphi += grid.weights[i] * bp.phi.row(i).squaredNorm();
      qchi += grid.weights[i] * bp.chi.row(i).squaredNorm();
      pair_max = std::max(pair_max, std::abs(bp.beta_pairing[i]));
    }
    CHECK(pair_max < 1e-14 * p.v0 * p.v0);
    CHECK(std::abs(qchi / qphi - 0.5) < 1e-12);

    // <phi, alpha^1 phi> vanishes pointwise by the block parity.
    for (int i = 0; i < grid.num_points; i += 37) {
      const Complex a1 = std::conj(bp.phi(i, 0)) * bp.phi(i, 1) +
                         std::conj(bp.phi(i, 1)) * bp.phi(i, 0);
      CHECK(std::abs(a1) < 1e-15 * p.v0 * p.v0);
    }
  }

  CVec xi(1), eta(1);
  xi << 1.0;
  eta << 1.0;
  CHECK_THROWS_AS(bifrequency_pair(p, xi, eta), InputError);
  CVec xi2(2), eta2(2);
  xi2 << 1.0, 0.0;
  eta2 << 0.0, 0.0;
  CHECK_THROWS_AS(bifrequency_pair(p, xi2, eta2), InputError);
}

TEST_CASE("input validation of the solitary-wave solver") {
  Nonlinearity nl;
  const RadialGrid grid = make_radial_grid(1, 100.0, 2000);
  CHECK_THROWS_AS(solve_soliton(1, nl, 1.0, 0.5, grid), InputError);
  CHECK_THROWS_AS(solve_soliton(1, nl, 1.0, 1.0, grid), InputError);
  CHECK_THROWS_AS(solve_soliton(1, nl, -1.0, 0.9, grid), InputError);

  Nonlinearity bad;
  bad.k = -1.0;
  CHECK_THROWS_AS(solve_soliton(1, bad, 1.0, 0.9, grid), InputError);
  Nonlinearity bad2;
  bad2.k = 1.0;
  bad2.K = 0.5;
  bad2.c = 0.1;
  CHECK_THROWS_AS(solve_soliton(1, bad2, 1.0, 0.9, grid), InputError);

  const RadialGrid tiny = make_radial_grid(1, 15.0, 500);
  CHECK_THROWS_AS(solve_soliton(1, nl, 1.0, 0.9, tiny), GridError);
}
