// SPDX-License-Identifier: MIT
#include "solwave/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "solwave/ode.hpp"

namespace solwave {

double closed_form_peak(double k, double m) {
  return std::pow((1.0 + k) / (2.0 * m), 1.0 / (2.0 * k));
}

Vec closed_form_profile(double k, double m, const std::vector<double>& nodes) {
  Vec u(static_cast<Eigen::Index>(nodes.size()));
  const double amp = closed_form_peak(k, m);
  for (size_t i = 0; i < nodes.size(); ++i)
    u[static_cast<Eigen::Index>(i)] =
        amp * std::pow(1.0 / std::cosh(k * nodes[i]), 1.0 / k);
  return u;
}

double sphere_area(int n) {
  if (n == 1) return 2.0;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

enum class ShotKind { overshoot, undershoot, decayed };

// Integrates the radial equation outward from a series start at r0 and
// classifies the trajectory. The homoclinic orbit separates initial heights
// that cross zero (too high) from those that turn back up (too low).
ShotKind classify_shot(int n, double k, double m, double a, double r_end,
                       double ode_tol) {
  const double p = 2.0 * k + 1.0;
  OdeRhs rhs = [&, n, m, p](double r, const Vec& y, Vec& dy) {
    dy[0] = y[1];
    dy[1] = y[0] - 2.0 * m * std::pow(std::abs(y[0]), p - 1.0) * y[0];
    if (n > 1) dy[1] -= (n - 1) * y[1] / r;
  };

  const double r0 = 1e-6;
  const double c2 = (a - 2.0 * m * std::pow(a, p)) / (2.0 * n);
  Vec y0(2);
  y0 << a + c2 * r0 * r0, 2.0 * c2 * r0;

  ShotKind kind = ShotKind::decayed;
  OdeEvent ev = [&](double, const Vec& y) {
    if (y[0] <= 0.0) {
      kind = ShotKind::overshoot;
      return true;
    }
    // In 1D any turnaround is conclusive: below the separatrix the orbit
    // oscillates in the potential well without ever dipping below a fixed
    // fraction of its start. With radial damping (n > 1) the height guard
    // protects against sign noise in y[1] near the series start.
    if (y[1] > 0.0 && (n == 1 || y[0] < 0.5 * a)) {
      kind = ShotKind::undershoot;
      return true;
    }
    if (y[0] < 1e-12 * a) return true;  // effectively decayed
    return false;
  };

  OdeOptions opt;
  opt.rtol = ode_tol;
  opt.atol = ode_tol * a;
  opt.dt0 = 1e-4;
  integrate(rhs, r0, y0, r_end, opt, ev);
  return kind;
}

// Seed profile from the converged shot, extended by the linear decay envelope
// once the trajectory leaves its trust region.
Vec shot_profile(int n, double k, double m, double a,
                 const std::vector<double>& nodes, double ode_tol) {
  const double p = 2.0 * k + 1.0;
  OdeRhs rhs = [&, n, m, p](double r, const Vec& y, Vec& dy) {
    dy[0] = y[1];
    dy[1] = y[0] - 2.0 * m * std::pow(std::abs(y[0]), p - 1.0) * y[0];
    if (n > 1) dy[1] -= (n - 1) * y[1] / r;
  };

  const double r0 = 1e-6;
  const double c2 = (a - 2.0 * m * std::pow(a, p)) / (2.0 * n);
  Vec y = (Vec(2) << a + c2 * r0 * r0, 2.0 * c2 * r0).finished();

  OdeOptions opt;
  opt.rtol = ode_tol;
  opt.atol = ode_tol * a;
  opt.dt0 = 1e-4;

  Vec out(static_cast<Eigen::Index>(nodes.size()));
  double t = r0;
  bool trusted = true;
  double last_good_r = r0, last_good_u = a;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const double target = nodes[i];
    if (trusted && target > t) {
      // Trust ends at the first turnaround: bisection cannot place the
      // initial height closer than one ulp, and past the resulting dip
      // (depth ~ sqrt(ulp), far above any fixed floor) the trajectory is
      // the oscillatory wrong branch, not the decaying tail.
      OdeState st = integrate(rhs, t, y, target, opt, [&](double, const Vec& v) {
        return v[1] > 0.0 || v[0] < 1e-10 * a || v[0] > 2.0 * a || v[0] < 0.0;
      });
      t = st.t;
      y = st.y;
      if (st.event || y[0] <= 0.0) trusted = false;
    }
    if (trusted) {
      out[static_cast<Eigen::Index>(i)] = std::max(y[0], 0.0);
      last_good_r = t;
      last_good_u = std::max(y[0], 1e-300);
    } else {
      // e^{-r} <r>^{-(n-1)/2} continuation from the last trusted sample.
      const double env = std::exp(-(nodes[i] - last_good_r)) *
                         std::pow(jbracket(last_good_r) / jbracket(nodes[i]),
                                  0.5 * (n - 1));
      out[static_cast<Eigen::Index>(i)] = last_good_u * env;
    }
  }
  return out;
}

}  // namespace

GroundState solve_ground_state(int n, double k, double m,
                               const RadialGrid& grid, double tol, int order) {
  if (n < 1) throw InputError("solve_ground_state: n must be >= 1");
  if (!(k > 0)) throw InputError("solve_ground_state: k must be positive");
  if (!(m > 0)) throw InputError("solve_ground_state: m must be positive");
  if (n >= 3 && !(k < 2.0 / (n - 2)))
    throw DomainError("solve_ground_state: k >= 2/(n-2), no decaying state");
  if (!(tol > 0)) throw InputError("solve_ground_state: tol must be positive");
  if (grid.n_dim != n)
    throw InputError("solve_ground_state: grid dimension mismatch");

  const double ode_tol = tol / 10.0;
  // Classification is reliable well before r_max; long shots only accumulate
  // error in the unstable direction.
  const double r_end = std::min(grid.r_max, 40.0);

  // Bracket scan over the initial height, log-spaced.
  const double lo = 1e-3, hi = 1e3;
  const int scan = 61;
  double a_under = -1.0, a_over = -1.0;
  double prev_a = lo;
  ShotKind prev = classify_shot(n, k, m, lo, r_end, ode_tol);
  if (prev == ShotKind::overshoot)
    throw SolverError("solve_ground_state: scan start already overshoots");
  for (int i = 1; i < scan; ++i) {
    const double a = lo * std::pow(hi / lo, double(i) / (scan - 1));
    const ShotKind kind = classify_shot(n, k, m, a, r_end, ode_tol);
    if (kind == ShotKind::overshoot) {
      a_under = prev_a;
      a_over = a;
      break;
    }
    prev_a = a;
  }
  if (a_over < 0)
    throw SolverError("solve_ground_state: no overshoot up to u(0) = 1e3");

  // Bisection on the shot classification.
  while (a_over - a_under > 1e-13 * a_over) {
    const double mid = 0.5 * (a_under + a_over);
    if (classify_shot(n, k, m, mid, r_end, ode_tol) == ShotKind::overshoot)
      a_over = mid;
    else
      a_under = mid;
  }
  const double a_star = 0.5 * (a_under + a_over);

  GroundState gs;
  gs.n = n;
  gs.k = k;
  gs.m = m;
  gs.grid = grid;
  gs.order = order;
  gs.tol = tol;
  gs.values = shot_profile(n, k, m, a_star, grid.nodes, ode_tol);

  // Damped Newton on the conservative discrete system
  //   L u - u + 2m |u|^{2k} u = 0.
  DiscreteOperator L = build_laplacian_radial(grid, n, 0, order);
  const int M = grid.num_points;
  const double p = 2.0 * k;

  auto F = [&](const Vec& u) -> Vec {
    Vec r = (L.matrix * u.cast<Complex>()).real();
    for (int i = 0; i < M; ++i)
      r[i] += -u[i] + 2.0 * m * std::pow(std::abs(u[i]), p) * u[i];
    return r;
  };

  Vec u = gs.values;
  double fnorm = F(u).lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<CSpMat> lu;
  for (int it = 0; it < 60 && fnorm > tol; ++it) {
    CSpMat J = L.matrix;
    std::vector<Eigen::Triplet<Complex>> dtrip;
    dtrip.reserve(M);
    for (int i = 0; i < M; ++i)
      dtrip.emplace_back(
          i, i,
          Complex(-1.0 + 2.0 * m * (p + 1.0) * std::pow(std::abs(u[i]), p), 0));
    CSpMat D(M, M);
    D.setFromTriplets(dtrip.begin(), dtrip.end());
    J += D;
    J.makeCompressed();
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("solve_ground_state: Newton Jacobian singular");
    Vec step = -lu.solve(F(u).cast<Complex>()).real();

    double damp = 1.0;
    for (int half = 0; half < 40; ++half) {
      Vec trial = u + damp * step;
      const double fn = F(trial).lpNorm<Eigen::Infinity>();
      if (fn < fnorm) {
        u = trial;
        fnorm = fn;
        break;
      }
      damp *= 0.5;
      if (half == 39)
        throw SolverError("solve_ground_state: Newton line search stalled");
    }
  }
  if (fnorm > tol)
    throw SolverError("solve_ground_state: Newton residual " +
                      std::to_string(fnorm) + " above tol");

  gs.values = u;
  gs.residual = fnorm;

  // Peak by even-quadratic extrapolation through the first two nodes.
  {
    const double r0 = grid.nodes[0], r1 = grid.nodes[1];
    gs.peak = (u[0] * r1 * r1 - u[1] * r0 * r0) / (r1 * r1 - r0 * r0);
  }
  gs.decay_fit = check_decay(gs);
  return gs;
}

DecayFit check_decay(const GroundState& gs) {
  const auto& r = gs.grid.nodes;
  const int M = gs.grid.num_points;
  const double w_lo = 0.5 * gs.grid.r_max, w_hi = 0.9 * gs.grid.r_max;

  std::vector<int> idx;
  for (int i = 0; i < M; ++i)
    if (r[i] >= w_lo && r[i] <= w_hi && gs.values[i] > 0) idx.push_back(i);
  if (idx.size() < 8)
    throw GridError("check_decay: tail window has too few usable nodes");
  for (int i : idx)
    if (gs.values[i] >= 1e-3 * gs.peak)
      throw GridError("check_decay: tail has not entered asymptotic regime");

  // log u = log c - rate * r - exponent * log <r>.
  const int nw = static_cast<int>(idx.size());
  Mat A(nw, 3);
  Vec b(nw);
  for (int j = 0; j < nw; ++j) {
    A(j, 0) = 1.0;
    A(j, 1) = -r[idx[j]];
    A(j, 2) = -std::log(jbracket(r[idx[j]]));
    b[j] = std::log(gs.values[idx[j]]);
  }
  Vec coef = A.colPivHouseholderQr().solve(b);

  DecayFit fit;
  fit.rate = coef[1];
  fit.exponent = coef[2];
  if (std::abs(fit.rate - 1.0) > 0.05)
    throw FitError("check_decay: fitted rate " + std::to_string(fit.rate) +
                   " departs from 1 by more than 5%");

  fit.c_lo = std::numeric_limits<double>::infinity();
  fit.c_hi = 0.0;
  for (int i : idx) {
    const double env =
        std::pow(jbracket(r[i]), -0.5 * (gs.n - 1)) * std::exp(-r[i]);
    const double c = gs.values[i] / env;
    fit.c_lo = std::min(fit.c_lo, c);
    fit.c_hi = std::max(fit.c_hi, c);
  }
  return fit;
}

LimitProfiles limit_profiles(const GroundState& gs, double gamma) {
  if (gs.grid.scheme != RadialScheme::uniform)
    throw Unsupported("limit_profiles: uniform radial scheme required");
  const int M = gs.grid.num_points;
  const double h = gs.grid.spacing();

  LimitProfiles lp;
  lp.gamma = gamma;

  // Primal grid: reflected staggered nodes +-(i+1/2)h, no node at 0.
  lp.grid.x_min = -gs.grid.nodes[M - 1];
  lp.grid.x_max = gs.grid.nodes[M - 1];
  lp.grid.num_points = 2 * M;
  lp.grid.nodes.resize(2 * M);
  lp.V_hat.resize(2 * M);
  for (int i = 0; i < M; ++i) {
    lp.grid.nodes[M + i] = gs.grid.nodes[i];
    lp.grid.nodes[M - 1 - i] = -gs.grid.nodes[i];
    lp.V_hat[M + i] = gs.values[i];
    lp.V_hat[M - 1 - i] = gs.values[i];
  }

  // Dual grid: integer faces j h, j = -(M-1) .. (M-1); U odd with U(0) = 0.
  lp.grid_dual.x_min = -(M - 1) * h;
  lp.grid_dual.x_max = (M - 1) * h;
  lp.grid_dual.num_points = 2 * M - 1;
  lp.grid_dual.nodes.resize(2 * M - 1);
  lp.U_hat.resize(2 * M - 1);
  for (int j = -(M - 1); j <= M - 1; ++j) {
    const int a = j + M - 1;
    lp.grid_dual.nodes[a] = j * h;
    lp.U_hat[a] =
        -(lp.V_hat[M + j] - lp.V_hat[M + j - 1]) / (2.0 * gs.m * h);
  }

  // First-order relation V' + 2m U = 0 holds by construction on dual nodes.
  lp.residual_first_order = 0.0;

  // Second relation on primal interior nodes reproduces the conservative
  // discrete ground-state residual divided by 2m.
  double res2 = 0.0;
  for (int i = 0; i < M - 1; ++i) {  // radial index; skip outermost cell
    const double t = gs.grid.nodes[i];
    const double Ur = lp.U_hat[M + i];      // face at (i+1) h ... right of node
    const double Ul = lp.U_hat[M + i - 1];  // face at i h
    double div;
    if (gs.n == 1) {
      div = (Ur - Ul) / h;
    } else {
      const double fr = std::pow((i + 1) * h, gs.n - 1);
      const double fl = std::pow(i * h, gs.n - 1);
      div = (fr * Ur - fl * Ul) / (std::pow(t, gs.n - 1) * h);
    }
    const double lhs = lp.V_hat[M + i] / (2.0 * gs.m) + div;
    const double rhs =
        std::pow(std::abs(lp.V_hat[M + i]), 2.0 * gs.k) * lp.V_hat[M + i];
    res2 = std::max(res2, std::abs(lhs - rhs));
  }
  lp.residual_second_order = res2;
  if (res2 > 10.0 * gs.tol)
    throw SolverError("limit_profiles: second-order residual above 10*tol");
  return lp;
}

MatchedShot matched_shot_1d(double k, double m, const std::vector<double>& xs,
                            double x_far) {
  if (k <= 0.0 || m <= 0.0)
    throw InputError("matched_shot_1d: need k > 0 and m > 0");
  if (xs.empty() || xs.front() < 0.0)
    throw InputError("matched_shot_1d: samples must start at x >= 0");
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    if (xs[i + 1] <= xs[i])
      throw InputError("matched_shot_1d: samples must increase");
  if (xs.back() > x_far - 5.0)
    throw InputError("matched_shot_1d: x_far leaves no room for the tail leg");

  const double p = 2.0 * k + 1.0;
  OdeRhs rhs = [m, p](double, const Vec& y, Vec& dy) {
    dy[0] = y[1];
    dy[1] = y[0] - 2.0 * m * std::pow(std::abs(y[0]), p - 1.0) * y[0];
  };

  // Separatrix height to one ulp; the closed form brackets it from both sides.
  const double peak = closed_form_peak(k, m);
  double lo = 0.8 * peak, hi = 1.25 * peak;
  const double ode_tol = 1e-12;
  for (int it = 0; classify_shot(1, k, m, lo, x_far + 10.0, ode_tol) !=
                   ShotKind::undershoot;
       ++it) {
    if (it >= 200)
      throw SolverError("matched_shot_1d: no undershoot bracket found");
    lo *= 0.9;
  }
  for (int it = 0; classify_shot(1, k, m, hi, x_far + 10.0, ode_tol) !=
                   ShotKind::overshoot;
       ++it) {
    if (it >= 200)
      throw SolverError("matched_shot_1d: no overshoot bracket found");
    hi *= 1.1;
  }
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (classify_shot(1, k, m, mid, x_far + 10.0, ode_tol) ==
        ShotKind::overshoot)
      hi = mid;
    else
      lo = mid;
  }
  const double a = 0.5 * (lo + hi);

  OdeOptions opt;
  opt.rtol = 1e-13;
  opt.atol = 1e-15 * a;
  opt.dt0 = 1e-4;

  // Forward leg stops where the trajectory has fallen to 0.05 peak: beyond
  // that, bisection error is amplified along the unstable direction.
  Vec y0 = (Vec(2) << a, 0.0).finished();
  OdeState st = integrate(rhs, 0.0, y0, x_far, opt, [&](double, const Vec& y) {
    return y[0] <= 0.05 * a;
  });
  if (!st.event)
    throw SolverError("matched_shot_1d: forward leg never reached 0.05 peak");
  const double x_m = st.t;
  const Vec y_m = st.y;

  // Backward leg in s = x_far - x: the decaying tail becomes the dominant
  // (stable-to-integrate) mode. The pure-exponential seed is exact to machine
  // precision because nonlinear corrections enter at relative order delta^2k.
  // Rescaling a computed trajectory would NOT stay on the solution manifold
  // (the equation is nonlinear), so instead the seed amplitude itself is
  // calibrated until the backward trajectory passes through the forward
  // leg's endpoint height; each trial is a genuine solution.
  std::vector<double> ss;
  for (size_t i = xs.size(); i-- > 0;)
    if (xs[i] > x_m) ss.push_back(x_far - xs[i]);
  const double s_end = x_far - x_m;
  ss.push_back(s_end);

  double delta = 1e-12 * peak;
  for (int it = 0; it < 12; ++it) {
    const OdeState bw = integrate(
        rhs, 0.0, (Vec(2) << delta, delta).finished(), s_end, opt);
    const double ratio = y_m[0] / bw.y[0];
    delta *= ratio;
    if (std::abs(ratio - 1.0) < 2e-14) break;
  }

  // The equation is autonomous and reflection-even, so the same right-hand
  // side integrates w(s) = u(x_far - s).
  std::vector<Vec> tail =
      integrate_at(rhs, 0.0, (Vec(2) << delta, delta).finished(), ss, opt);

  const Vec w_end = tail.back();
  MatchedShot out;
  out.xs = xs;
  out.match_x = x_m;
  out.deriv_jump = std::abs(y_m[1] + w_end[1]) / peak;

  out.u.resize(static_cast<Eigen::Index>(xs.size()));
  size_t tail_at = tail.size() - 1;  // tail[] is ordered by decreasing x
  Vec yf = (Vec(2) << a, 0.0).finished();
  double t = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= x_m) {
      if (xs[i] > t) {
        OdeState fw = integrate(rhs, t, yf, xs[i], opt);
        t = fw.t;
        yf = fw.y;
      }
      out.u[static_cast<Eigen::Index>(i)] = yf[0];
    } else {
      --tail_at;
      out.u[static_cast<Eigen::Index>(i)] = tail[tail_at][0];
    }
  }
  return out;
}

double nls_charge(const GroundState& gs) {
  Vec u2 = gs.values.array().square();
  return sphere_area(gs.n) * integrate_radial(gs.grid, u2);
}

}  // namespace solwave
