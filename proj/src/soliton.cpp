// SPDX-License-Identifier: MIT
#include "solwave/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "solwave/ode.hpp"
#include "solwave/parallel.hpp"

namespace solwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

OdeRhs radial_rhs(int n, const Nonlinearity& nl, double m, double omega) {
  return [n, nl, m, omega](double r, const Vec& y, Vec& dy) {
    const double v = y[0], u = y[1];
    const double fv = nl.f(v * v - u * u);
    dy[0] = (fv - m - omega) * u;
    dy[1] = (omega - m + fv) * v - (n > 1 ? (n - 1) * u / r : 0.0);
  };
}

// Series start just off the origin: u ~ c r with n c = (omega - m + f(v0^2)) v0.
Vec series_start(int n, const Nonlinearity& nl, double m, double omega,
                 double a, double r0) {
  Vec y(2);
  y[0] = a;
  y[1] = (omega - m + nl.f(a * a)) * a / n * r0;
  return y;
}

// +1: u turned negative (v about to grow back, amplitude too small);
// -1: v crossed zero (amplitude too large); 0: no event up to r_cap.
int classify_soliton_shot(const OdeRhs& rhs, const Vec& y0, double r0,
                          double r_cap, const OdeOptions& opt) {
  const OdeState st = integrate(
      rhs, r0, y0, r_cap, opt,
      [](double, const Vec& y) { return y[0] < 0.0 || y[1] < 0.0; });
  if (!st.event) return 0;
  return st.y[0] < 0.0 ? -1 : +1;
}

// Four-point Lagrange interpolation on a sorted abscissa table; `deriv`
// selects the derivative of the interpolant. Queries clamp to one-sided
// stencils at the ends.
double lagrange4(const std::vector<double>& xs, const Vec& fs, double x,
                 bool deriv) {
  const int M = static_cast<int>(xs.size());
  int j = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) -
                           xs.begin());
  j = std::clamp(j - 2, 0, M - 4);
  double acc = 0.0;
  for (int i = j; i < j + 4; ++i) {
    if (!deriv) {
      double li = 1.0;
      for (int q = j; q < j + 4; ++q)
        if (q != i) li *= (x - xs[q]) / (xs[i] - xs[q]);
      acc += fs[i] * li;
    } else {
      double dli = 0.0;
      for (int p = j; p < j + 4; ++p) {
        if (p == i) continue;
        double term = 1.0 / (xs[i] - xs[p]);
        for (int q = j; q < j + 4; ++q)
          if (q != i && q != p) term *= (x - xs[q]) / (xs[i] - xs[q]);
        dli += term;
      }
      acc += fs[i] * dli;
    }
  }
  return acc;
}

}  // namespace

int spinor_dimension(int n) {
  int e = (n + 1) / 2;
  int N = 1;
  while (e-- > 0) N *= 2;
  return N;
}

SolitonProfile solve_soliton(int n, const Nonlinearity& nonlin, double m,
                             double omega, const RadialGrid& grid,
                             double tol) {
  if (n < 1) throw InputError("solve_soliton: n must be >= 1");
  nonlin.validate();
  if (n >= 3 && !(nonlin.k < 2.0 / (n - 2)))
    throw InputError("solve_soliton: k at or beyond the existence limit");
  if (!(m > 0)) throw InputError("solve_soliton: m must be positive");
  if (!(omega > 0.5 * m && omega < m))
    throw InputError("solve_soliton: omega must lie in (m/2, m)");
  if (!(tol > 0)) throw InputError("solve_soliton: tol must be positive");

  const double eps = std::sqrt(m * m - omega * omega);
  if (eps * grid.r_max < 10.0)
    throw GridError("solve_soliton: grid shorter than the decay scale 10/eps");

  const OdeRhs rhs = radial_rhs(n, nonlin, m, omega);
  OdeOptions opt;
  opt.rtol = std::min(1e-12, tol / 100.0);
  opt.atol = 1e-14;
  const double r0 = 1e-8;
  const double r_cap = std::min(grid.r_max, 40.0 / eps);

  auto classify = [&](double a) {
    return classify_soliton_shot(rhs, series_start(n, nonlin, m, omega, a, r0),
                                 r0, r_cap, opt);
  };

  // Log scan for an undershoot -> overshoot bracket around the
  // nonrelativistic amplitude.
  const double a_nls =
      std::pow((1.0 + nonlin.k) * eps * eps / (2.0 * m),
               1.0 / (2.0 * nonlin.k));
  double lo = 0.0, hi = 0.0;
  {
    const int S = 61;
    double prev_a = 0.0;
    int prev_kind = 0;
    for (int i = 0; i < S; ++i) {
      const double a =
          0.05 * a_nls * std::pow(400.0, static_cast<double>(i) / (S - 1));
      const int kind = classify(a);
      if (kind == 0)
        throw SolverError("solve_soliton: shot classification ran out");
      if (prev_kind == +1 && kind == -1) {
        lo = prev_a;
        hi = a;
        break;
      }
      prev_kind = kind;
      prev_a = a;
    }
    if (hi == 0.0)
      throw SolverError("solve_soliton: no shooting bracket around the "
                        "small-amplitude seed");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    const int kind = classify(mid);
    if (kind == 0) break;  // indistinguishable from the wave at this length
    (kind == +1 ? lo : hi) = mid;
  }

  // Splice radius: where the forward leg has decayed by ~3e-3 (far enough
  // that the tail is linear, close enough that the shot is still clean).
  double r_match;
  {
    const double a = 0.5 * (lo + hi);
    const double thresh = 3e-3 * a;
    const OdeState st =
        integrate(rhs, r0, series_start(n, nonlin, m, omega, a, r0), r_cap,
                  opt, [thresh](double, const Vec& y) {
                    return y[0] < thresh || y[1] < 0.0;
                  });
    if (!st.event)
      throw GridError("solve_soliton: decay threshold not reached on grid");
    r_match = st.t;
  }
  const double r_far = std::min(grid.r_max, r_match + 70.0 / eps);

  // Backward leg in s = r_far - r; the decaying mode grows backward, so any
  // small seed on the stable direction relaxes onto the manifold.
  const OdeRhs rhs_back = [&rhs, r_far](double s, const Vec& y, Vec& dy) {
    rhs(r_far - s, y, dy);
    dy = -dy;
  };
  OdeOptions opt_b = opt;
  opt_b.atol = 0.0;  // tail values span many decades; relative control only

  double delta = 0.0;  // calibrated backward amplitude (state across calls)
  auto mismatch = [&](double a) -> double {
    const std::vector<Vec> fwd =
        integrate_at(rhs, r0, series_start(n, nonlin, m, omega, a, r0),
                     {r_match}, opt);
    const double v_f = fwd[0][0], u_f = fwd[0][1];
    if (delta == 0.0) delta = v_f * std::exp(-eps * (r_far - r_match));
    double u_b = 0.0;
    for (int it = 0; it < 12; ++it) {
      Vec yb(2);
      yb[0] = delta;
      yb[1] = delta * eps / (m + omega);
      const OdeState st = integrate(rhs_back, 0.0, yb, r_far - r_match, opt_b);
      const double ratio = v_f / st.y[0];
      delta *= ratio;
      u_b = st.y[1] * ratio;  // first-order update; loop refines it
      if (std::abs(ratio - 1.0) < 2e-14) break;
    }
    return u_f - u_b;
  };

  // Secant polish of the amplitude on the u-mismatch at the splice radius.
  double a0 = lo, a1 = hi;
  double g0 = mismatch(a0), g1 = mismatch(a1);
  double best_a = std::abs(g0) < std::abs(g1) ? a0 : a1;
  double best_g = std::min(std::abs(g0), std::abs(g1));
  for (int it = 0; it < 40 && g1 != g0; ++it) {
    double a2 = a1 - g1 * (a1 - a0) / (g1 - g0);
    a2 = std::clamp(a2, lo * 0.999, hi * 1.001);
    const double g2 = mismatch(a2);
    a0 = a1;
    g0 = g1;
    a1 = a2;
    g1 = g2;
    if (std::abs(g2) < best_g) {
      best_g = std::abs(g2);
      best_a = a2;
    }
    if (std::abs(a1 - a0) < 1e-15 * a1) break;
  }

  // Final profile with the polished amplitude: forward samples up to the
  // splice, backward samples beyond it, zeros past r_far (tail below
  // representable relative accuracy).
  SolitonProfile out;
  out.n = n;
  out.N = spinor_dimension(n);
  out.omega = omega;
  out.m = m;
  out.epsilon = eps;
  out.nonlin = nonlin;
  out.grid = grid;
  out.v0 = best_a;
  out.varkappa = nonlin.varkappa();
  out.match_r = r_match;
  const int M = grid.num_points;
  out.v = Vec::Zero(M);
  out.u = Vec::Zero(M);

  const double g_final = mismatch(best_a);  // also recalibrates delta
  {
    std::vector<double> ts;
    int i = 0;
    for (; i < M && grid.nodes[i] <= r_match; ++i) ts.push_back(grid.nodes[i]);
    const int n_fwd = i;
    if (n_fwd > 0) {
      const std::vector<Vec> samp = integrate_at(
          rhs, r0, series_start(n, nonlin, m, omega, best_a, r0), ts, opt);
      for (int j = 0; j < n_fwd; ++j) {
        out.v[j] = samp[j][0];
        out.u[j] = samp[j][1];
      }
    }
    std::vector<double> ss;
    std::vector<int> idx;
    for (int j = M - 1; j >= n_fwd; --j) {
      if (grid.nodes[j] > r_far) continue;
      ss.push_back(r_far - grid.nodes[j]);
      idx.push_back(j);
    }
    if (!ss.empty()) {
      Vec yb(2);
      yb[0] = delta;
      yb[1] = delta * eps / (m + omega);
      const std::vector<Vec> samp = integrate_at(rhs_back, 0.0, yb, ss, opt_b);
      for (size_t j = 0; j < idx.size(); ++j) {
        out.v[idx[j]] = samp[j][0];
        out.u[idx[j]] = samp[j][1];
      }
    }
  }

  const double sup_u = out.u.lpNorm<Eigen::Infinity>();
  out.residual = std::abs(g_final) / sup_u;
  if (!(out.residual <= tol))
    throw SolverError("solve_soliton: matching residual " +
                      std::to_string(out.residual) + " above tol");

  // Pointwise positivity phi^* beta phi >= |phi|^2 / 2, i.e. v^2 >= 3 u^2;
  // failing it means the wave is off the small-amplitude branch.
  for (int i = 0; i < M; ++i) {
    const double v2 = out.v[i] * out.v[i], u2 = out.u[i] * out.u[i];
    if (v2 - 3.0 * u2 < -1e-10 * (v2 + u2))
      throw BranchError("solve_soliton: positivity v^2 >= 3 u^2 fails at r = " +
                        std::to_string(grid.nodes[i]));
  }
  return out;
}

double charge(const SolitonProfile& p) {
  double s = 0.0;
  for (int i = 0; i < p.grid.num_points; ++i)
    s += p.grid.weights[i] * std::pow(p.grid.nodes[i], p.n - 1) *
         (p.v[i] * p.v[i] + p.u[i] * p.u[i]);
  return sphere_area(p.n) * s;
}

RescaledProfiles rescaled_profiles(const SolitonProfile& p,
                                   const GroundState& gs, double gamma) {
  auto same_param = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
  };
  if (gs.n != p.n || !same_param(gs.k, p.nonlin.k) || !same_param(gs.m, p.m))
    throw InputError("rescaled_profiles: (n, k, m) of profile and ground "
                     "state do not match");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw InputError("rescaled_profiles: gamma must lie in (0, 1)");

  const double eps = p.epsilon;
  const double sV = std::pow(eps, -1.0 / p.nonlin.k);
  const double sU = sV / eps;

  // Keep rescaled abscissae well inside the ground-state table so the
  // four-point resampling stencils never extrapolate.
  const double t_hi = gs.grid.nodes.back() - 2.0 * gs.grid.spacing();
  int M = 0;
  while (M < p.grid.num_points && eps * p.grid.nodes[M] <= t_hi) ++M;
  if (M < 16)
    throw GridError("rescaled_profiles: rescaled abscissae barely overlap "
                    "the ground-state grid");

  RescaledProfiles out;
  out.gamma = gamma;
  out.t.resize(M);
  out.V.resize(M);
  out.U.resize(M);
  out.V_tilde.resize(M);
  out.U_tilde.resize(M);
  for (int i = 0; i < M; ++i) {
    const double t = eps * p.grid.nodes[i];
    out.t[i] = t;
    out.V[i] = sV * p.v[i];
    out.U[i] = sU * p.u[i];
    const double vhat = lagrange4(gs.grid.nodes, gs.values, t, false);
    const double uhat =
        -lagrange4(gs.grid.nodes, gs.values, t, true) / (2.0 * p.m);
    out.V_tilde[i] = out.V[i] - vhat;
    out.U_tilde[i] = out.U[i] - uhat;
  }

  // Discrete H^1 norm of e^{gamma <t>} (V_tilde, U_tilde) on the symmetric
  // line (the even/odd extension doubles the half-line integral).
  auto diff = [&](const Vec& f, int i) {
    const int hi = std::min(i + 1, M - 1), lo = std::max(i - 1, 0);
    return (f[hi] - f[lo]) / (out.t[hi] - out.t[lo]);
  };
  double acc = 0.0;
  for (int i = 0; i < M; ++i) {
    const double w = std::exp(2.0 * gamma * jbracket(out.t[i]));
    const double dv = diff(out.V_tilde, i), du = diff(out.U_tilde, i);
    acc += eps * p.grid.weights[i] * w *
           (sq(out.V_tilde[i]) + sq(out.U_tilde[i]) + sq(dv) + sq(du));
  }
  out.weighted_norm = std::sqrt(2.0 * acc);
  return out;
}

ChargeCurve charge_curve(int n, const Nonlinearity& nonlin, double m,
                         const std::vector<double>& omega_grid, bool serial) {
  const int W = static_cast<int>(omega_grid.size());
  if (W < 5) throw InputError("charge_curve: need at least 5 omega nodes");
  for (int i = 0; i < W; ++i) {
    if (!(omega_grid[i] > 0.5 * m && omega_grid[i] < m))
      throw InputError("charge_curve: omega nodes must lie in (m/2, m)");
    if (i > 0 && !(omega_grid[i] > omega_grid[i - 1]))
      throw InputError("charge_curve: omega nodes must increase strictly");
  }

  struct Item {
    double q = kNaN;
    std::uint8_t fail = 1;
  };
  const std::vector<Item> items = parallel_map<Item>(
      W,
      [&](int i) -> Item {
        const double omega = omega_grid[i];
        const double eps = std::sqrt(m * m - omega * omega);
        // Fixed resolution in the rescaled variable t = eps r.
        const double t_span = 44.0;
        const int npts = static_cast<int>(t_span / 0.015);
        const RadialGrid grid = make_radial_grid(n, t_span / eps, npts);
        Item it;
        try {
          it.q = charge(solve_soliton(n, nonlin, m, omega, grid));
          it.fail = 0;
        } catch (const SolwaveError&) {
          // recorded in the mask; the sweep continues
        }
        return it;
      },
      serial);

  ChargeCurve out;
  out.omegas = omega_grid;
  out.Q.resize(W);
  out.failed.resize(W);
  out.dQ_domega.assign(W, kNaN);
  for (int i = 0; i < W; ++i) {
    out.Q[i] = items[i].q;
    out.failed[i] = items[i].fail;
  }
  for (int i = 1; i + 1 < W; ++i)
    if (!out.failed[i - 1] && !out.failed[i + 1])
      out.dQ_domega[i] = (out.Q[i + 1] - out.Q[i - 1]) /
                         (omega_grid[i + 1] - omega_grid[i - 1]);

  // Vakhitov-Kolokolov sign from the last three interior nodes.
  int neg = 0, pos = 0, ok = 0;
  for (int i = W - 4; i <= W - 2; ++i) {
    const double d = out.dQ_domega[i];
    if (std::isnan(d)) continue;
    ++ok;
    (d < 0 ? neg : pos)++;
  }
  if (ok == 3 && neg == 3)
    out.sign_near_m = ChargeSign::negative;
  else if (ok == 3 && pos == 3)
    out.sign_near_m = ChargeSign::positive;
  else
    out.sign_near_m = ChargeSign::indeterminate;
  return out;
}

BifrequencyPair bifrequency_pair(const SolitonProfile& p, const CVec& xi,
                                 const CVec& eta) {
  const int half = p.N / 2;
  if (xi.size() != half || eta.size() != half)
    throw InputError("bifrequency_pair: spinor blocks must have size N/2");
  const double gauge = xi.squaredNorm() - eta.squaredNorm();
  if (std::abs(gauge - 1.0) > 1e-10)
    throw InputError("bifrequency_pair: need |xi|^2 - |eta|^2 = 1");
  if (p.n > 3)
    throw Unsupported("bifrequency_pair: sigma blocks provided for n <= 3");

  // sigma_1 along the first coordinate ray.
  CMat sigma1 = CMat::Identity(half, half);
  if (p.n == 3) {
    sigma1.setZero();
    sigma1(0, 1) = 1.0;
    sigma1(1, 0) = 1.0;
  }
  const CMat sigma1c = sigma1.adjoint();

  const int M = p.grid.num_points;
  const Complex I(0.0, 1.0);
  BifrequencyPair out;
  out.phi.resize(M, p.N);
  out.chi.resize(M, p.N);
  out.beta_pairing.resize(M);
  const CVec s_xi = sigma1 * xi;
  const CVec s_eta = sigma1c * eta;
  for (int i = 0; i < M; ++i) {
    out.phi.row(i).head(half) = p.v[i] * xi.transpose();
    out.phi.row(i).tail(half) = I * p.u[i] * s_xi.transpose();
    out.chi.row(i).head(half) = -I * p.u[i] * s_eta.transpose();
    out.chi.row(i).tail(half) = p.v[i] * eta.transpose();
    out.beta_pairing[i] =
        out.phi.row(i).head(half).dot(out.chi.row(i).head(half)) -
        out.phi.row(i).tail(half).dot(out.chi.row(i).tail(half));
  }
  return out;
}

}  // namespace solwave
