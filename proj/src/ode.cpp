// SPDX-License-Identifier: MIT
#include "solwave/ode.hpp"

#include <algorithm>
#include <cmath>

namespace solwave {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33,
                 A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
// y5 - y4 error weights.
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

struct Stepper {
  const OdeRhs& rhs;
  Vec k1, k2, k3, k4, k5, k6, k7, ytmp;

  explicit Stepper(const OdeRhs& f, Eigen::Index n) : rhs(f) {
    for (Vec* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp}) v->resize(n);
  }

  // One trial step from (t, y) with size h; fills ynew and returns the
  // normalized error estimate. k1 must hold rhs(t, y) on entry (FSAL).
  double step(double t, const Vec& y, double h, Vec& ynew, double rtol,
              double atol) {
    ytmp = y + h * (A21 * k1);
    rhs(t + C2 * h, ytmp, k2);
    ytmp = y + h * (A31 * k1 + A32 * k2);
    rhs(t + C3 * h, ytmp, k3);
    ytmp = y + h * (A41 * k1 + A42 * k2 + A43 * k3);
    rhs(t + C4 * h, ytmp, k4);
    ytmp = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
    rhs(t + C5 * h, ytmp, k5);
    ytmp = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    rhs(t + h, ynew, k7);

    double err2 = 0.0;
    const Eigen::Index n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] +
                            E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err2 += (e / sc) * (e / sc);
    }
    return std::sqrt(err2 / static_cast<double>(n));
  }
};

}  // namespace

OdeState integrate(const OdeRhs& rhs, double t0, Vec y0, double t1,
                   const OdeOptions& opt, const OdeEvent& event) {
  if (!(t1 > t0)) throw InputError("integrate: requires t1 > t0");
  OdeState st;
  st.t = t0;
  st.y = std::move(y0);

  Stepper sp(rhs, st.y.size());
  rhs(st.t, st.y, sp.k1);
  double h = std::min(opt.dt0, t1 - t0);
  Vec ynew(st.y.size());

  while (st.t < t1) {
    if (st.steps++ > opt.max_steps)
      throw SolverError("integrate: step budget exhausted at t = " +
                        std::to_string(st.t));
    h = std::min({h, opt.dt_max, t1 - st.t});
    if (h < 1e-14 * (1.0 + std::abs(st.t)))
      throw SolverError("integrate: step size underflow at t = " +
                        std::to_string(st.t));

    const double err = sp.step(st.t, st.y, h, ynew, opt.rtol, opt.atol);
    if (err <= 1.0) {
      st.t += h;
      st.y = ynew;
      sp.k1 = sp.k7;  // FSAL
      if (event && event(st.t, st.y)) {
        st.event = true;
        return st;
      }
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
  }
  return st;
}

std::vector<Vec> integrate_at(const OdeRhs& rhs, double t0, Vec y0,
                              const std::vector<double>& ts,
                              const OdeOptions& opt) {
  std::vector<Vec> out;
  out.reserve(ts.size());
  double t = t0;
  Vec y = std::move(y0);
  for (double target : ts) {
    if (target < t - 1e-14)
      throw InputError("integrate_at: sample times must be increasing");
    if (target > t + 1e-14) {
      OdeState st = integrate(rhs, t, y, target, opt);
      t = st.t;
      y = st.y;
    }
    out.push_back(y);
  }
  return out;
}

double bisect(const std::function<double(double)>& f, double a, double b,
              double tol, int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0)
    throw BracketError("bisect: no sign change on the given interval");
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if (fa * fc < 0.0) {
      b = c;
      fb = fc;
    } else {
      a = c;
      fa = fc;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace solwave
