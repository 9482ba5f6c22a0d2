// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <vector>

#include "solwave/types.hpp"

namespace solwave {

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
// An event returning true stops the integration at the end of the current
// accepted step.
using OdeEvent = std::function<bool(double t, const Vec& y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double dt0 = 1e-3;
  double dt_max = 0.5;
  long max_steps = 2000000;
};

struct OdeState {
  double t = 0.0;
  Vec y;
  bool event = false;  // stopped by the event callback rather than reaching t1
  long steps = 0;
};

// Adaptive Dormand-Prince 5(4). Throws SolverError when the step controller
// stalls or the step budget is exhausted.
OdeState integrate(const OdeRhs& rhs, double t0, Vec y0, double t1,
                   const OdeOptions& opt, const OdeEvent& event = nullptr);

// Integrates once, sampling the solution at the strictly increasing times
// `ts` (each >= t0); steps are clipped to land exactly on the sample points.
std::vector<Vec> integrate_at(const OdeRhs& rhs, double t0, Vec y0,
                              const std::vector<double>& ts,
                              const OdeOptions& opt);

// Bisection for a sign change of f on [a, b]; requires f(a) f(b) <= 0.
double bisect(const std::function<double(double)>& f, double a, double b,
              double tol, int max_iter = 200);

}  // namespace solwave
