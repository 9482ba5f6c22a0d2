// SPDX-License-Identifier: MIT
#pragma once

#include "solwave/grid.hpp"
#include "solwave/operators.hpp"
#include "solwave/types.hpp"

namespace solwave {

// Tail-envelope fit of a radial profile against c <r>^{-exponent} e^{-rate r}
// over the window [0.5, 0.9] * r_max.
struct DecayFit {
  double c_lo = 0.0;       // envelope constant range over the window
  double c_hi = 0.0;
  double exponent = 0.0;   // fitted power of <r>; (n-1)/2 for the ground state
  double rate = 0.0;       // fitted exponential rate; 1 in normalized units
};

// Positive radial ground state of  u'' + ((n-1)/r) u' - u + 2m |u|^{2k} u = 0
// with u'(0) = 0 and decay at infinity, sampled on a radial grid.
struct GroundState {
  int n = 1;
  double k = 1.0;
  double m = 1.0;
  RadialGrid grid;
  Vec values;
  double peak = 0.0;       // even-quadratic extrapolation of u to r = 0
  DecayFit decay_fit;
  double residual = 0.0;   // max-norm residual of the discrete equation
  int order = 2;           // stencil order used for the polish
  double tol = 1e-10;
};

// Closed form for n = 1: u(x) = ((1+k)/(2m))^{1/(2k)} sech^{1/k}(k x).
double closed_form_peak(double k, double m);
Vec closed_form_profile(double k, double m, const std::vector<double>& nodes);

// Shooting (adaptive RK, integrator tolerance tol/10, bracket scan of u(0)
// over [1e-3, 1e3]) followed by a damped-Newton polish of the conservative
// finite-difference system on the grid, so the discrete residual reaches tol.
// Requires k < 2/(n-2) for n >= 3 (no decaying state otherwise).
GroundState solve_ground_state(int n, double k, double m,
                               const RadialGrid& grid, double tol = 1e-10,
                               int order = 2);

// Fits the decay envelope on the tail window; requires the tail to have
// entered the asymptotic regime (values below 1e-3 * peak), else GridError.
// Throws FitError when the fitted rate deviates from 1 by more than 5%.
DecayFit check_decay(const GroundState& gs);

// Limit profiles on the symmetric line: V(t) = u(|t|) on the reflected node
// set and U = -(2m)^{-1} V' on the dual (integer-offset) grid, so that the
// first-order relation V' + 2m U = 0 holds exactly and the second relation
// (1/2m) V + U' + ((n-1)/t) U = |V|^{2k} V reproduces the discrete residual
// of the ground-state solve.
struct LimitProfiles {
  Grid1D grid;        // primal nodes (reflected radial nodes), V lives here
  Vec V_hat;
  Grid1D grid_dual;   // dual nodes (cell faces incl. t = 0), U lives here
  Vec U_hat;
  double gamma = 0.5; // exponential weight carried into later comparisons
  double residual_first_order = 0.0;
  double residual_second_order = 0.0;
};
LimitProfiles limit_profiles(const GroundState& gs, double gamma = 0.5);

// L^2 norm squared over R^n (full solid angle).
double nls_charge(const GroundState& gs);

double sphere_area(int n);  // |S^{n-1}|, with the n = 1 convention 2

// Bidirectionally matched shooting profile for n = 1, free of the forward
// shot's exponential error growth: the forward trajectory is kept only up to
// the matching point (u = 0.05 peak); the tail is integrated backward from
// x_far along the stable manifold and scaled to match there. The derivative
// jump at the matching point is the a-posteriori accuracy certificate; the
// profile agrees with the closed form at the 1e-9 level.
struct MatchedShot {
  std::vector<double> xs;  // sample abscissas (strictly increasing, from 0)
  Vec u;
  double match_x = 0.0;
  double deriv_jump = 0.0;  // |u'_fwd - u'_bwd| at match_x, scaled by peak
};
MatchedShot matched_shot_1d(double k, double m, const std::vector<double>& xs,
                            double x_far = 30.0);

}  // namespace solwave
