// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "solwave/grid.hpp"
#include "solwave/ground_state.hpp"
#include "solwave/types.hpp"

namespace solwave {

// Solitary wave of the Soler model at frequency omega, in the radial form
//   phi(x) = [ v(r) xi ; i u(r) (x/r . sigma) xi ],   r = |x|,
// where (v, u) solve the first-order system
//   v' = (f(tau) - m - omega) u,
//   u' = (omega - m + f(tau)) v - ((n-1)/r) u,     tau = v^2 - u^2,
// with u(0) = 0, v(0) = v0 > 0 and exponential decay at rate
// epsilon = sqrt(m^2 - omega^2). The sign of u follows u = -v'/(2m) > 0 in
// the nonrelativistic limit.
struct SolitonProfile {
  int n = 1;
  int N = 2;  // spinor dimension 2^[(n+1)/2]
  double omega = 0.0;
  double m = 0.0;
  double epsilon = 0.0;
  Nonlinearity nonlin;
  RadialGrid grid;
  Vec v, u;
  double v0 = 0.0;        // shooting amplitude v(0)
  double varkappa = 1.0;  // min(1, K/k - 1), 1 for a pure power
  double match_r = 0.0;   // splice radius of the bidirectional solve
  double residual = 0.0;  // |u_fwd - u_bwd| at match_r over sup|u|
};

// Bidirectionally matched shooting: v0 is bracketed by a log scan and
// bisection on the under/overshoot classification, then polished by a secant
// iteration on the u-mismatch at the splice radius (the backward leg starts
// on the stable manifold at the far end and its amplitude is calibrated so v
// matches). Nodes past match_r + 70/epsilon are flushed to zero (tail below
// representable relative accuracy).
// Errors: omega outside (m/2, m) or invalid nonlinearity -> InputError;
// grid shorter than 10/epsilon -> GridError; no shooting bracket or residual
// above tol -> SolverError; pointwise positivity v^2 - u^2 >= (v^2 + u^2)/2
// violated -> BranchError (outside the small-amplitude branch).
SolitonProfile solve_soliton(int n, const Nonlinearity& nonlin, double m,
                             double omega, const RadialGrid& grid,
                             double tol = 1e-9);

// Rescaled profiles V(t) = eps^{-1/k} v(t/eps), U(t) = eps^{-1-1/k} u(t/eps)
// against the nonrelativistic limit (V_hat, U_hat) resampled from a ground
// state of matching (n, k, m): V_hat(t) interpolated from gs, U_hat =
// -V_hat'/(2m). weighted_norm is the discrete H^1 norm of
// e^{gamma <t>} (V_tilde, U_tilde) on the symmetric line (even/odd
// extension); it decays like eps^{2 varkappa} along a family.
// Errors: mismatched (n, k, m) or gamma outside (0, 1) -> InputError;
// insufficient overlap between the rescaled abscissae and the gs grid ->
// GridError.
struct RescaledProfiles {
  Vec t;  // rescaled abscissae eps * r, truncated to the gs range
  Vec V, U;
  Vec V_tilde, U_tilde;
  double gamma = 0.5;
  double weighted_norm = 0.0;
};
RescaledProfiles rescaled_profiles(const SolitonProfile& p,
                                   const GroundState& gs, double gamma = 0.5);

// Charge Q = |S^{n-1}| int (v^2 + u^2) r^{n-1} dr.
double charge(const SolitonProfile& p);

// Q over a frequency grid with centered dQ/domega at interior nodes
// (endpoints NaN) and the Vakhitov-Kolokolov sign read off the last three
// interior nodes (unanimity required). Per-omega solves run through
// parallel_map on adaptively scaled grids (r_max = 44/epsilon); failures are
// recorded in the mask instead of aborting the sweep.
enum class ChargeSign { negative, positive, indeterminate };

struct ChargeCurve {
  std::vector<double> omegas;
  std::vector<double> Q;          // NaN where failed
  std::vector<double> dQ_domega;  // NaN at endpoints and next to failures
  std::vector<std::uint8_t> failed;
  ChargeSign sign_near_m = ChargeSign::indeterminate;
};
ChargeCurve charge_curve(int n, const Nonlinearity& nonlin, double m,
                         const std::vector<double>& omega_grid,
                         bool serial = false);

// Bi-frequency companion fields sampled along the first coordinate ray:
//   phi = [ v xi ; i u sigma_1 xi ],   chi = [ -i u sigma_1^* eta ; v eta ],
// with |xi|^2 - |eta|^2 = 1 (InputError otherwise, and for wrong spinor
// sizes). The pointwise pairing phi^* beta chi vanishes identically by the
// block structure; it is returned as evidence.
struct BifrequencyPair {
  CMat phi, chi;      // num_points x N
  CVec beta_pairing;  // phi^* beta chi per node
};
BifrequencyPair bifrequency_pair(const SolitonProfile& p, const CVec& xi,
                                 const CVec& eta);

// Spinor dimension N = 2^[(n+1)/2] used by the radial Ansatz.
int spinor_dimension(int n);

}  // namespace solwave
