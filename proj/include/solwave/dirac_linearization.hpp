// SPDX-License-Identifier: MIT
#pragma once
// Real-form linearization at a 1D solitary wave (N = 2): the self-adjoint
// block L and the Hamiltonian generator JL on a symmetric line grid, the
// exact kernel / 2-omega-i structure, spectral scans across omega families,
// and the finite-dimensional reduction at the charge-critical exponent.

#include <string>
#include <vector>

#include "solwave/eig.hpp"
#include "solwave/nls_linearization.hpp"
#include "solwave/soliton.hpp"

namespace solwave {

// Assembled from the real form of the 1D Dirac matrices (alpha = sigma_1,
// beta = sigma_3, both real, duplicated over the [Re rho; Im rho] blocks) and
// the symplectic J = [[0, I_2], [-I_2, 0]]. Unknowns are ordered node-major,
// four components per node: (Re rho_1, Re rho_2, Im rho_1, Im rho_2).
//
// The line grid is the reflection of the profile's staggered radial grid, so
// the nodes are uniform, there is no node at x = 0, and the profile is
// sampled without interpolation (v extends evenly, u oddly). The derivative
// is an antisymmetric centered stencil (order 2 or 4), which keeps L exactly
// symmetric; its truncation scale on the sampled profile is recorded in
// grid_error and is the yardstick for every "exact relation" residual below.
struct DiracLinearization {
  SolitonProfile profile;
  Grid1D grid;
  Vec v, u;                  // line samples of the profile components
  SpMat L;                   // 4B x 4B, symmetric
  SpMat JL;
  Mat alpha_mat, beta_mat, J_mat;  // constant 4 x 4 blocks
  Mat pi_P, pi_A, Pi;              // projectors: beta = +1, beta = -1, onto Xi
  Vec Xi;                          // embedded spinor direction [1, 0, 0, 0]
  std::vector<Mat> V_blocks;       // nodewise 4 x 4 potential matrix
  int stencil_order = 4;
  double grid_error = 0.0;
};

// Requires profile.n == 1 (throws Unsupported otherwise; higher dimensions
// have no full-grid assembly here and their claims are tested on the
// Schroedinger side). The operator is validated to be symmetric to 1e-12.
DiracLinearization build_linearization(const SolitonProfile& profile,
                                       int stencil_order = 4);

// Nodewise fitted constants of the rescaled potential bounds. With
// V_eps(y) = eps^{-2} v(x), y = eps x, and q(y) = u_k(y)^{2k} from the
// Schroedinger ground state, the fits are the suprema over nodes with
// q >= q_floor of
//   c_full:  |V_eps| / q
//   c_cross: |pi_P V_eps pi_A| / (eps q)
//   c_block: |pi_S (V_eps + q (1 + 2k Pi) beta) pi_S| / (eps^{2 varkappa} q),
// the last one maximized over both diagonal sectors pi_S in {pi_P, pi_A}.
// Matrix norms are spectral. The constants stay bounded under grid
// refinement and under eps -> 0.
struct PotentialBoundFit {
  double c_full = 0.0;
  double c_cross = 0.0;
  double c_block = 0.0;
  double q_floor = 0.0;
};
PotentialBoundFit potential_bound_fit(const DiracLinearization& lin,
                                      const GroundState& gs,
                                      double q_floor = 1e-8);

// Exact structure at lambda = 0. dim_ker counts singular values of L below
// 1e3 * grid_error (the kernel vectors J phi and d_x phi are exact relations,
// so their discrete eigenvalues sit at truncation scale, far below the first
// physical eigenvalue at scale eps^2). dim_generalized is the rank of the
// Riesz projector of JL over the circle |z| = delta eps^2; a contour hitting
// an eigenvalue cluster is retried at perturbed delta and, if every retry
// fails, ContourError propagates. Residuals are 2-norm relative to the
// vector norm; the chain vector d_omega phi comes from centered differencing
// of two profiles re-solved at omega +- eps^2/10 on the same radial grid.
struct NullSpaceReport {
  int dim_ker = 0;
  int dim_generalized = 0;
  double res_jphi = 0.0;   // L (J phi)
  double res_dxphi = 0.0;  // L (d_x phi)
  double res_chain = 0.0;  // JL (d_omega phi) - J phi, relative to |J phi|
  double delta = 0.2;
  double grid_error = 0.0;
};
NullSpaceReport kernel_report(const DiracLinearization& lin,
                              double delta = 0.2);

// The +2 omega i eigenvalue carried by the bi-frequency companion: for
// chi = [-i u_odd eta; v eta] the complexified real-form vector [chi; -i chi]
// is an exact eigenvector of JL. The eigenvalue is recomputed by a
// shift-invert solve at 2 omega i, then refined by Richardson extrapolation
// against a once-doubled grid (the profile is re-solved there), so lambda_gap
// measures |lambda - 2 omega i| after extrapolation. Multiplicity counts the
// localized converged pairs inside the 1e-6 m window around 2 omega i; the
// delocalized discretized-band neighbors are excluded.
struct TwoOmegaReport {
  double residual = 0.0;     // |(JL - 2 omega i) chi'| / |chi'|
  Complex lambda_coarse;
  Complex lambda_fine;
  Complex lambda;            // Richardson-extrapolated
  double lambda_gap = 0.0;
  int multiplicity = 0;
  double grid_error = 0.0;
};
TwoOmegaReport verify_pm2omega(const DiracLinearization& lin,
                               Complex eta = Complex(1.0, 0.0));

// Scan region, in units of m: the closed rectangle |Re| <= re_half_width,
// |Im| <= im_height, minus disks of radius band_margin around the gap edges
// +-(m - omega) i, where misclassified truncation artifacts would dominate
// any verdict. The embedded thresholds +-(m + omega) i need no exclusion:
// artifacts there are caught by the delocalization rule.
struct SpectralRegion {
  double re_half_width = 0.5;
  double im_height = 2.5;
  double band_margin = 5e-4;
};

// Classification of a discrete mode. Box artifacts of the truncated
// essential spectrum are recognized by delocalization (less than 90% of the
// mass in the inner half of the domain, or more than 50% in the outer 20%);
// lattice doubler modes of the centered stencil by their oscillation index
// (fraction of sign alternations of the dominant component above 0.6).
enum class ModeClass { point, band_artifact, doubler };

struct ModeEntry {
  Complex lambda;
  double residual = 0.0;
  ModeClass klass = ModeClass::point;
  double inner_mass = 0.0;  // fraction of mass in |x| <= r_max / 2
  double osc_index = 0.0;
};

struct SpectrumScan {
  int n = 1;
  Nonlinearity nonlin;
  std::vector<double> omegas;
  std::vector<double> epsilons;
  std::vector<std::vector<ModeEntry>> modes;        // per omega, all classes
  std::vector<std::vector<Complex>> z_values;       // point modes near 2 m i
  std::vector<std::vector<Complex>> Lambda_values;  // point modes near 0
  std::vector<double> band_edge_expected;           // m - omega
  std::vector<double> band_edge_detected;           // min |Im| of artifacts
  std::vector<char> failed;                         // per-omega solve failure
  double m = 1.0;
  double tol = 1e-11;
};

// Shift-invert sweeps at a ladder of imaginary shifts covering the region,
// plus dedicated shifts at 0, 2 omega i and 2 m i. Per-omega jobs run
// concurrently (serial flag for the reference path); failures are masked in
// `failed`, never thrown. Scaled spectral data: z = -(2 omega + i lambda) /
// eps^2 for point modes within 0.2 m of 2 m i, Lambda = lambda / eps^2 for
// point modes within 0.2 m of 0.
SpectrumScan spectrum_scan(int n, const Nonlinearity& nonlin, double m,
                           const std::vector<double>& omegas,
                           const SpectralRegion& region = {},
                           bool serial = false);

// Consistency of the near-origin family with the charge curve: a real pair
// must be present exactly when the charge slope near m is positive. When the
// pair exists at three or more omegas, log lambda_+ vs log eps is fitted;
// exponent 2 is the scaling of every origin bifurcation here. Throws
// FitError when the pair exists at fewer than three omegas (no exponent) and
// InputError when the scan and the curve were built over different omegas.
struct OriginTrack {
  bool real_pair = false;
  double exponent = 0.0;      // NaN when no pair anywhere
  ChargeSign curve_sign = ChargeSign::indeterminate;
  bool consistent = false;
};
OriginTrack track_origin(const SpectrumScan& scan, const ChargeCurve& curve);

// Classification of the 2 m i families by the scaled coordinate z. Each
// point mode near 2 m i is labelled exact-zero (|z| <= tol_z), sigma-d
// (within 5e-2 of a discrete Schroedinger eigenvalue below the edge),
// near-edge (within 5e-2 of 1/(2m)), or unclassified; nothing is dropped.
// With a regular threshold and trivial discrete spectrum every family must
// be exact-zero; all_exact_zero records that.
struct TwoMiFamily {
  double omega = 0.0;
  Complex lambda;
  Complex z;
  std::string klass;
};
struct TwoMiTrack {
  std::vector<TwoMiFamily> families;
  bool all_exact_zero = false;
  double max_abs_z = 0.0;
};
TwoMiTrack track_2mi(const SpectrumScan& scan, const NlsLinearization& nls,
                     double tol_z = 1e-6);

enum class Stability { stable, unstable, indeterminate };

// Unstable iff some point mode in some converged omega slice has
// Re lambda > tol (after the conjugation/negation cleanup); stable iff all
// point modes obey Re lambda <= tol and every slice converged; indeterminate
// when a slice failed.
Stability stability_verdict(const SpectrumScan& scan, double tol);

// Finite-dimensional block of the generator on its generalized null space at
// the charge-critical exponent k = 2/n (n = 1 here, so k = 2; NotCritical
// otherwise). The basis (e1, e2, e3, e4) is built from the exact scalings of
// J phi and d_omega phi and from the Riesz-projected images of the
// Schroedinger chain vectors; sigma2 and sigma3 are read off a least-squares
// expansion of the generator image of e3, sigma4 is derived from the pairing
// relation sigma2 * dQ/domega = 2 mu(omega) sigma4 and cross-checked against
// the expansion coefficient. mu_limit is the chain pairing <alpha, l+ alpha>
// evaluated on the Schroedinger grid; mu_omega is -<J^{-1} e1, e4> at the
// sampled omega and converges to mu_limit. predicted_lambda = eps^2
// sqrt(sigma4) when sigma4 > 0, else NaN (no real pair predicted).
struct ReducedBlockReport {
  double omega = 0.0;
  double epsilon = 0.0;
  double mu_limit = 0.0;
  double mu_omega = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double sigma4 = 0.0;            // from the pairing relation
  double sigma4_expansion = 0.0;  // least-squares coefficient at e4
  double dQ_domega = 0.0;
  double pairing_identity_gap = 0.0;  // |<J^{-1}e1, e2> - dQ/2| / |dQ/2|
  double expansion_residual = 0.0;    // relative LS defect of the expansion
  double predicted_lambda = 0.0;      // NaN unless sigma4 > 0
};
ReducedBlockReport reduced_block(const NlsLinearization& nls,
                                 const JordanChainNLS& chain,
                                 const Nonlinearity& nonlin, double m,
                                 double omega);

}  // namespace solwave
