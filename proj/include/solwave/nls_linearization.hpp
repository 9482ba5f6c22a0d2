// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "solwave/eig.hpp"
#include "solwave/ground_state.hpp"

namespace solwave {

// Radial (ell = 0) linearization blocks around the ground state:
//   l_minus = 1/(2m) - Delta/(2m) - u^{2k},
//   l_plus  = l_minus - 2k u^{2k},
// and the Hamiltonian pairing jl = [[0, l_minus], [-l_plus, 0]].
struct NlsLinearization {
  GroundState gs;
  DiscreteOperator l_minus;
  DiscreteOperator l_plus;
  DiscreteOperator jl;
};

NlsLinearization build_l_operators(const GroundState& gs);

// l_plus in the ell = 1 sector, whose kernel contains the radial derivative
// of the ground state (translation mode).
DiscreteOperator l_plus_ell1(const GroundState& gs);

// Eigenvalues of jl near the requested shift. Every returned value is
// checked against the symmetry sigma(jl) subset R union iR:
// |Im(lambda^2)| <= 1e-6 |lambda^2| + 1e-10, else SolverError.
EigenResult spectrum_jl(const NlsLinearization& lin, const EigenRequest& req);

// Generalized-kernel chain at criticality k = 2/n:
//   l_plus theta = u,  l_minus alpha = theta,  l_plus beta = alpha.
// theta is obtained by a direct solve (l_plus is invertible on radial
// functions) and validated against the dilation formula
// theta = -(m/k) u - m r u'; alpha is solved in the orthogonal complement of
// u (bordered system), beta by a direct solve. Off criticality the
// solvability pairing <theta, u> does not vanish and NotCritical is thrown.
struct JordanChainNLS {
  Vec u_k, theta, alpha, beta;
  double theta_formula_gap = 0.0;  // |theta_solve - theta_formula| / |theta|
  double ortho_defect = 0.0;       // |<theta,u>| / (|theta| |u|) before projection
  double pairing = 0.0;            // <alpha, l_minus alpha> = <beta, u> > 0
  double pairing_gap = 0.0;        // relative gap between the two pairings
};
JordanChainNLS jordan_chain(const NlsLinearization& lin,
                            double ortho_tol = 1e-4);

// Normalized solvability pairing (1/m) <theta, u> / |u|^2 with
// theta = l_plus^{-1} u; equals n/2 - 1/k in the continuum and vanishes
// exactly at criticality. Valid at any k (no criticality assumption).
double critical_pairing(const NlsLinearization& lin);

// Threshold classification of l_minus at the continuum edge 1/(2m) through
// the Birman-Schwinger family M(kappa) = -1 + u^k (-Delta/(2m) + kappa^2)^{-1} u^k.
// The edge is kappa = 0; a zero eigenvalue of the kappa -> 0 limit signals a
// threshold singularity, separated into resonance (candidate solution not
// square-summable, detected by norm growth under domain doubling) and
// eigenvalue. On the line (n = 1) both parity channels are probed and the one
// closer to singular decides; radially (n >= 2) the ell = 0 channel carries
// the threshold.
enum class ThresholdKind { regular, threshold_resonance, threshold_eigenvalue };

struct ResonanceVerdict {
  ThresholdKind kind = ThresholdKind::regular;
  std::vector<double> kappas;          // the samples used (decreasing)
  std::vector<double> smallest;        // min |eig M(kappa)| trace (evidence)
  double extrapolated = 0.0;  // edge value: eigenvalue of the finite-part
                              // Birman-Schwinger matrix closest to zero
  double log_channel = 0.0;            // n = 2: fitted log kappa coefficient
  double growth_ratio = 0.0;           // L^2 mass ratio under domain doubling
  int eigenvalue_count = 0;            // nonzero discrete eigenvalues below edge
};

ResonanceVerdict detect_threshold_resonance(const NlsLinearization& lin,
                                            const std::vector<double>& kappa_samples);

// Critical exponent k_n: the k at which the threshold Birman-Schwinger
// eigenvalue crosses 1 (a bound state of l_minus enters/leaves through the
// edge). Bisection to |k - k_n| <= tol_k; BracketError if the indicator does
// not change sign on [k_lo, k_hi].
struct KnScanResult {
  double k_n = 0.0;
  double tol_k = 0.0;
  double indicator_lo = 0.0;  // eta(k_lo) - 1
  double indicator_hi = 0.0;  // eta(k_hi) - 1
  int evaluations = 0;
};
KnScanResult kn_scan(int n, double k_lo, double k_hi, double tol_k = 5e-3);

// u^k (l_minus - z)^{-1} u^k restricted to the nodes where u^k is
// numerically supported. NearPole if z lies within 1e-8 of a discrete
// eigenvalue of l_minus (including the kernel at 0). For n = 1 the matrix is
// the direct sum of the even and odd parity blocks (2C x 2C), so the norm
// sees a threshold singularity in either channel.
struct SandwichedResolvent {
  Complex z;
  std::vector<int> core;  // node indices carrying the sandwich (per block)
  CMat matrix;
  double norm = 0.0;      // largest singular value
};
SandwichedResolvent weighted_resolvent_l_minus(const NlsLinearization& lin,
                                               Complex z);

// Discrete eigenvalues of l_minus strictly below the essential edge 1/(2m),
// located by Sturm inertia bisection (deterministic, no Krylov iteration).
// For n = 1 both parity sectors are scanned and the lists merged.
std::vector<double> l_minus_point_spectrum(const NlsLinearization& lin,
                                           double tol = 1e-10);

// Measure-weighted inner product for radial profiles.
double inner_radial(const RadialGrid& grid, const Vec& f, const Vec& g);

}  // namespace solwave
