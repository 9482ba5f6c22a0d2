// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "solwave/operators.hpp"
#include "solwave/types.hpp"

namespace solwave {

struct EigenRequest {
  Complex shift = 0.0;
  int count = 1;
  double tol = 1e-10;
  int max_iter = 2000;
};

struct EigenPair {
  Complex value;
  CVec vector;     // unit 2-norm
  double residual; // ||A v - lambda v||_2, re-verified against the matrix
};

struct EigenResult {
  std::vector<EigenPair> pairs;  // sorted by |value - shift|, ascending
  int applications = 0;          // number of shifted solves performed
};

// Shift-invert Arnoldi with explicit deflation of converged vectors.
// Deterministic: the start vector comes from a fixed-seed generator (so it
// overlaps every symmetry sector of the matrix), Gram-Schmidt is applied
// twice, and results do not vary run to run. Pairs are locked contiguously
// from the nearest eigenvalue outward, so the returned set is the `count`
// nearest. A pair converges when ||A v - lambda v|| <= tol * max(1,|lambda|)
// plus a backward-stability floor of 100 eps ||A||_inf (tighter tolerances
// are unattainable once rounding in A itself is accounted for); the reported
// residual is the absolute one, recomputed against the matrix. Returned
// vectors are genuine unit eigenvectors; for matrices that are not normal
// they are not mutually orthogonal (deflation happens in an internal
// orthonormal basis, and each eigenvector is reconstructed from it).
// Throws SolverError if `count` pairs do not converge within `max_iter`
// solves. The internal factorization shift is always displaced off the
// requested one by a relative 1e-9, so a request landing exactly on an
// eigenvalue stays well conditioned.
// Dimensions <= 64 are handled by a dense solver with identical semantics.
EigenResult eigs_near(const CSpMat& A, const EigenRequest& req);
EigenResult eigs_near(const DiscreteOperator& op, const EigenRequest& req);

// Rank of the Riesz (spectral) projector of A over the circle |z - center| =
// radius, i.e. the total algebraic multiplicity enclosed. The projector is
// never formed: its action on a deterministic pseudo-random probe block is
// accumulated by the trapezoid rule (exponentially accurate on circles), and
// the rank is read off the singular values of the image, cut at svd_tol
// relative to the largest. `probes` bounds the detectable rank from above.
struct RieszRank {
  int rank = 0;
  double radius = 0.0;
  std::vector<double> singular_values;  // of the projected probe block
};
RieszRank riesz_rank(const CSpMat& A, Complex center, double radius,
                     int probes = 12, int quad = 32, double svd_tol = 1e-6);

// Radius for riesz_rank that isolates the eigenvalue cluster at `center`:
// scans the nearest eigenvalues, finds the first ratio gap >= 4 between
// consecutive distances inside max_radius, and returns the geometric mean of
// the two distances. Throws MultiplicityError when no such gap exists (the
// cluster is not isolated at this resolution).
double isolation_radius(const CSpMat& A, Complex center, double max_radius,
                        int scan = 12);

}  // namespace solwave
