// SPDX-License-Identifier: MIT
#pragma once

#include <string>

#include "solwave/grid.hpp"
#include "solwave/types.hpp"

namespace solwave {

enum class BoundaryCondition { dirichlet, regularity_at_origin };

// A finite-difference operator together with the metadata needed to interpret
// its spectrum: the inner-product weights of the representation it acts in,
// the number of field components interleaved per node, and the boundary
// condition baked into the stencil. `hermitian` is verified against the
// stored matrix at assembly time (tolerance 1e-12 relative to the largest
// entry); operators that are self-adjoint only w.r.t. a nontrivial measure
// carry hermitian = false and expose the measure instead.
struct DiscreteOperator {
  CSpMat matrix;
  int components = 1;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  bool hermitian = false;
  double h = 0.0;          // characteristic spacing, for error estimates
  Vec measure;             // weights w_i of the representation inner product
  std::string label;

  Eigen::Index dim() const { return matrix.rows(); }
  CMat dense() const { return CMat(matrix); }
};

// Verifies the claimed symmetry; throws InputError on mismatch.
void finalize(DiscreteOperator& op, bool claim_hermitian);

// Radial Laplacian  d_rr + ((n-1)/r) d_r - ell(ell+n-2)/r^2  acting on point
// values psi(r_i), assembled in conservative flux form (self-adjoint w.r.t.
// the measure r^{n-1} dr represented by op.measure). Regularity at the origin
// enters through the parity ghost (n = 1) or the vanishing face factor
// r^{n-1} (n >= 2); Dirichlet at r_max. order = 2 or 4 (4 requires the
// uniform scheme and ell = 0 or n = 1).
DiscreteOperator build_laplacian_radial(const RadialGrid& grid, int n_dim,
                                        int ell = 0, int order = 2);

// Full-line d_xx with Dirichlet ends; symmetric. order = 2 or 4.
DiscreteOperator build_laplacian_1d(const Grid1D& grid, int order = 2);

// Full-line centered d_x with Dirichlet ends; antisymmetric.
DiscreteOperator build_derivative_1d(const Grid1D& grid, int order = 2);

// 2x2 block family for Schur complements; dense because complements of sparse
// blocks fill in.
struct BlockOperator {
  CMat A11, A12, A21, A22;
};
enum class SchurOf { of_11, of_22 };

// of_11: A22 - A21 A11^{-1} A12 (complement of the 11 pivot);
// of_22: A11 - A12 A22^{-1} A21. Throws SingularBlock (message carries a
// condition estimate) when the pivot block is numerically singular.
CMat schur_complement(const BlockOperator& blocks, SchurOf which);

// Richardson extrapolation for a quantity computed at spacings h and h/2 with
// a method of order p.
inline double richardson_extrapolate(double f_h, double f_h2, double p) {
  const double w = std::pow(2.0, p);
  return f_h2 + (f_h2 - f_h) / (w - 1.0);
}
inline Complex richardson_extrapolate(Complex f_h, Complex f_h2, double p) {
  const double w = std::pow(2.0, p);
  return f_h2 + (f_h2 - f_h) / (w - 1.0);
}

// Observed convergence order from three nested levels h, h/2, h/4.
inline double observed_order(double f_h, double f_h2, double f_h4) {
  const double num = std::abs(f_h - f_h2);
  const double den = std::abs(f_h2 - f_h4);
  if (den == 0.0) throw FitError("observed_order: levels coincide");
  return std::log2(num / den);
}

}  // namespace solwave
