// SPDX-License-Identifier: MIT
#include "solwave/operators.hpp"

#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

namespace solwave {

namespace {

double max_abs(const CSpMat& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSpMat::InnerIterator it(a, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

void finalize(DiscreteOperator& op, bool claim_hermitian) {
  op.matrix.makeCompressed();
  if (claim_hermitian) {
    CSpMat d = CSpMat(op.matrix - CSpMat(op.matrix.adjoint()));
    const double scale = std::max(1.0, max_abs(op.matrix));
    if (max_abs(d) > 1e-12 * scale)
      throw InputError("finalize: operator claimed Hermitian is not (" +
                       op.label + ")");
  }
  op.hermitian = claim_hermitian;
}

DiscreteOperator build_laplacian_radial(const RadialGrid& grid, int n_dim,
                                        int ell, int order) {
  if (n_dim != grid.n_dim)
    throw InputError("build_laplacian_radial: n_dim disagrees with grid");
  if (order != 2 && order != 4)
    throw InputError("build_laplacian_radial: order must be 2 or 4");
  if (order == 4 && (grid.scheme != RadialScheme::uniform ||
                     (n_dim >= 2 && ell != 0)))
    throw Unsupported(
        "build_laplacian_radial: 4th order needs uniform scheme and ell=0 or n=1");

  const int M = grid.num_points;
  const auto& r = grid.nodes;
  const int parity = (ell % 2 == 0) ? 1 : -1;  // psi(-r) = parity * psi(r), n=1

  DiscreteOperator op;
  op.components = 1;
  op.bc = BoundaryCondition::regularity_at_origin;
  op.h = grid.spacing();
  op.label = "laplacian_radial(n=" + std::to_string(n_dim) +
             ",ell=" + std::to_string(ell) + ")";
  op.measure.resize(M);
  for (int i = 0; i < M; ++i)
    op.measure[i] = grid.weights[i] * std::pow(r[i], n_dim - 1);

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(5 * M);

  if (order == 2) {
    // Conservative flux form: faces midway between nodes (and at 0, r_max).
    for (int i = 0; i < M; ++i) {
      const double cell = grid.weights[i];
      const double vol = std::pow(r[i], n_dim - 1) * cell;
      double diag = 0.0;

      // Right face.
      if (i + 1 < M) {
        const double rf = 0.5 * (r[i] + r[i + 1]);
        const double c = std::pow(rf, n_dim - 1) / ((r[i + 1] - r[i]) * vol);
        trip.emplace_back(i, i + 1, Complex(c, 0));
        diag -= c;
      } else {
        // Dirichlet ghost mirrored across r_max.
        const double c =
            std::pow(grid.r_max, n_dim - 1) / (2.0 * (grid.r_max - r[i]) * vol);
        diag -= 2.0 * c;
      }

      // Left face.
      if (i > 0) {
        const double rf = 0.5 * (r[i - 1] + r[i]);
        const double c = std::pow(rf, n_dim - 1) / ((r[i] - r[i - 1]) * vol);
        trip.emplace_back(i, i - 1, Complex(c, 0));
        diag -= c;
      } else if (n_dim == 1) {
        // Parity ghost at -r_0; face at r = 0 carries factor 1.
        const double c = 1.0 / (2.0 * r[0] * vol);
        diag -= (1 - parity) * c;
      }
      // n_dim >= 2: face factor r^{n-1} vanishes at r = 0, no flux.

      if (ell != 0) diag -= ell * (ell + n_dim - 2) / (r[i] * r[i]);
      trip.emplace_back(i, i, Complex(diag, 0));
    }
  } else {
    // 4th-order central stencils with parity ghosts at the origin and
    // Dirichlet ghosts beyond r_max; non-conservative form.
    const double h = grid.spacing();
    const double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                          -1.0 / 12};
    const double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    std::vector<std::vector<std::pair<int, double>>> rows(M);
    auto add = [&](int i, int j, double v) {
      if (v == 0.0) return;
      if (j >= M) return;  // Dirichlet ghost region treated as zero
      if (j < 0) {
        j = -1 - j;  // mirror across r = 0 for the staggered grid
        v *= parity;
      }
      rows[i].push_back({j, v});
    };
    for (int i = 0; i < M; ++i) {
      for (int s = -2; s <= 2; ++s) {
        double v = c2[s + 2] / (h * h);
        if (n_dim > 1) v += (n_dim - 1) / r[i] * c1[s + 2] / h;
        add(i, i + s, v);
      }
      if (ell != 0) add(i, i, -ell * (ell + n_dim - 2) / (r[i] * r[i]));
    }
    for (int i = 0; i < M; ++i)
      for (auto& [j, v] : rows[i]) trip.emplace_back(i, j, Complex(v, 0));
  }

  op.matrix.resize(M, M);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  finalize(op, /*claim_hermitian=*/false);
  return op;
}

DiscreteOperator build_laplacian_1d(const Grid1D& grid, int order) {
  if (order != 2 && order != 4)
    throw InputError("build_laplacian_1d: order must be 2 or 4");
  const int M = grid.num_points;
  const double h = grid.spacing();

  DiscreteOperator op;
  op.bc = BoundaryCondition::dirichlet;
  op.h = h;
  op.label = "laplacian_1d";
  op.measure = Vec::Constant(M, h);

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(5 * M);
  if (order == 2) {
    for (int i = 0; i < M; ++i) {
      trip.emplace_back(i, i, Complex(-2.0 / (h * h), 0));
      if (i > 0) trip.emplace_back(i, i - 1, Complex(1.0 / (h * h), 0));
      if (i + 1 < M) trip.emplace_back(i, i + 1, Complex(1.0 / (h * h), 0));
    }
  } else {
    const double c[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                         -1.0 / 12};
    for (int i = 0; i < M; ++i)
      for (int s = -2; s <= 2; ++s) {
        const int j = i + s;
        if (j < 0 || j >= M) continue;  // zero ghosts beyond Dirichlet ends
        trip.emplace_back(i, j, Complex(c[s + 2] / (h * h), 0));
      }
  }
  op.matrix.resize(M, M);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  finalize(op, /*claim_hermitian=*/true);
  return op;
}

DiscreteOperator build_derivative_1d(const Grid1D& grid, int order) {
  if (order != 2 && order != 4)
    throw InputError("build_derivative_1d: order must be 2 or 4");
  const int M = grid.num_points;
  const double h = grid.spacing();

  DiscreteOperator op;
  op.bc = BoundaryCondition::dirichlet;
  op.h = h;
  op.label = "derivative_1d";
  op.measure = Vec::Constant(M, h);

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(4 * M);
  if (order == 2) {
    for (int i = 0; i < M; ++i) {
      if (i > 0) trip.emplace_back(i, i - 1, Complex(-0.5 / h, 0));
      if (i + 1 < M) trip.emplace_back(i, i + 1, Complex(0.5 / h, 0));
    }
  } else {
    const double c[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    for (int i = 0; i < M; ++i)
      for (int s = -2; s <= 2; ++s) {
        const int j = i + s;
        if (j < 0 || j >= M || c[s + 2] == 0.0) continue;
        trip.emplace_back(i, j, Complex(c[s + 2] / h, 0));
      }
  }
  op.matrix.resize(M, M);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  finalize(op, /*claim_hermitian=*/false);
  return op;
}

CMat schur_complement(const BlockOperator& blocks, SchurOf which) {
  const CMat& pivot = (which == SchurOf::of_11) ? blocks.A11 : blocks.A22;
  if (pivot.rows() != pivot.cols())
    throw InputError("schur_complement: pivot block must be square");

  Eigen::PartialPivLU<CMat> lu(pivot);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw SingularBlock("schur_complement: pivot block singular (rcond = " +
                        std::to_string(rc) + ")");

  if (which == SchurOf::of_11)
    return blocks.A22 - blocks.A21 * lu.solve(blocks.A12);
  return blocks.A11 - blocks.A12 * lu.solve(blocks.A21);
}

}  // namespace solwave
