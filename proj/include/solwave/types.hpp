// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace solwave {

using Real = double;
using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<Real>;
using CSpMat = Eigen::SparseMatrix<Complex>;

// Error taxonomy. Every failure mode named by the public API maps to one of
// these; all carry a human-readable message and derive from SolwaveError so
// callers can catch the whole family.
struct SolwaveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
#define SOLWAVE_ERROR(NAME)                 \
  struct NAME : SolwaveError {              \
    using SolwaveError::SolwaveError;       \
  }
SOLWAVE_ERROR(ConfigError);     // malformed run configuration / CLI input
SOLWAVE_ERROR(InputError);      // precondition on a function argument violated
SOLWAVE_ERROR(GridError);       // grid too coarse / too short for the request
SOLWAVE_ERROR(DomainError);     // argument outside the validity region
SOLWAVE_ERROR(SolverError);     // iteration failed to converge
SOLWAVE_ERROR(BranchError);     // continuation left the solution branch
SOLWAVE_ERROR(BracketError);    // sign-change bracket absent on given interval
SOLWAVE_ERROR(FitError);        // least-squares fit rejected (bad residual/range)
SOLWAVE_ERROR(NotCritical);     // Jordan-chain extension requested off criticality
SOLWAVE_ERROR(NearPole);        // resolvent evaluated within exclusion of a pole
SOLWAVE_ERROR(SingularBlock);   // Schur pivot block numerically singular
SOLWAVE_ERROR(InconclusiveError); // threshold verdict indeterminate
SOLWAVE_ERROR(ContourError);    // contour encloses wrong cluster / touches spectrum
SOLWAVE_ERROR(ContourTooClose); // a root lies within quadrature distance of contour
SOLWAVE_ERROR(MultiplicityError); // multiplicity fit inconsistent with winding
SOLWAVE_ERROR(HypothesisError); // perturbation-stability hypothesis violated
SOLWAVE_ERROR(RegimeError);     // contraction bound fails, map outside regime
SOLWAVE_ERROR(Unsupported);     // dimension/configuration deliberately out of scope
#undef SOLWAVE_ERROR

// Scalar self-interaction f(tau) = |tau|^k + c * |tau|^K (sign-preserving in
// tau, K > k when c != 0). c = 0 selects the pure power family.
struct Nonlinearity {
  double k = 1.0;
  double K = 0.0;
  double c = 0.0;

  bool pure_power() const { return c == 0.0; }

  double f(double tau) const {
    const double a = std::abs(tau);
    const double s = tau < 0 ? -1.0 : 1.0;
    double val = std::pow(a, k);
    if (c != 0.0) val += c * std::pow(a, K);
    return s * val;
  }

  // f'(tau) for tau != 0; the |tau|^(k-1) factor is singular at 0 for k < 1,
  // callers evaluate it only where tau is bounded away from 0.
  double fprime(double tau) const {
    const double a = std::abs(tau);
    double val = k * std::pow(a, k - 1.0);
    if (c != 0.0) val += c * K * std::pow(a, K - 1.0);
    return val;
  }

  // Interior-regularity exponent of the perturbation expansion:
  // 1 for a pure power, min(1, K/k - 1) otherwise.
  double varkappa() const {
    if (pure_power()) return 1.0;
    return std::min(1.0, K / k - 1.0);
  }

  void validate() const {
    if (!(k > 0)) throw InputError("Nonlinearity: k must be positive");
    if (c != 0.0 && !(K > k))
      throw InputError("Nonlinearity: K must exceed k when c != 0");
  }
};

inline double sq(double x) { return x * x; }

// Japanese bracket <x> = sqrt(1 + x^2).
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace solwave
