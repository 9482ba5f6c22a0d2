// SPDX-License-Identifier: MIT
//
// Linearization blocks around the line ground state have a reflectionless
// (Poschl-Teller) structure that fixes the whole point spectrum of l_minus
// in closed form: with lambda_PT = 1/k, the nonzero eigenvalues are
//   j k (2 - j k) / (2 m),  1 <= j < 1/k,
// and the continuum edge 1/(2m) carries a half-bound resonance exactly when
// 1/k is an integer. These values anchor the spectral tests; the threshold
// detector and the critical-exponent bisection are then checked against the
// same family, where k_1 = 1 separates existence from non-existence of a
// bound state.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "solwave/nls_linearization.hpp"

using namespace solwave;

namespace {

NlsLinearization line_linearization(double k, double m, double r_max = 40.0,
                                    int M = 2000) {
  const RadialGrid grid = make_radial_grid(1, r_max, M);
  return build_l_operators(solve_ground_state(1, k, m, grid));
}

int nonzero_count(const std::vector<double>& eigs) {
  int c = 0;
  for (double e : eigs)
    if (e > 1e-6) ++c;
  return c;
}

}  // namespace

TEST_CASE("l_minus point spectrum matches the reflectionless ladder") {
  struct Case {
    double k;
    int count;
  };
  for (const Case c : {Case{1.0 / 3.0, 2}, Case{0.5, 1}, Case{0.7, 1},
                       Case{1.0, 0}, Case{1.3, 0}, Case{2.0, 0}}) {
    CAPTURE(c.k);
    const NlsLinearization lin = line_linearization(c.k, 1.0);
    const std::vector<double> eigs = l_minus_point_spectrum(lin);
    CHECK(nonzero_count(eigs) == c.count);

    int j = 1;
    for (double e : eigs) {
      if (e <= 1e-6) continue;  // kernel carried by the ground state itself
      const double exact = 0.5 * j * c.k * (2.0 - j * c.k);
      CHECK(std::abs(e - exact) < 2e-3);
      ++j;
    }
  }

  // The 1/(2m) scaling of the edge and of the ladder.
  const NlsLinearization lin = line_linearization(0.5, 0.8);
  const std::vector<double> eigs = l_minus_point_spectrum(lin);
  REQUIRE(nonzero_count(eigs) == 1);
  CHECK(std::abs(eigs.back() - 0.375 / 0.8) < 2e-3);
}

TEST_CASE("the ground state spans the kernel of l_minus") {
  const NlsLinearization lin = line_linearization(1.0, 1.0);
  const Vec r = (lin.l_minus.matrix * lin.gs.values.cast<Complex>()).real();
  // l_minus u = -rho/(2m) where rho is the discrete ground-state residual.
  CHECK(r.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("l_plus in the ell = 1 sector annihilates the translation mode") {
  const NlsLinearization lin = line_linearization(1.0, 1.0);
  const DiscreteOperator L1 = l_plus_ell1(lin.gs);
  const int M = lin.gs.grid.num_points;
  const double h = lin.gs.grid.spacing();

  Vec up(M);
  for (int i = 0; i < M; ++i) {
    const double l = (i > 0) ? lin.gs.values[i - 1] : lin.gs.values[0];
    const double rgt = (i + 1 < M) ? lin.gs.values[i + 1] : 0.0;
    up[i] = (rgt - l) / (2.0 * h);
  }
  const Vec r = (L1.matrix * up.cast<Complex>()).real();
  CHECK(r.norm() / up.norm() < 2e-3);
}

TEST_CASE("jl spectrum respects the real-or-imaginary symmetry") {
  const NlsLinearization lin = line_linearization(1.0, 1.0);
  EigenRequest req;
  req.shift = Complex(0.0, 0.6);
  req.count = 3;
  const EigenResult res = spectrum_jl(lin, req);
  for (const auto& p : res.pairs) {
    // Cubic line solitons carry no internal modes: everything near the shift
    // is discretized continuum on the imaginary axis at or beyond the edge.
    CHECK(std::abs(p.value.real()) < 1e-7 * std::abs(p.value));
    CHECK(std::abs(p.value.imag()) > 0.5 - 1e-3);
  }
}

TEST_CASE("generalized kernel chain at criticality") {
  struct Case {
    int n;
    double k;
  };
  for (const Case c : {Case{1, 2.0}, Case{2, 1.0}}) {
    CAPTURE(c.n);
    const RadialGrid grid = make_radial_grid(c.n, 36.0, 2400);
    const NlsLinearization lin =
        build_l_operators(solve_ground_state(c.n, c.k, 1.0, grid));
    const JordanChainNLS ch = jordan_chain(lin, 2e-3);

    CHECK(ch.theta_formula_gap < 2e-3);
    CHECK(ch.pairing > 0.0);
    CHECK(ch.pairing_gap < 1e-8);

    // The chain actually solves its ladder: l_minus alpha = theta (up to the
    // removed kernel component) and l_plus beta = alpha.
    const Vec la = (lin.l_minus.matrix * ch.alpha.cast<Complex>()).real();
    const Vec lb = (lin.l_plus.matrix * ch.beta.cast<Complex>()).real();
    const double uu = inner_radial(lin.gs.grid, lin.gs.values, lin.gs.values);
    const double proj =
        inner_radial(lin.gs.grid, la - ch.theta, lin.gs.values) / uu;
    Vec defect = la - ch.theta - proj * lin.gs.values;
    CHECK(defect.norm() < 1e-6 * ch.theta.norm() + 1e-10);
    CHECK((lb - ch.alpha).norm() < 1e-8 * ch.alpha.norm() + 1e-10);
  }

  const NlsLinearization off = line_linearization(1.0, 1.0);
  CHECK_THROWS_AS(jordan_chain(off, 1e-4), NotCritical);
}

TEST_CASE("solvability pairing reproduces n/2 - 1/k") {
  struct Case {
    int n;
    double k, expected;
  };
  for (const Case c : {Case{1, 1.0, -0.5}, Case{1, 2.0, 0.0},
                       Case{1, 3.0, 1.0 / 6.0}, Case{2, 1.0, 0.0},
                       Case{3, 1.0, 0.5}}) {
    CAPTURE(c.n);
    CAPTURE(c.k);
    const RadialGrid grid = make_radial_grid(c.n, 36.0, 2400);
    const NlsLinearization lin =
        build_l_operators(solve_ground_state(c.n, c.k, 1.0, grid));
    CHECK(std::abs(critical_pairing(lin) - c.expected) < 2e-3);
  }
}

TEST_CASE("threshold detector separates resonance, eigenvalue, regular") {
  const std::vector<double> kappas = {0.4, 0.3, 0.2, 0.15, 0.1};

  // 1/k = 1: resonance at the edge, empty point spectrum.
  {
    const NlsLinearization lin = line_linearization(1.0, 1.0, 48.0, 1920);
    const ResonanceVerdict v = detect_threshold_resonance(lin, kappas);
    CHECK(v.kind == ThresholdKind::threshold_resonance);
    CHECK(v.eigenvalue_count == 0);
    CHECK(v.growth_ratio > 1.3);
    CHECK(std::abs(v.extrapolated) < 1e-3);
  }

  // 1/k = 2: resonance, with one genuine bound state below the edge.
  {
    const NlsLinearization lin = line_linearization(0.5, 1.0, 48.0, 1920);
    const ResonanceVerdict v = detect_threshold_resonance(lin, kappas);
    CHECK(v.kind == ThresholdKind::threshold_resonance);
    CHECK(v.eigenvalue_count == 1);
  }

  // 1/k = 10/7: regular edge, one bound state.
  {
    const NlsLinearization lin = line_linearization(0.7, 1.0, 48.0, 1920);
    const ResonanceVerdict v = detect_threshold_resonance(lin, kappas);
    CHECK(v.kind == ThresholdKind::regular);
    CHECK(v.eigenvalue_count == 1);
    CHECK(std::abs(v.extrapolated) >= 1e-3);
  }

  // 1/k = 10/13: regular edge, empty point spectrum.
  {
    const NlsLinearization lin = line_linearization(1.3, 1.0, 48.0, 1920);
    const ResonanceVerdict v = detect_threshold_resonance(lin, kappas);
    CHECK(v.kind == ThresholdKind::regular);
    CHECK(v.eigenvalue_count == 0);
  }

  // Sample validation: too few, non-decreasing, or under-resolved tails.
  {
    const NlsLinearization lin = line_linearization(1.0, 1.0, 48.0, 1920);
    CHECK_THROWS_AS(detect_threshold_resonance(lin, {0.3, 0.2}), InputError);
    CHECK_THROWS_AS(detect_threshold_resonance(lin, {0.2, 0.3, 0.4}),
                    InputError);
    CHECK_THROWS_AS(detect_threshold_resonance(lin, {0.3, 0.2, 0.01}),
                    GridError);
  }
}

TEST_CASE("critical exponent bisection brackets k_1 = 1") {
  const KnScanResult r = kn_scan(1, 0.85, 1.2);
  CHECK(std::abs(r.k_n - 1.0) <= 0.01);
  CHECK(r.indicator_lo > 0.0);   // bound state exists below k_1
  CHECK(r.indicator_hi < 0.0);   // and is gone above
  CHECK(r.evaluations >= 6);

  CHECK_THROWS_AS(kn_scan(1, 1.5, 2.0), BracketError);
}

TEST_CASE("weighted resolvent of l_minus") {
  const NlsLinearization lin = line_linearization(1.0, 1.0);

  CHECK_THROWS_AS(weighted_resolvent_l_minus(lin, Complex(0.0, 0.0)), NearPole);

  const SandwichedResolvent a = weighted_resolvent_l_minus(lin, Complex(0.3, 0.0));
  CHECK(a.norm > 0.0);
  REQUIRE(!a.core.empty());
  // Real spectral parameter: the sandwiched kernel is symmetric.
  CHECK((a.matrix - a.matrix.transpose()).norm() < 1e-10 * a.matrix.norm());

  const SandwichedResolvent b =
      weighted_resolvent_l_minus(lin, Complex(0.25, 0.1));
  CHECK(b.norm > 0.0);
}
