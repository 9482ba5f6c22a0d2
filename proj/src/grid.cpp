// SPDX-License-Identifier: MIT
#include "solwave/grid.hpp"

#include <cmath>

namespace solwave {

RadialGrid make_radial_grid(int n_dim, double r_max, int num_points,
                            RadialScheme scheme) {
  if (num_points < 16) throw GridError("make_radial_grid: num_points < 16");
  if (!(r_max > 0)) throw GridError("make_radial_grid: r_max must be positive");
  if (n_dim < 1) throw InputError("make_radial_grid: n_dim must be >= 1");

  RadialGrid g;
  g.n_dim = n_dim;
  g.r_max = r_max;
  g.num_points = num_points;
  g.scheme = scheme;
  g.nodes.resize(num_points);

  if (scheme == RadialScheme::uniform) {
    const double h = r_max / num_points;
    for (int i = 0; i < num_points; ++i) g.nodes[i] = (i + 0.5) * h;
  } else {
    // sinh grading: s in (0,1] mapped to r = r_max * sinh(a s) / sinh(a).
    // a = 2 gives roughly 3x refinement near the origin.
    const double a = 2.0;
    const double ds = 1.0 / num_points;
    for (int i = 0; i < num_points; ++i) {
      const double s = (i + 0.5) * ds;
      g.nodes[i] = r_max * std::sinh(a * s) / std::sinh(a);
    }
  }

  // Cell-based weights: node i owns the cell between midpoints of its
  // neighbours (clamped to [0, r_max]).
  g.weights.resize(num_points);
  for (int i = 0; i < num_points; ++i) {
    const double lo = (i == 0) ? 0.0 : 0.5 * (g.nodes[i - 1] + g.nodes[i]);
    const double hi = (i == num_points - 1)
                          ? r_max
                          : 0.5 * (g.nodes[i] + g.nodes[i + 1]);
    g.weights[i] = hi - lo;
  }
  return g;
}

Grid1D make_grid_1d(double half_width, int num_points) {
  if (num_points < 16) throw GridError("make_grid_1d: num_points < 16");
  if (!(half_width > 0)) throw GridError("make_grid_1d: half_width must be positive");
  if (num_points % 2 == 0) ++num_points;  // keep a node at x = 0

  Grid1D g;
  g.x_min = -half_width;
  g.x_max = half_width;
  g.num_points = num_points;
  g.nodes.resize(num_points);
  const double h = 2.0 * half_width / (num_points - 1);
  for (int i = 0; i < num_points; ++i) g.nodes[i] = -half_width + i * h;
  return g;
}

double integrate(const Grid1D& g, const Vec& f) {
  const double h = g.spacing();
  double s = 0.5 * (f[0] + f[g.num_points - 1]);
  for (int i = 1; i + 1 < g.num_points; ++i) s += f[i];
  return s * h;
}

double integrate_radial(const RadialGrid& g, const Vec& f) {
  double s = 0.0;
  for (int i = 0; i < g.num_points; ++i)
    s += g.weights[i] * f[i] * std::pow(g.nodes[i], g.n_dim - 1);
  return s;
}

}  // namespace solwave
