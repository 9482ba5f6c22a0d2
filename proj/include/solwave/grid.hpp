// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "solwave/types.hpp"

namespace solwave {

// Radial grid on (0, r_max]. For the uniform scheme the nodes sit at the
// half-integer offsets r_i = (i + 1/2) h, h = r_max / num_points, so no node
// coincides with the coordinate singularity at r = 0; the graded scheme
// clusters nodes near the origin with a smooth sinh map (again starting off
// the origin). Both end with a Dirichlet ghost at r_max.
enum class RadialScheme { uniform, graded };

struct RadialGrid {
  int n_dim = 1;         // ambient spatial dimension the measure belongs to
  double r_max = 30.0;
  int num_points = 3000;
  RadialScheme scheme = RadialScheme::uniform;

  std::vector<double> nodes;   // strictly increasing, nodes.front() > 0
  std::vector<double> weights; // quadrature weights for int_0^rmax dr (trapezoid cells)

  double spacing() const { return r_max / num_points; }  // uniform-scheme h
};

RadialGrid make_radial_grid(int n_dim, double r_max, int num_points,
                            RadialScheme scheme = RadialScheme::uniform);

// Uniform symmetric grid on [x_min, x_max], x_min = -x_max, num_points odd so
// a node sits at x = 0.
struct Grid1D {
  double x_min = -30.0;
  double x_max = 30.0;
  int num_points = 3001;

  std::vector<double> nodes;

  double spacing() const { return (x_max - x_min) / (num_points - 1); }
};

Grid1D make_grid_1d(double half_width, int num_points);

// Quadrature over the full line / radial measure r^{n-1} dr.
double integrate(const Grid1D& g, const Vec& f);
double integrate_radial(const RadialGrid& g, const Vec& f);  // with r^{n-1} weight

}  // namespace solwave
