#pragma once

#include "manistats/manifold.hpp"

#include <functional>
#include <vector>

namespace manistats {

// Nodes and weights on [-1, 1].
struct Quad1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule of order n (Newton iteration on the Legendre
// recurrence; nodes accurate to machine precision).
const Quad1D& gauss_legendre(int n);

// Composite Gauss-Legendre on [a, b] with n_total nodes split into panels of
// 32 (n_total is rounded up to a multiple of 32).
struct Grid1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Grid1D composite_gl(double a, double b, int n_total);

// Quadrature rule for integrals over the manifold, in a chart centered at
// `center` (wrapped offsets for Circle/Torus, geodesic polar coordinates for
// Sphere/RP^2). Integrands that are smooth away from the cut locus of
// `center` are smooth across all panels. Supported: circle, torus d<=3,
// sphere d<=3, rp2.
struct ManifoldRule {
  std::vector<ManifoldPoint> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};
ManifoldRule manifold_rule(const ManifoldPoint& center, int nodes_per_dim);

// Sum of w_i * f(p_i) over the rule, evaluated with the parallel kernel and a
// fixed-order pairwise reduction (bit-identical across thread counts).
double integrate(const ManifoldRule& rule,
                 const std::function<double(const ManifoldPoint&)>& f);

// Serial reference (plain running sum) kept for tests and the benchmark.
double integrate_serial(const ManifoldRule& rule,
                        const std::function<double(const ManifoldPoint&)>& f);

}  // namespace manistats
