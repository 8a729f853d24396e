#pragma once

#include "manistats/manifold.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace manistats {

// Intrinsic distance. Circle/Torus: componentwise wrapped-angle Euclidean
// distance; Sphere: arccos<x,y>; ProjectivePlane: arccos|<x,y>| (<= pi/2).
double distance(const ManifoldPoint& x, const ManifoldPoint& y);

// Unit-speed geodesic flow for time |v| starting at the base of v. Total map.
ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v);

// Inverse of exp_map on the complement of the cut locus. Throws CutLocusError
// (with both branch vectors where the manifold has exactly two) when y lies
// within eps_cut of the cut locus of x.
TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y,
                      double eps_cut = kEpsCut);

// Parallel transport of v along the unique minimal geodesic from x to y.
TangentVector parallel_transport(const ManifoldPoint& x, const ManifoldPoint& y,
                                 const TangentVector& v, double eps_cut = kEpsCut);

// Distance from x to its cut point along the unit direction u.
double cut_time(const ManifoldPoint& x, const TangentVector& u);

// The two smooth branch distance functions from the base point, valid on a
// neighborhood of a chart point of the cut hypersurface. Branch 1 is the
// branch containing the chart's reference geodesic from the base.
struct BranchPair {
  std::function<double(const ManifoldPoint&)> phi1;
  std::function<double(const ManifoldPoint&)> phi2;
  // Radius of the ball around the anchor on which both functions are smooth;
  // shrinks near chart edges (torus corner set).
  double radius = kPi / 8.0;
};

// One chart of the regular cut-locus part H_base: a parametrized co-dimension
// one piece carrying everything the J_mu quadrature needs. param_dim == 0
// encodes a single point with counting measure (the circle antipode).
struct CutChart {
  int param_dim = 0;
  std::vector<std::pair<double, double>> domain;  // param_dim intervals

  std::function<ManifoldPoint(const Vec&)> point;     // y(param)
  std::function<double(const Vec&)> measure_density;  // d vol_H / d param
  std::function<double(const Vec&)> kappa;            // |grad(phi1 - phi2)| at y(param)
  std::function<double(const Vec&)> rho;              // distance(base, y(param))
  // n(base | y): unit normal to H_y at the base point, components in the
  // frame at base. Sign fixed per chart; J_mu is invariant under flipping it.
  std::function<Vec(const Vec&)> normal_at_base;
  // n(y | base): unit normal to the chart at y(param).
  std::function<TangentVector(const Vec&)> normal_at_chart;
  std::function<double(const Vec&)> tau_prime;  // == 1 for all shipped manifolds

  // Two-branch distance functions anchored near y(param); smooth on the ball
  // of radius neighborhood_radius around the anchor.
  std::function<BranchPair(const Vec&)> branches;
  double neighborhood_radius = kPi / 8.0;
};

struct CutStructure {
  ManifoldKind kind;
  ManifoldPoint base;
  std::vector<CutChart> charts;

  bool empty() const { return charts.empty(); }
};

// Parametrization of H_x. Circle: the antipode; Torus(d): d coordinate
// hypersurfaces (the corner set Q_x is excluded); Sphere(d>=2): empty;
// ProjectivePlane: the polar line, parametrized by theta in [0, pi).
CutStructure cut_structure(const ManifoldPoint& x);

}  // namespace manistats
