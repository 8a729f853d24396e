#pragma once

#include "manistats/types.hpp"

#include <string>

namespace manistats {

enum class ManifoldFamily { Circle, Torus, Sphere, ProjectivePlane };

// One of the supported compact manifolds: S^1, the flat square torus T^d of
// side 2*pi, the unit sphere S^d, or RP^2 represented by canonical-sign unit
// vectors in R^3.
struct ManifoldKind {
  ManifoldFamily family = ManifoldFamily::Circle;
  int d = 1;  // Torus/Sphere dimension parameter; 1 for Circle, 2 for RP^2

  static ManifoldKind circle() { return {ManifoldFamily::Circle, 1}; }
  static ManifoldKind torus(int d);
  static ManifoldKind sphere(int d);
  static ManifoldKind projective_plane() { return {ManifoldFamily::ProjectivePlane, 2}; }

  // Intrinsic dimension m.
  int dim() const;
  // Length of the coordinate vector of a point.
  int coord_size() const;
  bool angular() const {
    return family == ManifoldFamily::Circle || family == ManifoldFamily::Torus;
  }
  double volume() const;    // total Riemannian volume
  double diameter() const;  // sup of the distance function

  bool operator==(const ManifoldKind&) const = default;

  // "circle", "torus<d>", "sphere<d>", "rp2"
  std::string name() const;
  static ManifoldKind parse(const std::string& name);
};

// A point in the canonical per-manifold representation: angles in (-pi, pi]
// for Circle/Torus, unit vectors for Sphere, canonical-sign unit vectors
// (first nonzero coordinate positive) for ProjectivePlane.
struct ManifoldPoint {
  ManifoldKind kind;
  Vec coords;

  std::string to_json() const;
  static ManifoldPoint from_json(const std::string& text);
};

// Wraps, normalizes or sign-canonicalizes raw coordinates into the canonical
// representation. Throws Error if the coordinates cannot be repaired
// (wrong size, zero vector for a sphere point).
ManifoldPoint make_point(ManifoldKind kind, Vec coords);

// Validates the representation invariants without modifying the point.
void validate_point(const ManifoldPoint& p, double tol = 1e-12);

// Reduce an angle to (-pi, pi].
double wrap_angle(double a);

// A tangent vector with components in the deterministic orthonormal frame at
// its base point (coordinate basis for Circle/Torus, Gram-Schmidt completion
// for Sphere/ProjectivePlane; see frame_at).
struct TangentVector {
  ManifoldPoint base;
  Vec components;

  double norm() const { return components.norm(); }
};

// Deterministic orthonormal frame at p. For angular manifolds this is the
// coordinate basis and the returned matrix is identity. For Sphere/RP^2 the
// columns are ambient vectors spanning the tangent space, built by
// Gram-Schmidt against the standard basis starting from the smallest index
// not parallel to p. Identical points yield identical frames.
Mat frame_at(const ManifoldPoint& p);

// Ambient representation of a tangent vector (frame * components). For
// angular manifolds this is the components vector itself.
Vec tangent_to_ambient(const TangentVector& v);
TangentVector tangent_from_ambient(const ManifoldPoint& base, const Vec& ambient);

void require_same_kind(const ManifoldKind& a, const ManifoldKind& b, const char* where);

}  // namespace manistats
