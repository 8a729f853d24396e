#pragma once

// Test-only oracles, independent of the library implementation paths they
// check: an ODE integrator for parallel transport on the sphere, a
// brute-force lattice search for flat-torus cut times, composite Simpson
// quadrature, and seeded random generators for points and tangents.

#include "manistats/geometry.hpp"
#include "manistats/rng.hpp"

#include <cmath>
#include <functional>

namespace oracle {

using manistats::kPi;
using manistats::kTwoPi;
using manistats::ManifoldKind;
using manistats::ManifoldPoint;
using manistats::Mat;
using manistats::RngStream;
using manistats::Vec;

// RK4 integration of the parallel-transport ODE V' = -<V, gamma'> gamma
// along the great circle gamma(t) = cos(t) x + sin(t) u on S^{d}.
inline Vec transport_ode_sphere(const Vec& x, const Vec& u_amb, double rho, const Vec& v0,
                                int steps = 2000) {
  auto gamma = [&](double t) { return Vec(std::cos(t) * x + std::sin(t) * u_amb); };
  auto dgamma = [&](double t) { return Vec(-std::sin(t) * x + std::cos(t) * u_amb); };
  auto rhs = [&](double t, const Vec& v) { return Vec(-v.dot(dgamma(t)) * gamma(t)); };
  Vec v = v0;
  const double h = rho / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Vec k1 = rhs(t, v);
    const Vec k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
    const Vec k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
    const Vec k4 = rhs(t + h, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

// First time the ray t*u from the origin of the universal cover hits a
// bisector of the lattice (2 pi Z)^d: brute force over lattice points.
inline double torus_cut_time_brute(const Vec& u, int range = 4) {
  const int d = static_cast<int>(u.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> k(d, -range);
  for (;;) {
    bool zero = true;
    for (int i = 0; i < d; ++i)
      if (k[i] != 0) zero = false;
    if (!zero) {
      Vec ell(d);
      for (int i = 0; i < d; ++i) ell[i] = kTwoPi * k[i];
      const double proj = u.dot(ell);
      if (proj > 1e-12) best = std::min(best, ell.squaredNorm() / (2.0 * proj));
    }
    int i = 0;
    while (i < d && ++k[i] > range) k[i++] = -range;
    if (i == d) break;
  }
  return best;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline ManifoldPoint random_point(const ManifoldKind& kind, RngStream& rng) {
  if (kind.angular()) {
    Vec c(kind.dim());
    for (int i = 0; i < kind.dim(); ++i) c[i] = rng.uniform(-kPi, kPi);
    return manistats::make_point(kind, std::move(c));
  }
  Vec v(kind.coord_size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return manistats::make_point(kind, std::move(v));
}

inline Vec random_unit(int m, RngStream& rng) {
  Vec u(m);
  double n2;
  do {
    for (int i = 0; i < m; ++i) u[i] = rng.normal();
    n2 = u.squaredNorm();
  } while (n2 < 1e-12);
  return u / std::sqrt(n2);
}

}  // namespace oracle
