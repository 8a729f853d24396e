#include "manistats/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace manistats {

namespace {

double clamp1(double t) { return std::min(1.0, std::max(-1.0, t)); }

Vec wrapped_diff(const Vec& from, const Vec& to) {
  Vec d(from.size());
  for (Eigen::Index i = 0; i < from.size(); ++i) d[i] = wrap_angle(to[i] - from[i]);
  return d;
}

// sin(r)/r with the removable singularity filled in.
double sinc(double r) {
  if (std::abs(r) < 1e-8) return 1.0 - r * r / 6.0;
  return std::sin(r) / r;
}

}  // namespace

double distance(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_kind(x.kind, y.kind, "distance");
  switch (x.kind.family) {
    case ManifoldFamily::Circle:
    case ManifoldFamily::Torus: {
      // canonical angles differ by less than 2 pi, so one branch wraps
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.coords.size(); ++i) {
        double d = y.coords[i] - x.coords[i];
        if (d > kPi) d -= kTwoPi;
        else if (d <= -kPi) d += kTwoPi;
        s += d * d;
      }
      return std::sqrt(s);
    }
    case ManifoldFamily::Sphere:
      return std::acos(clamp1(x.coords.dot(y.coords)));
    case ManifoldFamily::ProjectivePlane:
      return std::acos(clamp1(std::abs(x.coords.dot(y.coords))));
  }
  return 0.0;
}

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) {
  require_same_kind(x.kind, v.base.kind, "exp_map");
  if (v.components.size() != x.kind.dim()) throw Error("exp_map: tangent size mismatch");

  if (x.kind.angular()) {
    Vec c = x.coords + v.components;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = wrap_angle(c[i]);
    return {x.kind, std::move(c)};
  }

  const double t = v.components.norm();
  if (t == 0.0) return x;
  const Vec u = (frame_at(x) * v.components) / t;
  Vec y = std::cos(t) * x.coords + std::sin(t) * u;
  return make_point(x.kind, std::move(y));
}

namespace {

TangentVector log_angular(const ManifoldPoint& x, const ManifoldPoint& y, double eps_cut) {
  Vec d = wrapped_diff(x.coords, y.coords);
  std::vector<Eigen::Index> offenders;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d[i]) > kPi - eps_cut) offenders.push_back(i);
  if (!offenders.empty()) {
    Vec plus = d, minus = d;
    for (Eigen::Index i : offenders) {
      plus[i] = kPi;
      minus[i] = -kPi;
    }
    throw CutLocusError("log_map: target in the cut-locus band", {plus, minus});
  }
  return {x, std::move(d)};
}

// Ambient log on the sphere; assumes rho strictly below pi.
Vec sphere_log_ambient(const Vec& x, const Vec& y, double rho) {
  if (rho < 1e-15) return Vec::Zero(x.size());
  const Vec u = y - x.dot(y) * x;  // norm sin(rho)
  return u / sinc(rho);
}

}  // namespace

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y, double eps_cut) {
  require_same_kind(x.kind, y.kind, "log_map");
  switch (x.kind.family) {
    case ManifoldFamily::Circle:
    case ManifoldFamily::Torus:
      return log_angular(x, y, eps_cut);
    case ManifoldFamily::Sphere: {
      const double c = clamp1(x.coords.dot(y.coords));
      const double rho = std::acos(c);
      if (rho > kPi - eps_cut)
        throw CutLocusError("log_map: target in the antipodal band");
      return tangent_from_ambient(x, sphere_log_ambient(x.coords, y.coords, rho));
    }
    case ManifoldFamily::ProjectivePlane: {
      const double dot = x.coords.dot(y.coords);
      const double s = dot >= 0.0 ? 1.0 : -1.0;
      const double rho = std::acos(clamp1(std::abs(dot)));
      const Vec rep = s * y.coords;
      if (rho > kPi / 2.0 - eps_cut) {
        // Exactly two minimal geodesics: toward rep and toward -rep.
        Vec amb = sphere_log_ambient(x.coords, rep, rho);
        Vec comp = frame_at(x).transpose() * amb;
        throw CutLocusError("log_map: target in the cut-locus band", {comp, -comp});
      }
      return tangent_from_ambient(x, sphere_log_ambient(x.coords, rep, rho));
    }
  }
  throw Error("log_map: unsupported kind");
}

TangentVector parallel_transport(const ManifoldPoint& x, const ManifoldPoint& y,
                                 const TangentVector& v, double eps_cut) {
  require_same_kind(x.kind, y.kind, "parallel_transport");
  require_same_kind(x.kind, v.base.kind, "parallel_transport");

  if (x.kind.angular()) {
    // Flat connection; still reject cut-locus targets per the contract.
    log_angular(x, y, eps_cut);
    return {y, v.components};
  }

  // Sphere / projective plane: rotate in the plane of the geodesic, identity
  // on its orthogonal complement.
  const double dot = x.coords.dot(y.coords);
  const double s =
      (x.kind.family == ManifoldFamily::ProjectivePlane && dot < 0.0) ? -1.0 : 1.0;
  const Vec target = s * y.coords;  // sphere endpoint of the lifted geodesic
  const double rho = std::acos(clamp1(x.coords.dot(target)));
  const double max_rho =
      x.kind.family == ManifoldFamily::ProjectivePlane ? kPi / 2.0 : kPi;
  if (rho > max_rho - eps_cut)
    throw CutLocusError("parallel_transport: target in the cut-locus band");

  Vec w = frame_at(x) * v.components;
  if (rho > 1e-15) {
    Vec u = sphere_log_ambient(x.coords, target, rho);
    u /= u.norm();  // exact unit length; sinc division loses digits near the cut
    const double a = u.dot(w);
    w += a * ((std::cos(rho) - 1.0) * u - std::sin(rho) * x.coords);
  }
  // Push through the deck transformation when the canonical representative is
  // the antipode of the lifted endpoint.
  if (s < 0.0) w = -w;
  return tangent_from_ambient(y, w);
}

double cut_time(const ManifoldPoint& x, const TangentVector& u) {
  require_same_kind(x.kind, u.base.kind, "cut_time");
  if (std::abs(u.components.norm() - 1.0) > 1e-12)
    throw InvalidDirection("cut_time: direction must be unit");
  switch (x.kind.family) {
    case ManifoldFamily::Circle: return kPi;
    case ManifoldFamily::Sphere: return kPi;
    case ManifoldFamily::ProjectivePlane: return kPi / 2.0;
    case ManifoldFamily::Torus: {
      double t = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < u.components.size(); ++i) {
        const double a = std::abs(u.components[i]);
        if (a > 0.0) t = std::min(t, kPi / a);
      }
      return t;
    }
  }
  throw Error("cut_time: unsupported kind");
}

namespace {

CutChart circle_chart(const ManifoldPoint& x) {
  CutChart ch;
  ch.param_dim = 0;
  const double base_angle = x.coords[0];
  const ManifoldPoint antipode = make_point(x.kind, Vec::Constant(1, base_angle + kPi));
  ch.point = [antipode](const Vec&) { return antipode; };
  ch.measure_density = [](const Vec&) { return 1.0; };  // counting measure
  ch.kappa = [](const Vec&) { return 2.0; };
  ch.rho = [](const Vec&) { return kPi; };
  ch.normal_at_base = [](const Vec&) { return Vec::Constant(1, 1.0); };
  ch.normal_at_chart = [antipode](const Vec&) {
    return TangentVector{antipode, Vec::Constant(1, 1.0)};
  };
  ch.tau_prime = [](const Vec&) { return 1.0; };
  ch.branches = [base_angle](const Vec&) {
    BranchPair b;
    b.phi1 = [base_angle](const ManifoldPoint& z) {
      return kPi + wrap_angle(z.coords[0] - base_angle - kPi);
    };
    b.phi2 = [base_angle](const ManifoldPoint& z) {
      return kPi - wrap_angle(z.coords[0] - base_angle - kPi);
    };
    return b;
  };
  return ch;
}

CutChart torus_chart(const ManifoldPoint& x, int cut_coord) {
  const int d = x.kind.dim();
  CutChart ch;
  ch.param_dim = d - 1;
  ch.domain.assign(static_cast<std::size_t>(d - 1), {-kPi, kPi});
  const Vec base = x.coords;
  const ManifoldKind kind = x.kind;
  const int ci = cut_coord;

  auto embed = [base, ci, d](const Vec& t) {
    Vec c(d);
    int k = 0;
    for (int j = 0; j < d; ++j) {
      if (j == ci) c[j] = wrap_angle(base[j] + kPi);
      else c[j] = wrap_angle(base[j] + t[k++]);
    }
    return c;
  };
  ch.point = [kind, embed](const Vec& t) { return ManifoldPoint{kind, embed(t)}; };
  ch.measure_density = [](const Vec&) { return 1.0; };
  ch.rho = [](const Vec& t) { return std::sqrt(t.squaredNorm() + kPi * kPi); };
  ch.kappa = [rho = ch.rho](const Vec& t) { return 2.0 * kPi / rho(t); };
  ch.normal_at_base = [d, ci](const Vec&) {
    Vec n = Vec::Zero(d);
    n[ci] = 1.0;
    return n;
  };
  ch.normal_at_chart = [kind, embed, d, ci](const Vec& t) {
    Vec n = Vec::Zero(d);
    n[ci] = 1.0;
    return TangentVector{ManifoldPoint{kind, embed(t)}, n};
  };
  ch.tau_prime = [](const Vec&) { return 1.0; };
  ch.branches = [base, ci, d](const Vec& t) {
    BranchPair b;
    auto other_sq = [base, ci, d](const ManifoldPoint& z) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        if (j == ci) continue;
        const double w = wrap_angle(z.coords[j] - base[j]);
        s += w * w;
      }
      return s;
    };
    auto delta = [base, ci](const ManifoldPoint& z) {
      return wrap_angle(z.coords[ci] - base[ci] - kPi);
    };
    b.phi1 = [other_sq, delta](const ManifoldPoint& z) {
      const double l = kPi + delta(z);
      return std::sqrt(other_sq(z) + l * l);
    };
    b.phi2 = [other_sq, delta](const ManifoldPoint& z) {
      const double l = kPi - delta(z);
      return std::sqrt(other_sq(z) + l * l);
    };
    // The two-branch structure degenerates at the corner set; shrink the
    // valid ball near the chart edges.
    double edge = kPi;
    for (Eigen::Index k = 0; k < t.size(); ++k)
      edge = std::min(edge, kPi - std::abs(t[k]));
    b.radius = std::min(kPi / 8.0, edge / 2.0);
    return b;
  };
  return ch;
}

// S^1 represented as a sphere kind: the antipodal point chart, parametrized
// through the signed angle in the deterministic frame at the base.
CutChart sphere1_chart(const ManifoldPoint& x) {
  CutChart ch;
  ch.param_dim = 0;
  const Vec base = x.coords;
  const Vec e = frame_at(x).col(0);
  const ManifoldKind kind = x.kind;
  const ManifoldPoint antipode = make_point(kind, Vec(-base));
  auto signed_angle = [base, e](const ManifoldPoint& z) {
    return std::atan2(e.dot(z.coords), base.dot(z.coords));
  };
  ch.point = [antipode](const Vec&) { return antipode; };
  ch.measure_density = [](const Vec&) { return 1.0; };
  ch.kappa = [](const Vec&) { return 2.0; };
  ch.rho = [](const Vec&) { return kPi; };
  ch.normal_at_base = [](const Vec&) { return Vec::Constant(1, 1.0); };
  ch.normal_at_chart = [antipode](const Vec&) {
    return TangentVector{antipode, Vec::Constant(1, 1.0)};
  };
  ch.tau_prime = [](const Vec&) { return 1.0; };
  ch.branches = [signed_angle](const Vec&) {
    BranchPair b;
    b.phi1 = [signed_angle](const ManifoldPoint& z) {
      return kPi + wrap_angle(signed_angle(z) - kPi);
    };
    b.phi2 = [signed_angle](const ManifoldPoint& z) {
      return kPi - wrap_angle(signed_angle(z) - kPi);
    };
    return b;
  };
  return ch;
}

CutChart rp2_chart(const ManifoldPoint& x) {
  CutChart ch;
  ch.param_dim = 1;
  ch.domain = {{0.0, kPi}};
  const Vec p = x.coords;
  const Mat frame = frame_at(x);
  const ManifoldKind kind = x.kind;

  auto anchor = [frame](double theta) -> Vec {
    return std::cos(theta) * frame.col(0) + std::sin(theta) * frame.col(1);
  };
  ch.point = [kind, anchor](const Vec& t) { return make_point(kind, anchor(t[0])); };
  ch.measure_density = [](const Vec&) { return 1.0; };
  ch.rho = [](const Vec&) { return kPi / 2.0; };
  ch.kappa = [](const Vec&) { return 2.0; };
  ch.normal_at_base = [](const Vec& t) {
    Vec n(2);
    n << std::cos(t[0]), std::sin(t[0]);
    return n;
  };
  ch.normal_at_chart = [kind, anchor, p](const Vec& t) {
    const Vec a = anchor(t[0]);
    ManifoldPoint y = make_point(kind, a);
    // The canonicalized representative may be -a; the normal p flips with it.
    const double s = y.coords.dot(a) >= 0.0 ? 1.0 : -1.0;
    return tangent_from_ambient(y, s * p);
  };
  ch.tau_prime = [](const Vec&) { return 1.0; };
  ch.branches = [p, anchor](const Vec& t) {
    const Vec a = anchor(t[0]);
    BranchPair b;
    // Local smooth section: pick the representative on the anchor's side.
    auto rep = [a](const ManifoldPoint& z) -> Vec {
      return z.coords.dot(a) >= 0.0 ? z.coords : Vec(-z.coords);
    };
    b.phi1 = [p, rep](const ManifoldPoint& z) {
      return std::acos(clamp1(rep(z).dot(p)));
    };
    b.phi2 = [p, rep](const ManifoldPoint& z) {
      return kPi - std::acos(clamp1(rep(z).dot(p)));
    };
    b.radius = kPi / 8.0;
    return b;
  };
  return ch;
}

}  // namespace

CutStructure cut_structure(const ManifoldPoint& x) {
  CutStructure cs{x.kind, x, {}};
  switch (x.kind.family) {
    case ManifoldFamily::Circle:
      cs.charts.push_back(circle_chart(x));
      break;
    case ManifoldFamily::Torus:
      for (int i = 0; i < x.kind.dim(); ++i) cs.charts.push_back(torus_chart(x, i));
      break;
    case ManifoldFamily::Sphere:
      // For d >= 2 the cut locus is the antipode at co-dimension d, so H_x
      // is empty; S^1 as a sphere kind keeps its point chart.
      if (x.kind.dim() == 1) cs.charts.push_back(sphere1_chart(x));
      break;
    case ManifoldFamily::ProjectivePlane:
      cs.charts.push_back(rp2_chart(x));
      break;
  }
  return cs;
}

}  // namespace manistats
