#include "manistats/manifold.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace manistats {

using nlohmann::json;

ManifoldKind ManifoldKind::torus(int d) {
  if (d < 1) throw Error("torus dimension must be positive");
  return {ManifoldFamily::Torus, d};
}

ManifoldKind ManifoldKind::sphere(int d) {
  if (d < 1) throw Error("sphere dimension must be positive");
  return {ManifoldFamily::Sphere, d};
}

int ManifoldKind::dim() const {
  switch (family) {
    case ManifoldFamily::Circle: return 1;
    case ManifoldFamily::Torus: return d;
    case ManifoldFamily::Sphere: return d;
    case ManifoldFamily::ProjectivePlane: return 2;
  }
  return 0;
}

int ManifoldKind::coord_size() const {
  switch (family) {
    case ManifoldFamily::Circle: return 1;
    case ManifoldFamily::Torus: return d;
    case ManifoldFamily::Sphere: return d + 1;
    case ManifoldFamily::ProjectivePlane: return 3;
  }
  return 0;
}

double ManifoldKind::volume() const {
  switch (family) {
    case ManifoldFamily::Circle: return kTwoPi;
    case ManifoldFamily::Torus: return std::pow(kTwoPi, d);
    case ManifoldFamily::Sphere: {
      // area of the unit d-sphere: 2 pi^{(d+1)/2} / Gamma((d+1)/2)
      const double p = 0.5 * (d + 1);
      return 2.0 * std::pow(kPi, p) / std::tgamma(p);
    }
    case ManifoldFamily::ProjectivePlane: return kTwoPi;
  }
  return 0.0;
}

double ManifoldKind::diameter() const {
  switch (family) {
    case ManifoldFamily::Circle: return kPi;
    case ManifoldFamily::Torus: return kPi * std::sqrt(double(d));
    case ManifoldFamily::Sphere: return kPi;
    case ManifoldFamily::ProjectivePlane: return kPi / 2.0;
  }
  return 0.0;
}

std::string ManifoldKind::name() const {
  switch (family) {
    case ManifoldFamily::Circle: return "circle";
    case ManifoldFamily::Torus: return "torus" + std::to_string(d);
    case ManifoldFamily::Sphere: return "sphere" + std::to_string(d);
    case ManifoldFamily::ProjectivePlane: return "rp2";
  }
  return "?";
}

ManifoldKind ManifoldKind::parse(const std::string& name) {
  if (name == "circle") return circle();
  if (name == "rp2") return projective_plane();
  auto tail_int = [&](const std::string& prefix) -> int {
    const std::string digits = name.substr(prefix.size());
    if (digits.empty()) throw Error("missing dimension in manifold name: " + name);
    return std::stoi(digits);
  };
  if (name.rfind("torus", 0) == 0) return torus(tail_int("torus"));
  if (name.rfind("sphere", 0) == 0) return sphere(tail_int("sphere"));
  throw Error("unknown manifold name: " + name);
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  else if (a > kPi) a -= kTwoPi;
  return a;
}

namespace {

// Canonical sign: first coordinate with |x_i| > tol is made positive.
void canonicalize_sign(Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-14) {
      if (x[i] < 0.0) x = -x;
      return;
    }
  }
}

}  // namespace

ManifoldPoint make_point(ManifoldKind kind, Vec coords) {
  if (coords.size() != kind.coord_size())
    throw Error("point coordinate size " + std::to_string(coords.size()) +
                " does not match " + kind.name());
  if (kind.angular()) {
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords[i] = wrap_angle(coords[i]);
  } else {
    const double n = coords.norm();
    if (n < 1e-12) throw Error("cannot normalize near-zero vector for " + kind.name());
    coords /= n;
    if (kind.family == ManifoldFamily::ProjectivePlane) canonicalize_sign(coords);
  }
  return {kind, std::move(coords)};
}

void validate_point(const ManifoldPoint& p, double tol) {
  if (p.coords.size() != p.kind.coord_size()) throw Error("point has wrong coordinate size");
  if (p.kind.angular()) {
    for (Eigen::Index i = 0; i < p.coords.size(); ++i) {
      const double a = p.coords[i];
      if (!(a > -kPi - tol && a <= kPi + tol))
        throw Error("angle outside (-pi, pi]");
    }
  } else {
    if (std::abs(p.coords.norm() - 1.0) > tol) throw Error("coordinate vector not unit");
    if (p.kind.family == ManifoldFamily::ProjectivePlane) {
      for (Eigen::Index i = 0; i < p.coords.size(); ++i) {
        if (std::abs(p.coords[i]) > 1e-14) {
          if (p.coords[i] < 0.0) throw Error("projective point violates canonical sign");
          break;
        }
      }
    }
  }
}

Mat frame_at(const ManifoldPoint& p) {
  const int m = p.kind.dim();
  if (p.kind.angular()) return Mat::Identity(m, m);

  const Eigen::Index n = p.coords.size();
  // Start index: smallest i with e_i not parallel to p.
  Eigen::Index start = 0;
  while (start < n && std::abs(std::abs(p.coords[start]) - 1.0) < 1e-12) ++start;
  if (start == n) start = 0;

  Mat frame(n, m);
  int got = 0;
  std::vector<Vec> basis;
  basis.push_back(p.coords);
  for (Eigen::Index step = 0; step < n && got < m; ++step) {
    const Eigen::Index j = (start + step) % n;
    Vec v = Vec::Zero(n);
    v[j] = 1.0;
    for (const Vec& b : basis) v -= b.dot(v) * b;
    const double nv = v.norm();
    if (nv > 1e-6) {
      v /= nv;
      basis.push_back(v);
      frame.col(got++) = v;
    }
  }
  if (got != m) throw Error("frame construction failed");
  return frame;
}

Vec tangent_to_ambient(const TangentVector& v) {
  if (v.base.kind.angular()) return v.components;
  return frame_at(v.base) * v.components;
}

TangentVector tangent_from_ambient(const ManifoldPoint& base, const Vec& ambient) {
  if (base.kind.angular()) return {base, ambient};
  return {base, frame_at(base).transpose() * ambient};
}

void require_same_kind(const ManifoldKind& a, const ManifoldKind& b, const char* where) {
  if (!(a == b))
    throw KindMismatch(std::string(where) + ": manifold kinds differ (" + a.name() +
                       " vs " + b.name() + ")");
}

std::string ManifoldPoint::to_json() const {
  json j;
  j["kind"] = kind.name();
  j["coords"] = std::vector<double>(coords.data(), coords.data() + coords.size());
  return j.dump();
}

ManifoldPoint ManifoldPoint::from_json(const std::string& text) {
  const json j = json::parse(text);
  const ManifoldKind kind = ManifoldKind::parse(j.at("kind").get<std::string>());
  const auto c = j.at("coords").get<std::vector<double>>();
  Vec coords = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
  // Keep already-canonical coordinates bit-exact; repair otherwise.
  ManifoldPoint p{kind, std::move(coords)};
  try {
    validate_point(p);
  } catch (const Error&) {
    p = make_point(kind, std::move(p.coords));
  }
  return p;
}

}  // namespace manistats
