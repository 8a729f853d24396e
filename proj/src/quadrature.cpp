#include "manistats/quadrature.hpp"

#include "manistats/parallel.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace manistats {

namespace {

Quad1D compute_gauss_legendre(int n) {
  Quad1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

}  // namespace

const Quad1D& gauss_legendre(int n) {
  static std::map<int, Quad1D> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Grid1D composite_gl(double a, double b, int n_total) {
  constexpr int kPanelNodes = 32;
  const int panels = (n_total + kPanelNodes - 1) / kPanelNodes;
  const Quad1D& gl = gauss_legendre(kPanelNodes);
  Grid1D g;
  g.nodes.reserve(static_cast<std::size_t>(panels) * kPanelNodes);
  g.weights.reserve(g.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int i = 0; i < kPanelNodes; ++i) {
      g.nodes.push_back(mid + 0.5 * h * gl.nodes[i]);
      g.weights.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return g;
}

namespace {

void tensor_angular(const ManifoldPoint& center, int nodes_per_dim, ManifoldRule& rule) {
  const int d = center.kind.dim();
  const Grid1D g = composite_gl(-kPi, kPi, nodes_per_dim);
  const std::size_t n1 = g.nodes.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (int k = 0; k < d; ++k) t *= n1;
    return t;
  }();
  rule.points.reserve(total);
  rule.weights.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    Vec c(d);
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const std::size_t i = rem % n1;
      rem /= n1;
      c[k] = wrap_angle(center.coords[k] + g.nodes[i]);
      w *= g.weights[i];
    }
    rule.points.push_back({center.kind, std::move(c)});
    rule.weights.push_back(w);
  }
}

// Geodesic polar rule around `center` on S^2 / S^3 / RP^2.
void polar_rule(const ManifoldPoint& center, int nodes_per_dim, ManifoldRule& rule) {
  const auto family = center.kind.family;
  const int d = center.kind.dim();
  const double rho_max =
      family == ManifoldFamily::ProjectivePlane ? kPi / 2.0 : kPi;
  const Grid1D gr = composite_gl(0.0, rho_max, nodes_per_dim);
  const Mat frame = frame_at(center);
  const Vec c = center.coords;

  if (d == 2) {
    const Grid1D gt = composite_gl(0.0, kTwoPi, nodes_per_dim);
    rule.points.reserve(gr.nodes.size() * gt.nodes.size());
    rule.weights.reserve(rule.points.capacity());
    for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
      const double rho = gr.nodes[i];
      for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
        const double th = gt.nodes[j];
        const Vec u = std::cos(th) * frame.col(0) + std::sin(th) * frame.col(1);
        Vec y = std::cos(rho) * c + std::sin(rho) * u;
        rule.points.push_back(make_point(center.kind, std::move(y)));
        rule.weights.push_back(gr.weights[i] * gt.weights[j] * std::sin(rho));
      }
    }
    return;
  }
  if (d == 3) {
    const Grid1D gt = composite_gl(0.0, kPi, nodes_per_dim);
    const Grid1D gp = composite_gl(0.0, kTwoPi, nodes_per_dim);
    rule.points.reserve(gr.nodes.size() * gt.nodes.size() * gp.nodes.size());
    rule.weights.reserve(rule.points.capacity());
    for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
      const double rho = gr.nodes[i];
      const double s2 = std::sin(rho) * std::sin(rho);
      for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
        const double th = gt.nodes[j];
        for (std::size_t k = 0; k < gp.nodes.size(); ++k) {
          const double ph = gp.nodes[k];
          const Vec u = std::sin(th) * std::cos(ph) * frame.col(0) +
                        std::sin(th) * std::sin(ph) * frame.col(1) +
                        std::cos(th) * frame.col(2);
          Vec y = std::cos(rho) * c + std::sin(rho) * u;
          rule.points.push_back(make_point(center.kind, std::move(y)));
          rule.weights.push_back(gr.weights[i] * gt.weights[j] * gp.weights[k] * s2 *
                                 std::sin(th));
        }
      }
    }
    return;
  }
  throw Error("manifold quadrature implemented for spheres up to dimension 3");
}

}  // namespace

ManifoldRule manifold_rule(const ManifoldPoint& center, int nodes_per_dim) {
  ManifoldRule rule;
  switch (center.kind.family) {
    case ManifoldFamily::Circle:
    case ManifoldFamily::Torus:
      if (center.kind.dim() > 3)
        throw Error("manifold quadrature implemented for tori up to dimension 3");
      tensor_angular(center, nodes_per_dim, rule);
      break;
    case ManifoldFamily::Sphere:
    case ManifoldFamily::ProjectivePlane:
      polar_rule(center, nodes_per_dim, rule);
      break;
  }
  return rule;
}

double integrate(const ManifoldRule& rule,
                 const std::function<double(const ManifoldPoint&)>& f) {
  const auto n = static_cast<std::int64_t>(rule.size());
  const std::vector<double> terms = par::map_indexed<double>(n, [&](std::int64_t i) {
    const auto k = static_cast<std::size_t>(i);
    return rule.weights[k] * f(rule.points[k]);
  });
  return par::pairwise_sum(terms);
}

double integrate_serial(const ManifoldRule& rule,
                        const std::function<double(const ManifoldPoint&)>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * f(rule.points[i]);
  return acc;
}

}  // namespace manistats
