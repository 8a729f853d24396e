#include "manistats/checks.hpp"

#include "manistats/experiments.hpp"
#include "manistats/parallel.hpp"
#include "manistats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace manistats {

namespace {

std::vector<ManifoldKind> test_kinds() {
  return {ManifoldKind::circle(), ManifoldKind::torus(2), ManifoldKind::sphere(2),
          ManifoldKind::sphere(3), ManifoldKind::projective_plane()};
}

ManifoldPoint random_point(const ManifoldKind& kind, RngStream& rng) {
  if (kind.angular()) {
    Vec c(kind.dim());
    for (int i = 0; i < kind.dim(); ++i) c[i] = rng.uniform(-kPi, kPi);
    return make_point(kind, std::move(c));
  }
  Vec v(kind.coord_size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return make_point(kind, std::move(v));
}

Vec random_unit(int m, RngStream& rng) {
  Vec u(m);
  double n2;
  do {
    for (int i = 0; i < m; ++i) u[i] = rng.normal();
    n2 = u.squaredNorm();
  } while (n2 < 1e-12);
  return u / std::sqrt(n2);
}

// Random target below the cut time of x along a random direction.
ManifoldPoint random_reachable(const ManifoldPoint& x, RngStream& rng, double margin) {
  const int m = x.kind.dim();
  const Vec u = random_unit(m, rng);
  const double tc = cut_time(x, {x, u});
  const double t = rng.uniform(0.0, tc - margin);
  return exp_map(x, {x, t * u});
}

struct Failure {
  std::string detail;
};

using CheckFn = std::function<bool(std::string&)>;

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

std::vector<DensityModel> shipped_models() {
  std::vector<DensityModel> models;
  models.push_back(DensityModel::circle({0.0, 1.5, 0.25}));
  models.push_back(DensityModel::torus_product({{0.0, 1.5, 0.25}, {0.5, 2.0, 0.2}}));
  models.push_back(DensityModel::sphere_vmf(2, Vec{{0.0, 0.0, 1.0}}, 2.0, 0.3));
  models.push_back(DensityModel::sphere_vmf(3, Vec{{0.0, 0.0, 0.0, 1.0}}, 2.0, 0.3));
  models.push_back(DensityModel::rp2_projected_vmf(Vec{{0.0, 0.0, 1.0}}, 3.0, 0.3));
  return models;
}

namespace {

bool check_round_trip(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& kind : test_kinds()) {
    RngStream rng(seed, 11, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const Vec u = random_unit(kind.dim(), rng);
      const double tc = cut_time(x, {x, u});
      const double len = rng.uniform(0.0, tc - 1e-3);
      const Vec v = len * u;
      const ManifoldPoint y = exp_map(x, {x, v});
      const Vec w = log_map(x, y).components;
      if ((w - v).norm() > 1e-9) {
        detail = kind.name() + ": log(exp(v)) deviates by " + std::to_string((w - v).norm());
        return false;
      }
      if (!near(distance(x, y), len, 1e-10)) {
        detail = kind.name() + ": |exp step| != distance";
        return false;
      }
    }
  }
  return true;
}

bool check_transport_isometry(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& kind : test_kinds()) {
    RngStream rng(seed, 12, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const ManifoldPoint y = random_reachable(x, rng, 1e-3);
      const Vec v = random_unit(kind.dim(), rng) * rng.uniform(0.1, 2.0);
      const Vec w = random_unit(kind.dim(), rng) * rng.uniform(0.1, 2.0);
      const Vec tv = parallel_transport(x, y, {x, v}).components;
      const Vec tw = parallel_transport(x, y, {x, w}).components;
      if (!near(tv.norm(), v.norm(), 1e-12)) {
        detail = kind.name() + ": transport does not preserve norms";
        return false;
      }
      if (!near(tv.dot(tw), v.dot(w), 1e-10)) {
        detail = kind.name() + ": transport does not preserve inner products";
        return false;
      }
    }
  }
  return true;
}

bool check_transport_composition(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& kind : test_kinds()) {
    RngStream rng(seed, 13, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const Vec u = random_unit(kind.dim(), rng);
      const double tc = cut_time(x, {x, u});
      const double t2 = rng.uniform(0.1, 1.0) * (tc - 1e-3);
      const double t1 = rng.uniform(0.0, t2);
      const ManifoldPoint y = exp_map(x, {x, t1 * u});
      const ManifoldPoint z = exp_map(x, {x, t2 * u});
      const Vec v = random_unit(kind.dim(), rng);
      const Vec via = parallel_transport(y, z, parallel_transport(x, y, {x, v})).components;
      const Vec direct = parallel_transport(x, z, {x, v}).components;
      if ((via - direct).norm() > 1e-9) {
        detail = kind.name() + ": transport composition deviates by " +
                 std::to_string((via - direct).norm());
        return false;
      }
    }
  }
  return true;
}

Vec random_chart_param(const CutChart& chart, RngStream& rng, double edge_margin) {
  Vec t(chart.param_dim);
  for (int k = 0; k < chart.param_dim; ++k) {
    const auto& [lo, hi] = chart.domain[static_cast<std::size_t>(k)];
    t[k] = rng.uniform(lo + edge_margin, hi - edge_margin);
  }
  return t;
}

bool check_two_branch(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& kind : test_kinds()) {
    if (kind.family == ManifoldFamily::Sphere) continue;  // empty H_x
    RngStream rng(seed, 14, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const CutStructure cs = cut_structure(x);
      for (const auto& chart : cs.charts) {
        const Vec param = random_chart_param(chart, rng, 0.3);
        const ManifoldPoint anchor = chart.point(param);
        const BranchPair bp = chart.branches(param);
        // exactly equal on the chart
        if (std::abs(bp.phi1(anchor) - bp.phi2(anchor)) > 1e-12) {
          detail = kind.name() + ": phi1 != phi2 on the chart";
          return false;
        }
        // min of branches reproduces the distance on the neighborhood
        const Vec dv = random_unit(kind.dim(), rng) * rng.uniform(0.0, bp.radius * 0.95);
        const ManifoldPoint z = exp_map(anchor, {anchor, dv});
        const double lhs = std::min(bp.phi1(z), bp.phi2(z));
        if (!near(lhs, distance(x, z), 1e-10)) {
          detail = kind.name() + ": min(phi1, phi2) != distance, err " +
                   std::to_string(std::abs(lhs - distance(x, z)));
          return false;
        }
      }
    }
  }
  return true;
}

bool check_kappa_fd(std::string& detail, std::uint64_t seed, int trials) {
  const double h = 1e-6;
  for (const auto& kind : test_kinds()) {
    if (kind.family == ManifoldFamily::Sphere) continue;
    RngStream rng(seed, 15, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const CutStructure cs = cut_structure(x);
      for (const auto& chart : cs.charts) {
        const Vec param = random_chart_param(chart, rng, 0.3);
        const ManifoldPoint anchor = chart.point(param);
        const BranchPair bp = chart.branches(param);
        Vec grad(kind.dim());
        for (int k = 0; k < kind.dim(); ++k) {
          Vec e = Vec::Zero(kind.dim());
          e[k] = h;
          const ManifoldPoint zp = exp_map(anchor, {anchor, e});
          const ManifoldPoint zm = exp_map(anchor, {anchor, -e});
          grad[k] = ((bp.phi1(zp) - bp.phi2(zp)) - (bp.phi1(zm) - bp.phi2(zm))) / (2.0 * h);
        }
        if (!near(grad.norm(), chart.kappa(param), 1e-6)) {
          detail = kind.name() + ": |grad(phi1-phi2)| = " + std::to_string(grad.norm()) +
                   " vs kappa = " + std::to_string(chart.kappa(param));
          return false;
        }
      }
    }
  }
  return true;
}

bool check_normalization(std::string& detail) {
  for (const auto& model : shipped_models()) {
    try {
      model.check_normalization(1e-6, 96);
    } catch (const Error& e) {
      detail = model.kind().name() + ": " + e.what();
      return false;
    }
  }
  return true;
}

bool check_symmetry(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& model : shipped_models()) {
    RngStream rng(seed, 16, static_cast<std::uint64_t>(model.kind().family));
    const ManifoldPoint mean = *model.declared_mean();
    for (int t = 0; t < trials; ++t) {
      const Vec v = random_unit(model.kind().dim(), rng) * rng.uniform(0.0, kPi);
      const double a = model.density(exp_map(mean, {mean, v}));
      const double b = model.density(exp_map(mean, {mean, -v}));
      if (!near(a, b, 1e-12)) {
        detail = model.kind().name() + ": density asymmetric about the declared mean";
        return false;
      }
    }
  }
  return true;
}

bool check_stationarity(std::string& detail, std::uint64_t seed, std::size_t n) {
  for (const auto& model : shipped_models()) {
    const ManifoldPoint mean = *model.declared_mean();
    const SampleSet s = sample(model, n, seed ^ 0x57A7ULL);
    Vec g = Vec::Zero(model.kind().dim());
    for (const auto& p : s.points) g += log_map(mean, p).components;
    g /= static_cast<double>(n);
    const Mat v0 = v0_population(model, mean, 96);
    const double bound = 4.0 * std::sqrt(v0.trace() / static_cast<double>(n));
    if (g.norm() > bound) {
      detail = model.kind().name() + ": |mean log| = " + std::to_string(g.norm()) +
               " exceeds " + std::to_string(bound);
      return false;
    }
  }
  return true;
}

// Expected bin probabilities by radial quadrature; bins chosen per manifold.
bool check_sampler_gof(std::string& detail, std::uint64_t seed, std::size_t n) {
  for (const auto& model : shipped_models()) {
    const ManifoldKind kind = model.kind();
    const SampleSet s = sample(model, n, seed ^ 0x60FULL);

    std::vector<double> expected;
    std::vector<std::size_t> observed;

    auto radial_prob = [&](double lo, double hi, double band_measure_scale,
                           const std::function<ManifoldPoint(double)>& at) {
      // 64-point Gauss-Legendre of psi along the band parameter
      const Quad1D& gl = gauss_legendre(64);
      double acc = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
        acc += 0.5 * (hi - lo) * gl.weights[i] * band_measure_scale * model.density(at(t));
      }
      return acc;
    };

    if (kind.family == ManifoldFamily::Circle) {
      const int bins = 36;
      expected.assign(bins, 0.0);
      observed.assign(bins, 0);
      for (int b = 0; b < bins; ++b) {
        const double lo = -kPi + kTwoPi * b / bins;
        const double hi = lo + kTwoPi / bins;
        expected[b] = radial_prob(lo, hi, 1.0, [&](double t) {
          return make_point(kind, Vec::Constant(1, t));
        });
      }
      for (const auto& p : s.points) {
        int b = static_cast<int>((p.coords[0] + kPi) / kTwoPi * bins);
        b = std::clamp(b, 0, bins - 1);
        ++observed[static_cast<std::size_t>(b)];
      }
    } else if (kind.family == ManifoldFamily::Torus) {
      const int side = 12;
      expected.assign(side * side, 0.0);
      observed.assign(side * side, 0);
      // product structure: 2-d tensor of 1-d factor probabilities
      const Quad1D& gl = gauss_legendre(64);
      auto factor_probs = [&](int coord) {
        std::vector<double> pr(side, 0.0);
        for (int b = 0; b < side; ++b) {
          const double lo = -kPi + kTwoPi * b / side;
          const double hi = lo + kTwoPi / side;
          double acc = 0.0;
          for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
            // marginal density of one coordinate: integrate the other out
            // (product density: evaluate with the other coordinate at its
            // center and divide by that factor's density... instead compute
            // directly from the 2-d density via the product structure)
            Vec c(2);
            c[coord] = t;
            c[1 - coord] = 0.0;
            acc += 0.5 * (hi - lo) * gl.weights[i] * model.density(make_point(kind, c));
          }
          pr[b] = acc;
        }
        return pr;
      };
      // density(t, 0) = f0(t) f1(0); normalize the slices to get marginals
      std::vector<double> p0 = factor_probs(0), p1 = factor_probs(1);
      const double z0 = std::accumulate(p0.begin(), p0.end(), 0.0);
      const double z1 = std::accumulate(p1.begin(), p1.end(), 0.0);
      for (auto& v : p0) v /= z0;
      for (auto& v : p1) v /= z1;
      for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) expected[a * side + b] = p0[a] * p1[b];
      for (const auto& p : s.points) {
        int a = std::clamp(static_cast<int>((p.coords[0] + kPi) / kTwoPi * side), 0, side - 1);
        int b = std::clamp(static_cast<int>((p.coords[1] + kPi) / kTwoPi * side), 0, side - 1);
        ++observed[static_cast<std::size_t>(a * side + b)];
      }
    } else {
      // Spheres / RP^2: bands in t = <center, x> (or |<center, x>|),
      // Archimedes-type band measure.
      const ManifoldPoint mean = *model.declared_mean();
      const Vec mu = mean.coords;
      const bool rp2 = kind.family == ManifoldFamily::ProjectivePlane;
      const double tlo = rp2 ? 0.0 : -1.0;
      const int bins = 12;
      expected.assign(bins, 0.0);
      observed.assign(bins, 0);
      const int d = kind.dim();
      const Mat frame = frame_at(mean);
      for (int b = 0; b < bins; ++b) {
        const double lo = tlo + (1.0 - tlo) * b / bins;
        const double hi = tlo + (1.0 - tlo) * (b + 1) / bins;
        auto at = [&](double t) {
          // any point with <mu, x> = t; density depends only on t
          Vec y = t * mu + std::sqrt(std::max(0.0, 1.0 - t * t)) * frame.col(0);
          return make_point(kind, std::move(y));
        };
        auto measure = [&](double t) {
          const double s2 = std::max(0.0, 1.0 - t * t);
          double a = 0.0;
          if (d == 2) a = kTwoPi;                      // S^2 band: 2 pi dt
          else a = 2.0 * kTwoPi * std::sqrt(s2);       // S^3 band: 4 pi sqrt(1-t^2) dt
          return a;
        };
        const Quad1D& gl = gauss_legendre(64);
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
          acc += 0.5 * (hi - lo) * gl.weights[i] * measure(t) * model.density(at(t));
        }
        expected[b] = acc;
      }
      for (const auto& p : s.points) {
        double t = mu.dot(p.coords);
        if (rp2) t = std::abs(t);
        int b = static_cast<int>((t - tlo) / (1.0 - tlo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++observed[static_cast<std::size_t>(b)];
      }
    }

    double stat = 0.0;
    int dof = -1;
    for (std::size_t b = 0; b < expected.size(); ++b) {
      const double e = expected[b] * static_cast<double>(n);
      if (e < 1e-9) continue;
      const double o = static_cast<double>(observed[b]);
      stat += (o - e) * (o - e) / e;
      ++dof;
    }
    const double p = chi2_sf(stat, dof);
    if (p < 0.001) {
      detail = kind.name() + ": chi-square p-value " + std::to_string(p);
      return false;
    }
  }
  return true;
}

bool check_circle_exact_vs_descent(std::string& detail, std::uint64_t seed, int datasets) {
  for (int ds = 0; ds < datasets; ++ds) {
    RngStream rng(seed, 17, static_cast<std::uint64_t>(ds));
    const double center = rng.uniform(-kPi, kPi);
    const double conc = 1.0 + 3.0 * rng.uniform01();
    const DensityModel model = DensityModel::circle({center, conc, 0.1});
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform01() * 47);
    const SampleSet s = sample_stream(model, n, seed, 1000 + static_cast<std::uint64_t>(ds));
    const FrechetObjective obj = FrechetObjective::from_sample(s);
    const FrechetSolveResult exact = frechet_mean(obj);
    FrechetOptions o;
    o.force_descent = true;
    const FrechetSolveResult descent = frechet_mean(obj, o);
    if (distance(exact.mean, descent.mean) > 1e-8) {
      detail = "dataset " + std::to_string(ds) + ": exact " +
               std::to_string(exact.mean.coords[0]) + " vs descent " +
               std::to_string(descent.mean.coords[0]);
      return false;
    }
  }
  return true;
}

bool check_gradient_fd(std::string& detail, std::uint64_t seed, int trials) {
  const double h = 1e-5;
  for (const auto& kind : test_kinds()) {
    RngStream rng(seed, 18, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      // data kept clear of the cut locus of x
      SampleSet s;
      s.kind = kind;
      while (s.points.size() < 20) {
        const ManifoldPoint p = random_point(kind, rng);
        bool safe = true;
        if (kind.angular()) {
          for (Eigen::Index k = 0; k < p.coords.size(); ++k)
            if (std::abs(wrap_angle(p.coords[k] - x.coords[k])) > kPi - 0.05) safe = false;
        } else {
          const double tc = kind.family == ManifoldFamily::ProjectivePlane ? kPi / 2 : kPi;
          if (distance(x, p) > tc - 0.05) safe = false;
        }
        if (safe) s.points.push_back(p);
      }
      const FrechetObjective obj = FrechetObjective::from_sample(s);
      const Vec u = random_unit(kind.dim(), rng);
      const double lhs = obj.gradient(x).components.dot(u);
      const double fp = obj.value(exp_map(x, {x, h * u}));
      const double fm = obj.value(exp_map(x, {x, -h * u}));
      const double rhs = -0.5 * (fp - fm) / (2.0 * h);
      if (!near(lhs, rhs, 1e-6)) {
        detail = kind.name() + ": <G,u> = " + std::to_string(lhs) + " vs -F'/2 = " +
                 std::to_string(rhs);
        return false;
      }
    }
  }
  return true;
}

bool check_descent_strict(std::string& detail, std::uint64_t seed) {
  for (const auto& model : shipped_models()) {
    const SampleSet s = sample(model, 50, seed ^ 0xDE5CULL);
    FrechetOptions o;
    o.check_descent = true;
    o.force_descent = true;
    try {
      const FrechetSolveResult r = frechet_mean(FrechetObjective::from_sample(s), o);
      if (r.gradient_norm > 1e-8) {
        detail = model.kind().name() + ": non-stationary result";
        return false;
      }
    } catch (const Error& e) {
      detail = model.kind().name() + ": " + e.what();
      return false;
    }
  }
  return true;
}

bool check_tie_determinism(std::string& detail) {
  // symmetric two-point circle data: G_n = {0, pi}; the selection must be
  // reproducible and pick the lexicographically smaller representative
  SampleSet s;
  s.kind = ManifoldKind::circle();
  s.points.push_back(make_point(s.kind, Vec::Constant(1, -kPi / 2)));
  s.points.push_back(make_point(s.kind, Vec::Constant(1, kPi / 2)));
  const FrechetObjective obj = FrechetObjective::from_sample(s);
  const FrechetSolveResult a = frechet_mean(obj);
  const FrechetSolveResult b = frechet_mean(obj);
  if (!a.tie_detected) {
    detail = "tie not detected for antipodal pair";
    return false;
  }
  if (a.mean.coords[0] != b.mean.coords[0]) {
    detail = "tie selection not deterministic";
    return false;
  }
  if (std::abs(a.mean.coords[0]) > 1e-12) {
    detail = "tie selection should pick 0, got " + std::to_string(a.mean.coords[0]);
    return false;
  }
  return true;
}

bool check_hessian_fd(std::string& detail, std::uint64_t seed, int trials) {
  for (const auto& kind : test_kinds()) {
    RngStream rng(seed, 19, static_cast<std::uint64_t>(kind.family));
    for (int t = 0; t < trials; ++t) {
      const ManifoldPoint x = random_point(kind, rng);
      const Vec u = random_unit(kind.dim(), rng);
      const double tc = cut_time(x, {x, u});
      const double rho = rng.uniform(0.1, tc - 0.1);
      const ManifoldPoint y = exp_map(x, {x, rho * u});
      const Mat closed = hessian_tensor_point(x, y);
      const Mat numeric = hessian_tensor_numeric(x, y, 1e-4);
      if ((closed - numeric).cwiseAbs().maxCoeff() > 1e-5) {
        detail = kind.name() + ": closed-form vs numeric Hessian deviates by " +
                 std::to_string((closed - numeric).cwiseAbs().maxCoeff());
        return false;
      }
    }
  }
  return true;
}

bool check_j_sign_invariance(std::string& detail) {
  for (const auto& model : shipped_models()) {
    if (model.kind().family == ManifoldFamily::Sphere) continue;
    const ManifoldPoint x0 = *model.declared_mean();
    CutStructure cut = cut_structure(x0);
    const Mat j1 = j_mu_quadrature(model, cut, 256);
    for (auto& chart : cut.charts) {
      auto old_n = chart.normal_at_base;
      chart.normal_at_base = [old_n](const Vec& t) { return Vec(-old_n(t)); };
    }
    const Mat j2 = j_mu_quadrature(model, cut, 256);
    if ((j1 - j2).cwiseAbs().maxCoeff() > 1e-12) {
      detail = model.kind().name() + ": J changed under normal sign flip";
      return false;
    }
  }
  return true;
}

bool check_quadrature_doubling(std::string& detail) {
  for (const auto& model : shipped_models()) {
    const ManifoldPoint x0 = *model.declared_mean();
    const Mat j1 = j_mu_quadrature(model, x0, 256);
    const Mat j2 = j_mu_quadrature(model, x0, 512);
    if ((j1 - j2).cwiseAbs().maxCoeff() > 1e-8) {
      detail = model.kind().name() + ": J not converged, delta " +
               std::to_string((j1 - j2).cwiseAbs().maxCoeff());
      return false;
    }
    const int base_nodes = model.kind().dim() >= 3 ? 64 : 128;
    const Mat h1 = hessian_integral(model, x0, base_nodes);
    const Mat h2 = hessian_integral(model, x0, 2 * base_nodes);
    if ((h1 - h2).cwiseAbs().maxCoeff() > 1e-8) {
      detail = model.kind().name() + ": H_bar not converged, delta " +
               std::to_string((h1 - h2).cwiseAbs().maxCoeff());
      return false;
    }
  }
  return true;
}

bool check_flat_hbar(std::string& detail) {
  for (const auto& model : shipped_models()) {
    if (!model.kind().angular()) continue;
    const Mat h = hessian_integral(model, *model.declared_mean(), 128);
    const Mat id = Mat::Identity(h.rows(), h.cols());
    if ((h - id).cwiseAbs().maxCoeff() > 1e-8) {
      detail = model.kind().name() + ": H_bar != I on a flat manifold";
      return false;
    }
  }
  return true;
}

bool check_sphere_j_zero(std::string& detail) {
  for (const auto& model : shipped_models()) {
    if (model.kind().family != ManifoldFamily::Sphere) continue;
    const Mat j = j_mu_quadrature(model, *model.declared_mean());
    if (j.cwiseAbs().maxCoeff() != 0.0) {
      detail = model.kind().name() + ": J not exactly zero";
      return false;
    }
  }
  return true;
}

bool check_psi_fd_oracle(std::string& detail, bool quick) {
  for (const auto& model : shipped_models()) {
    if (quick && model.kind().dim() >= 3) continue;
    const int nodes = model.kind().dim() >= 3 ? 64 : 128;
    PredictionOptions opts;
    opts.hessian_nodes = nodes;
    opts.v0_nodes = nodes;
    const CltPrediction pred = psi_mu(model, opts);
    const Mat fd = fd_frechet_hessian(model, pred.base, 1e-3, nodes);
    const double rel = (2.0 * pred.Psi - fd).norm() / fd.norm();
    if (rel > 1e-3) {
      detail = model.kind().name() + ": rel Frobenius error " + std::to_string(rel);
      return false;
    }
  }
  return true;
}

bool check_sigma_equivariance(std::string& detail, std::uint64_t seed) {
  RngStream rng(seed, 20);
  const DensityModel model = shipped_models()[4];  // RP^2
  const CltPrediction pred = psi_mu(model);
  const int m = pred.Psi.rows();
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = rng.normal();
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  CltPrediction rotated = pred;
  rotated.Psi = q * pred.Psi * q.transpose();
  rotated.V0 = q * pred.V0 * q.transpose();
  const Mat sigma_rot = clt_covariance(rotated);
  const Mat expected = q * pred.Sigma * q.transpose();
  if ((sigma_rot - expected).cwiseAbs().maxCoeff() > 1e-10) {
    detail = "Sigma not equivariant under orthogonal frame change";
    return false;
  }
  return true;
}

ExperimentConfig tiny_experiment(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model = DensityModel::circle({0.0, 1.5, 0.25});
  cfg.n_grid = {100};
  cfg.replicates = 100;
  cfg.seed = seed;
  cfg.checks = {"clt"};
  cfg.se_band = 10.0;  // smoke scale; bands are not the subject here
  return cfg;
}

bool check_report_roundtrip(std::string& detail, std::uint64_t seed) {
  const ExperimentReport rep = run_clt_experiment(tiny_experiment(seed));
  const std::string text = rep.to_json();
  const ExperimentReport loaded = ExperimentReport::from_json(text);
  if (loaded.to_json() != text) {
    detail = "report did not survive a JSON round trip";
    return false;
  }
  try {
    std::string bad = text;
    const auto pos = bad.find("\"format_version\": 1");
    bad.replace(pos, std::string("\"format_version\": 1").size(), "\"format_version\": 999");
    ExperimentReport::from_json(bad);
    detail = "unknown format version was accepted";
    return false;
  } catch (const VersionError&) {
  }
  return true;
}

bool check_reproducibility(std::string& detail, std::uint64_t seed) {
  const std::string a = run_clt_experiment(tiny_experiment(seed)).to_json();
  const std::string b = run_clt_experiment(tiny_experiment(seed)).to_json();
  if (a != b) {
    detail = "two runs with identical config differ";
    return false;
  }
  return true;
}

bool check_vol_probe(std::string& detail, std::uint64_t seed, std::size_t points) {
  struct Case {
    ManifoldKind kind;
    ManifoldPoint x0;
  };
  std::vector<Case> cases;
  cases.push_back({ManifoldKind::circle(), make_point(ManifoldKind::circle(), Vec::Zero(1))});
  cases.push_back({ManifoldKind::torus(2), make_point(ManifoldKind::torus(2), Vec::Zero(2))});
  cases.push_back({ManifoldKind::projective_plane(),
                   make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}})});
  for (const auto& c : cases) {
    const VolProbeResult r =
        vol_A_delta_probe(c.kind, c.x0, {0.05, 0.1, 0.2}, points, seed ^ 0x7052ULL);
    if (!r.within_bands) {
      detail = c.kind.name() + ": estimate outside 3 MC standard errors";
      return false;
    }
    if (r.loglog_slope < 0.9 || r.loglog_slope > 1.1) {
      detail = c.kind.name() + ": log-log slope " + std::to_string(r.loglog_slope);
      return false;
    }
  }
  return true;
}

bool check_parallel_kernels(std::string& detail, std::uint64_t seed) {
  // quadrature: pairwise kernel vs plain serial accumulation
  const DensityModel model = shipped_models()[2];  // S^2
  const ManifoldPoint x0 = *model.declared_mean();
  const ManifoldRule rule = manifold_rule(x0, 64);
  auto f = [&](const ManifoldPoint& p) { return model.density(p); };
  const double a = integrate(rule, f);
  const double b = integrate_serial(rule, f);
  if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) {
    detail = "parallel and serial quadrature disagree";
    return false;
  }

  // replicate batch: identical bits independent of kernel mode
  const auto run = [&](par::Mode mode) {
    const par::Mode saved = par::mode();
    par::mode() = mode;
    const std::string out = run_clt_experiment(tiny_experiment(seed)).to_json();
    par::mode() = saved;
    return out;
  };
  const std::string serial = run(par::Mode::Serial);
  const std::string parallel = run(par::mode());
  // the runtime block records the mode, so compare everything after it
  const auto tail = [](const std::string& s) { return s.substr(s.find("\"prediction\"")); };
  if (tail(serial) != tail(parallel)) {
    detail = "replicate batch differs between serial and parallel kernels";
    return false;
  }
  return true;
}

}  // namespace

std::vector<CheckResult> run_check_suite(std::uint64_t seed, bool quick,
                                         const std::string& filter) {
  const int geo_trials = quick ? 100 : 1000;
  const int small_trials = quick ? 20 : 100;
  const int datasets = quick ? 100 : 500;
  const std::size_t gof_n = quick ? 20000 : 100000;
  const std::size_t vol_points = quick ? 50000 : 200000;

  std::vector<std::pair<std::string, CheckFn>> checks = {
      {"geometry/round_trip", [&](std::string& d) { return check_round_trip(d, seed, geo_trials); }},
      {"geometry/transport_isometry",
       [&](std::string& d) { return check_transport_isometry(d, seed, geo_trials); }},
      {"geometry/transport_composition",
       [&](std::string& d) { return check_transport_composition(d, seed, geo_trials); }},
      {"geometry/two_branch", [&](std::string& d) { return check_two_branch(d, seed, small_trials); }},
      {"geometry/kappa_fd", [&](std::string& d) { return check_kappa_fd(d, seed, small_trials); }},
      {"measures/normalization", [&](std::string& d) { return check_normalization(d); }},
      {"measures/symmetry", [&](std::string& d) { return check_symmetry(d, seed, small_trials); }},
      {"measures/stationarity", [&](std::string& d) { return check_stationarity(d, seed, gof_n); }},
      {"measures/sampler_gof", [&](std::string& d) { return check_sampler_gof(d, seed, gof_n); }},
      {"frechet/circle_exact_vs_descent",
       [&](std::string& d) { return check_circle_exact_vs_descent(d, seed, datasets); }},
      {"frechet/gradient_fd", [&](std::string& d) { return check_gradient_fd(d, seed, small_trials); }},
      {"frechet/descent_strict", [&](std::string& d) { return check_descent_strict(d, seed); }},
      {"frechet/tie_determinism", [&](std::string& d) { return check_tie_determinism(d); }},
      {"asymptotics/hessian_fd", [&](std::string& d) { return check_hessian_fd(d, seed, small_trials); }},
      {"asymptotics/j_sign_invariance", [&](std::string& d) { return check_j_sign_invariance(d); }},
      {"asymptotics/quadrature_doubling", [&](std::string& d) { return check_quadrature_doubling(d); }},
      {"asymptotics/flat_hbar_identity", [&](std::string& d) { return check_flat_hbar(d); }},
      {"asymptotics/sphere_j_zero", [&](std::string& d) { return check_sphere_j_zero(d); }},
      {"asymptotics/psi_fd_oracle", [&](std::string& d) { return check_psi_fd_oracle(d, quick); }},
      {"asymptotics/sigma_equivariance",
       [&](std::string& d) { return check_sigma_equivariance(d, seed); }},
      {"experiments/report_roundtrip",
       [&](std::string& d) { return check_report_roundtrip(d, seed); }},
      {"experiments/reproducibility",
       [&](std::string& d) { return check_reproducibility(d, seed); }},
      {"experiments/vol_probe", [&](std::string& d) { return check_vol_probe(d, seed, vol_points); }},
      {"parallel/kernel_agreement", [&](std::string& d) { return check_parallel_kernels(d, seed); }},
  };

  std::vector<CheckResult> results;
  for (auto& [name, fn] : checks) {
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    CheckResult r;
    r.name = name;
    try {
      r.passed = fn(r.detail);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace manistats
