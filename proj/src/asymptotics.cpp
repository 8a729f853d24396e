#include "manistats/asymptotics.hpp"

#include "manistats/parallel.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>

namespace manistats {

namespace {

// rho * cot(rho) with the removable singularity filled in.
double rho_cot_rho(double rho) {
  if (std::abs(rho) < 1e-6) return 1.0 - rho * rho / 3.0;
  return rho * std::cos(rho) / std::sin(rho);
}

void check_not_cut(const ManifoldPoint& x, const ManifoldPoint& y, double eps_cut,
                   const char* where) {
  if (x.kind.angular()) {
    for (Eigen::Index k = 0; k < x.coords.size(); ++k)
      if (std::abs(wrap_angle(y.coords[k] - x.coords[k])) > kPi - eps_cut)
        throw CutLocusError(std::string(where) + ": target in the cut-locus band");
    return;
  }
  const double tc = x.kind.family == ManifoldFamily::ProjectivePlane ? kPi / 2.0 : kPi;
  if (distance(x, y) > tc - eps_cut)
    throw CutLocusError(std::string(where) + ": target in the cut-locus band");
}

}  // namespace

Mat hessian_tensor_point(const ManifoldPoint& x, const ManifoldPoint& y, double eps_cut) {
  require_same_kind(x.kind, y.kind, "hessian_tensor_point");
  const int m = x.kind.dim();
  check_not_cut(x, y, eps_cut, "hessian_tensor_point");
  if (x.kind.angular()) return Mat::Identity(m, m);

  const double rho = distance(x, y);
  if (rho < 1e-6) return Mat::Identity(m, m);
  const Vec v = log_map(x, y, eps_cut).components;
  const double a = rho_cot_rho(rho);
  return a * Mat::Identity(m, m) + ((1.0 - a) / (rho * rho)) * (v * v.transpose());
}

Mat hessian_tensor_numeric(const ManifoldPoint& x, const ManifoldPoint& y, double h) {
  require_same_kind(x.kind, y.kind, "hessian_tensor_numeric");
  if (!(h > 0.0)) throw InvalidStep("hessian_tensor_numeric: step must be positive");
  const int m = x.kind.dim();
  Mat d(m, m);
  for (int k = 0; k < m; ++k) {
    Vec e = Vec::Zero(m);
    e[k] = h;
    const ManifoldPoint xp = exp_map(x, {x, e});
    const ManifoldPoint xm = exp_map(x, {x, -e});
    const Vec lp = parallel_transport(xp, x, log_map(xp, y)).components;
    const Vec lm = parallel_transport(xm, x, log_map(xm, y)).components;
    d.col(k) = (lp - lm) / (2.0 * h);
  }
  // d approximates D_v exp^{-1}_{(.)}(y); negate for the positive-Hessian
  // convention.
  return -d;
}

Mat hessian_integral(const DensityModel& model, const ManifoldPoint& x0, int nodes_per_dim) {
  const int m = x0.kind.dim();
  const ManifoldRule rule = manifold_rule(x0, nodes_per_dim);
  const std::vector<Mat> terms = par::map_indexed<Mat>(
      static_cast<std::int64_t>(rule.size()), [&](std::int64_t i) -> Mat {
        const auto k = static_cast<std::size_t>(i);
        const ManifoldPoint& y = rule.points[k];
        try {
          return rule.weights[k] * model.density(y) * hessian_tensor_point(x0, y);
        } catch (const CutLocusError&) {
          return Mat::Zero(m, m);  // nodes in the eps band contribute O(eps)
        }
      });
  return par::pairwise_sum(terms);
}

Mat j_mu_quadrature(const DensityModel& model, const ManifoldPoint& x0, int nodes_per_dim) {
  return j_mu_quadrature(model, cut_structure(x0), nodes_per_dim);
}

Mat j_mu_quadrature(const DensityModel& model, const CutStructure& cut, int nodes_per_dim) {
  require_same_kind(model.kind(), cut.kind, "j_mu_quadrature");
  const int m = cut.kind.dim();
  const auto trace = model.cut_density_trace(cut);

  Mat total = Mat::Zero(m, m);
  for (std::size_t ci = 0; ci < cut.charts.size(); ++ci) {
    const CutChart& chart = cut.charts[ci];
    const auto& psi = trace[ci];

    if (chart.param_dim == 0) {
      // Point chart: direct evaluation against counting measure.
      const Vec t(0);
      const Vec n = chart.normal_at_base(t);
      total += chart.rho(t) * chart.kappa(t) * chart.tau_prime(t) * psi(t) *
               chart.measure_density(t) * (n * n.transpose());
      continue;
    }

    std::vector<Grid1D> grids;
    for (const auto& [lo, hi] : chart.domain)
      grids.push_back(composite_gl(lo, hi, nodes_per_dim));
    std::size_t count = 1;
    for (const auto& g : grids) count *= g.nodes.size();

    const std::vector<Mat> terms = par::map_indexed<Mat>(
        static_cast<std::int64_t>(count), [&](std::int64_t flat) -> Mat {
          std::size_t rem = static_cast<std::size_t>(flat);
          Vec t(chart.param_dim);
          double w = 1.0;
          for (int k = 0; k < chart.param_dim; ++k) {
            const std::size_t i = rem % grids[k].nodes.size();
            rem /= grids[k].nodes.size();
            t[k] = grids[k].nodes[i];
            w *= grids[k].weights[i];
          }
          const Vec n = chart.normal_at_base(t);
          return w * chart.measure_density(t) * chart.rho(t) * chart.kappa(t) *
                 chart.tau_prime(t) * psi(t) * (n * n.transpose());
        });
    total += par::pairwise_sum(terms);
  }
  return total;
}

Mat v0_population(const DensityModel& model, const ManifoldPoint& x0, int nodes_per_dim) {
  const int m = x0.kind.dim();
  const ManifoldRule rule = manifold_rule(x0, nodes_per_dim);

  struct Moments {
    Mat second;
    Vec first;
    double mass = 0.0;
    Moments operator+(const Moments& o) const {
      if (second.size() == 0) return o;
      if (o.second.size() == 0) return *this;
      return {second + o.second, first + o.first, mass + o.mass};
    }
  };

  const std::vector<Moments> terms = par::map_indexed<Moments>(
      static_cast<std::int64_t>(rule.size()), [&](std::int64_t i) -> Moments {
        const auto k = static_cast<std::size_t>(i);
        const ManifoldPoint& y = rule.points[k];
        const double w = rule.weights[k] * model.density(y);
        try {
          const Vec v = log_map(x0, y).components;
          return {w * (v * v.transpose()), w * v, w};
        } catch (const CutLocusError&) {
          return {Mat::Zero(m, m), Vec::Zero(m), 0.0};
        }
      });
  const Moments mom = par::pairwise_sum(terms);
  if (mom.mass <= 0.0) throw NumericalInconsistency("v0: zero integrated mass");
  const Vec mean = mom.first / mom.mass;
  Mat v0 = mom.second / mom.mass - mean * mean.transpose();
  return 0.5 * (v0 + v0.transpose());
}

Mat v0_sample(const SampleSet& sample, const ManifoldPoint& x0) {
  require_same_kind(sample.kind, x0.kind, "v0_sample");
  const int m = x0.kind.dim();
  if (sample.points.empty()) return Mat::Zero(m, m);
  Vec mean = Vec::Zero(m);
  Mat second = Mat::Zero(m, m);
  std::size_t used = 0;
  for (const auto& p : sample.points) {
    try {
      const Vec v = log_map(x0, p).components;
      mean += v;
      second += v * v.transpose();
      ++used;
    } catch (const CutLocusError&) {
    }
  }
  if (used == 0) return Mat::Zero(m, m);
  mean /= static_cast<double>(used);
  Mat v0 = second / static_cast<double>(used) - mean * mean.transpose();
  return 0.5 * (v0 + v0.transpose());
}

Mat clt_covariance(const CltPrediction& pred) {
  if (!pred.psi_positive_definite)
    throw DegenerateHessian("clt_covariance: Psi is not strictly positive definite",
                            pred.psi_eigenvalues);
  const Eigen::PartialPivLU<Mat> lu(pred.Psi);
  const Mat z = lu.solve(pred.V0);
  Mat sigma = lu.solve(z.transpose());
  return 0.5 * (sigma + sigma.transpose());
}

CltPrediction psi_mu(const DensityModel& model, const ManifoldPoint& x0,
                     const PredictionOptions& opts) {
  require_same_kind(model.kind(), x0.kind, "psi_mu");
  CltPrediction pred{x0};
  pred.H_bar = hessian_integral(model, x0, opts.hessian_nodes);
  pred.J = j_mu_quadrature(model, x0, opts.j_nodes);
  pred.Psi = pred.H_bar - pred.J;
  if ((pred.Psi - pred.Psi.transpose()).cwiseAbs().maxCoeff() > 1e-6)
    throw NumericalInconsistency("psi_mu: Psi is not symmetric within tolerance");
  pred.V0 = v0_population(model, x0, opts.v0_nodes);

  const Mat sym = 0.5 * (pred.Psi + pred.Psi.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  pred.psi_eigenvalues = eig.eigenvalues();
  pred.psi_positive_definite = pred.psi_eigenvalues.minCoeff() > 1e-10;
  if (pred.psi_positive_definite) {
    pred.Sigma = clt_covariance(pred);
  } else {
    pred.Sigma = Mat::Zero(pred.Psi.rows(), pred.Psi.cols());
  }
  return pred;
}

CltPrediction psi_mu(const DensityModel& model, const PredictionOptions& opts) {
  if (!model.declared_mean())
    throw Error("psi_mu: model has no declared mean; pass x0 explicitly");
  return psi_mu(model, *model.declared_mean(), opts);
}

double linearization_residual(const DensityModel& model, const ManifoldPoint& x0,
                              const ManifoldPoint& x, const CltPrediction& pred,
                              int nodes_per_dim) {
  const FrechetObjective obj = FrechetObjective::from_model(model, nodes_per_dim);
  const TangentVector g = obj.gradient_excluding(x, nullptr);
  const Vec transported = parallel_transport(x, x0, g).components;
  const Vec lg = log_map(x0, x).components;
  return (transported + pred.Psi * lg).norm();
}

namespace {

double bisect(const std::function<double(double)>& g, double lo, double hi, double tol) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((glo <= 0.0) == (gm <= 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Crossing {
  double t = 0.0;
  Vec jump;  // rho * kappa * Pi_{p,x0}(n) expressed in the frame at x0
};

// Locates the single transversal crossing of H_z by the geodesic from x0 to
// x1 and assembles the jump term, with the normal oriented by the incoming
// branch (phi1 minimal before the crossing).
Crossing locate_crossing(const ManifoldPoint& z, const ManifoldPoint& x0,
                         const ManifoldPoint& x1) {
  const double rho01 = distance(x0, x1);
  if (rho01 <= 0.0)
    throw InvalidConfiguration("transport_expansion_check: x0 == x1");
  const TangentVector l01 = log_map(x0, x1);
  const Vec u = l01.components / rho01;
  auto gamma = [&](double t) { return exp_map(x0, {x0, t * u}); };

  constexpr int kScan = 512;
  const double tol = 1e-12;

  struct Hit {
    double t;
    int chart;    // torus coordinate index; 0 otherwise
    double sign;  // sign of d(phi1 - phi2)/dt at the crossing
  };
  std::vector<Hit> hits;

  if (z.kind.angular()) {
    const int d = z.kind.dim();
    for (int i = 0; i < d; ++i) {
      auto delta = [&](double t) {
        return wrap_angle(gamma(t).coords[i] - z.coords[i] - kPi);
      };
      double prev = delta(0.0);
      for (int s = 1; s <= kScan; ++s) {
        const double t = rho01 * s / kScan;
        const double cur = delta(t);
        // skip lift wrap-arounds (jumps of ~2 pi)
        if (std::abs(cur - prev) < kPi && (prev <= 0.0) != (cur <= 0.0)) {
          const double tz = bisect(delta, rho01 * (s - 1) / kScan, t, tol);
          hits.push_back({tz, i, cur > prev ? 1.0 : -1.0});
        }
        prev = cur;
      }
    }
  } else if (z.kind.family == ManifoldFamily::ProjectivePlane) {
    // Along the continuous spherical lift of gamma, phi1 - phi2 = 2a - pi
    // with a = arccos<lift, z_rep>; it changes sign exactly where the inner
    // product does.
    const Mat frame = frame_at(x0);
    const Vec u_amb = frame * u;
    const Vec p0 = x0.coords;
    const Vec zt = z.coords;
    auto dotf = [&](double t) { return (std::cos(t) * p0 + std::sin(t) * u_amb).dot(zt); };
    double prev = dotf(0.0);
    for (int s = 1; s <= kScan; ++s) {
      const double t = rho01 * s / kScan;
      const double cur = dotf(t);
      if ((prev <= 0.0) != (cur <= 0.0)) {
        const double tz = bisect(dotf, rho01 * (s - 1) / kScan, t, tol);
        // phi1 - phi2 = 2 arccos(dot) - pi decreases when dot increases
        hits.push_back({tz, 0, cur > prev ? -1.0 : 1.0});
      }
      prev = cur;
    }
  } else {
    throw InvalidConfiguration(
        "transport_expansion_check: spheres of dimension >= 2 have empty regular cut locus");
  }

  if (hits.size() != 1)
    throw InvalidConfiguration(
        "transport_expansion_check: expected exactly one transversal crossing, found " +
        std::to_string(hits.size()));
  const Hit hit = hits[0];
  if (hit.t <= 0.0 || hit.t >= rho01)
    throw InvalidConfiguration("transport_expansion_check: crossing not interior");

  const ManifoldPoint p = gamma(hit.t);
  Crossing c;
  c.t = hit.t;

  if (z.kind.angular()) {
    const int d = z.kind.dim();
    const double rho_zp = distance(z, p);
    const double kappa = 2.0 * kPi / rho_zp;
    Vec n = Vec::Zero(d);
    n[hit.chart] = hit.sign;  // grad(phi1-phi2) = sign * (2pi/rho) e_i
    const Vec jump_at_p = rho_zp * kappa * n;
    c.jump = parallel_transport(p, x0, {p, jump_at_p}).components;
  } else {
    // rho * kappa = pi; grad phi1 = -z_rep at the crossing for the incoming
    // a-branch, transported through the canonical-representative flip.
    const Mat frame = frame_at(x0);
    const Vec u_amb = frame * u;
    const Vec lift = std::cos(hit.t) * x0.coords + std::sin(hit.t) * u_amb;
    const double srep = p.coords.dot(lift) >= 0.0 ? 1.0 : -1.0;
    const Vec n_amb = srep * hit.sign * -z.coords;
    const TangentVector n_at_p = tangent_from_ambient(p, n_amb);
    const Vec jump_at_p = kPi * n_at_p.components;
    c.jump = parallel_transport(p, x0, {p, jump_at_p}).components;
  }
  return c;
}

}  // namespace

double taylor_expansion_residual(const ManifoldPoint& z, const ManifoldPoint& x0,
                                 const ManifoldPoint& x1) {
  const Vec lhs = parallel_transport(x1, x0, log_map(x1, z)).components;
  const Vec l0 = log_map(x0, z).components;
  const Vec l01 = log_map(x0, x1).components;
  const Mat h = hessian_tensor_point(x0, z);
  // paper-convention H = -(positive Hessian), so the linear term is -h l01
  return (lhs - (l0 - h * l01)).norm();
}

double transport_expansion_check(const ManifoldPoint& z, const ManifoldPoint& x0,
                                 const ManifoldPoint& x1) {
  const Crossing cross = locate_crossing(z, x0, x1);
  const Vec lhs = parallel_transport(x1, x0, log_map(x1, z)).components;
  const Vec l0 = log_map(x0, z).components;
  const Vec l01 = log_map(x0, x1).components;
  const Mat h = hessian_tensor_point(x0, z);
  const Vec rhs = l0 - h * l01 + cross.jump;
  return (lhs - rhs).norm();
}

Mat fd_frechet_hessian(const DensityModel& model, const ManifoldPoint& x0, double h,
                       int nodes_per_dim) {
  const int m = x0.kind.dim();
  const FrechetObjective obj = FrechetObjective::from_model(model, nodes_per_dim);
  auto f = [&](const Vec& t) { return obj.value(exp_map(x0, {x0, t})); };

  auto hess_at = [&](double step) {
    Mat hess(m, m);
    const double f0 = f(Vec::Zero(m));
    for (int j = 0; j < m; ++j) {
      Vec e = Vec::Zero(m);
      e[j] = step;
      hess(j, j) = (f(e) - 2.0 * f0 + f(-e)) / (step * step);
    }
    for (int j = 0; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        Vec epp = Vec::Zero(m), epm = Vec::Zero(m);
        epp[j] = step;
        epp[k] = step;
        epm[j] = step;
        epm[k] = -step;
        const double v = (f(epp) - f(epm) - f(-epm) + f(-epp)) / (4.0 * step * step);
        hess(j, k) = hess(k, j) = v;
      }
    }
    return hess;
  };

  const Mat h1 = hess_at(h);
  const Mat h2 = hess_at(0.5 * h);
  return (4.0 * h2 - h1) / 3.0;  // Richardson extrapolation
}

std::string CltPrediction::to_json() const {
  nlohmann::ordered_json j;
  j["base"] = nlohmann::ordered_json::parse(base.to_json());
  j["J"] = mat_to_json(J);
  j["H_bar"] = mat_to_json(H_bar);
  j["Psi"] = mat_to_json(Psi);
  j["V0"] = mat_to_json(V0);
  j["Sigma"] = mat_to_json(Sigma);
  j["psi_eigenvalues"] = vec_to_json(psi_eigenvalues);
  j["psi_positive_definite"] = psi_positive_definite;
  return j.dump(2);
}

CltPrediction CltPrediction::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  CltPrediction p{ManifoldPoint::from_json(j.at("base").dump())};
  p.J = mat_from_json(j.at("J"));
  p.H_bar = mat_from_json(j.at("H_bar"));
  p.Psi = mat_from_json(j.at("Psi"));
  p.V0 = mat_from_json(j.at("V0"));
  p.Sigma = mat_from_json(j.at("Sigma"));
  p.psi_eigenvalues = vec_from_json(j.at("psi_eigenvalues"));
  p.psi_positive_definite = j.at("psi_positive_definite").get<bool>();
  return p;
}

}  // namespace manistats
