#include "manistats/frechet.hpp"

#include "manistats/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace manistats {

FrechetObjective FrechetObjective::from_sample(SampleSet sample) {
  if (sample.points.empty()) throw EmptyData("Frechet objective needs data");
  FrechetObjective o;
  o.kind_ = sample.kind;
  o.points_ = std::move(sample.points);
  return o;
}

FrechetObjective FrechetObjective::from_model(const DensityModel& model, int nodes_per_dim) {
  FrechetObjective o;
  o.kind_ = model.kind();
  o.model_ = std::make_shared<DensityModel>(model);
  o.nodes_per_dim_ = nodes_per_dim;
  return o;
}

double FrechetObjective::value(const ManifoldPoint& x) const {
  require_same_kind(kind_, x.kind, "frechet_value");
  if (model_) {
    const ManifoldRule rule = manifold_rule(x, nodes_per_dim_);
    return integrate(rule, [&](const ManifoldPoint& y) {
      const double r = distance(x, y);
      return r * r * model_->density(y);
    });
  }
  if (points_.empty()) throw EmptyData("frechet_value: empty sample");
  std::vector<double> terms(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double r = distance(x, points_[i]);
    terms[i] = r * r;
  }
  return par::pairwise_sum(terms) / static_cast<double>(points_.size());
}

namespace {

double clamp1(double t) { return std::min(1.0, std::max(-1.0, t)); }

// Allocation-free accumulation of sum log_x(xi_i) over the sample, skipping
// points inside the eps band. The frame conversion happens once at the end.
Vec sum_log_sample(const ManifoldKind& kind, const ManifoldPoint& x,
                   const std::vector<ManifoldPoint>& pts, double eps_cut,
                   std::size_t* skipped_out) {
  const int m = kind.dim();
  std::size_t skipped = 0;
  Vec acc;
  if (kind.angular()) {
    acc = Vec::Zero(m);
    for (const auto& p : pts) {
      bool in_band = false;
      for (int k = 0; k < m; ++k) {
        double d = p.coords[k] - x.coords[k];
        if (d > kPi) d -= kTwoPi;
        else if (d <= -kPi) d += kTwoPi;
        if (std::abs(d) > kPi - eps_cut) {
          in_band = true;
          break;
        }
      }
      if (in_band) {
        ++skipped;
        continue;
      }
      for (int k = 0; k < m; ++k) {
        double d = p.coords[k] - x.coords[k];
        if (d > kPi) d -= kTwoPi;
        else if (d <= -kPi) d += kTwoPi;
        acc[k] += d;
      }
    }
  } else {
    const bool rp2 = kind.family == ManifoldFamily::ProjectivePlane;
    const double tc = rp2 ? kPi / 2.0 : kPi;
    Vec amb = Vec::Zero(x.coords.size());
    for (const auto& p : pts) {
      double c = x.coords.dot(p.coords);
      double s = 1.0;
      if (rp2 && c < 0.0) {
        s = -1.0;
        c = -c;
      }
      const double rho = std::acos(clamp1(c));
      if (rho > tc - eps_cut) {
        ++skipped;
        continue;
      }
      if (rho < 1e-15) continue;  // zero log contribution
      const double f = rho / std::sin(rho);
      // amb += f * (s p - c x)
      amb.noalias() += (f * s) * p.coords;
      amb.noalias() -= (f * c) * x.coords;
    }
    acc = frame_at(x).transpose() * amb;
  }
  if (skipped_out) *skipped_out = skipped;
  return acc;
}

}  // namespace

TangentVector FrechetObjective::gradient_excluding(const ManifoldPoint& x,
                                                   std::size_t* excluded,
                                                   double eps_cut) const {
  require_same_kind(kind_, x.kind, "frechet_gradient_field");
  const int m = kind_.dim();
  if (model_) {
    const ManifoldRule rule = manifold_rule(x, nodes_per_dim_);
    std::vector<Vec> terms(rule.size(), Vec::Zero(m));
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const ManifoldPoint& y = rule.points[i];
      try {
        terms[i] = rule.weights[i] * model_->density(y) * log_map(x, y, eps_cut).components;
      } catch (const CutLocusError&) {
        // node inside the cut band contributes zero (measure-zero set)
      }
    }
    if (excluded) *excluded = 0;
    return {x, par::pairwise_sum(terms)};
  }
  if (points_.empty()) throw EmptyData("frechet_gradient_field: empty sample");
  std::size_t skipped = 0;
  const Vec acc = sum_log_sample(kind_, x, points_, eps_cut, &skipped);
  if (excluded) *excluded = skipped;
  return {x, acc / static_cast<double>(points_.size())};
}

TangentVector FrechetObjective::gradient(const ManifoldPoint& x, double eps_cut) const {
  if (!model_) {
    std::vector<std::size_t> offenders;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      bool in_band = false;
      if (kind_.angular()) {
        for (Eigen::Index k = 0; k < x.coords.size(); ++k)
          if (std::abs(wrap_angle(points_[i].coords[k] - x.coords[k])) > kPi - eps_cut)
            in_band = true;
      } else {
        const double tc = kind_.family == ManifoldFamily::ProjectivePlane ? kPi / 2.0 : kPi;
        in_band = distance(x, points_[i]) > tc - eps_cut;
      }
      if (in_band) offenders.push_back(i);
    }
    if (!offenders.empty())
      throw CutLocusData("frechet_gradient_field: sample points in the cut band of x",
                         std::move(offenders));
  }
  return gradient_excluding(x, nullptr, eps_cut);
}

double frechet_value(const FrechetObjective& obj, const ManifoldPoint& x) {
  return obj.value(x);
}

TangentVector frechet_gradient_field(const FrechetObjective& obj, const ManifoldPoint& x) {
  return obj.gradient(x);
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

struct StartResult {
  StartResult() = default;
  explicit StartResult(ManifoldPoint p) : x(std::move(p)) {}
  ManifoldPoint x;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::int64_t iterations = 0;
  std::size_t exclusions = 0;
  bool converged = false;
  std::string error;
};

StartResult descend(const FrechetObjective& obj, ManifoldPoint x, const FrechetOptions& opts) {
  StartResult r{x};
  constexpr double kArmijoC1 = 1e-4;
  double fx = obj.value(x);
  for (std::int64_t it = 0; it < opts.max_iters; ++it) {
    std::size_t skipped = 0;
    const TangentVector g = obj.gradient_excluding(x, &skipped, opts.eps_cut);
    r.exclusions += skipped;
    const double gn = g.norm();
    if (gn <= opts.grad_tol) {
      r.converged = true;
      r.grad_norm = gn;
      break;
    }
    // Step x <- exp_x(alpha G); alpha = 1 is exact on flat manifolds.
    // Acceptance requires a strict decrease; once F stops moving at machine
    // precision the point is treated as stationary.
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-16) {
      const ManifoldPoint xn = exp_map(x, {x, alpha * g.components});
      const double fn = obj.value(xn);
      if (fn < fx && fn <= fx - 2.0 * kArmijoC1 * alpha * gn * gn) {
        if (opts.check_descent && !(fn < fx))
          throw SolverFailure("descent step failed to strictly decrease F");
        x = xn;
        fx = fn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++r.iterations;
    r.grad_norm = gn;
    if (!accepted) break;  // line search exhausted; treat as stationary
  }
  if (!r.converged) {
    // Near the minimum, F differences saturate at machine precision before
    // |G| reaches the tolerance. The gradient itself is still accurately
    // computable, so polish with the fixed-point iteration of the
    // stationarity equation, x <- exp_x(G(x)), while |G| keeps decreasing.
    double gn = obj.gradient_excluding(x, nullptr, opts.eps_cut).norm();
    if (gn <= 1e-5) {
      for (int p = 0; p < 200; ++p) {
        if (gn <= opts.grad_tol) break;
        const TangentVector g = obj.gradient_excluding(x, nullptr, opts.eps_cut);
        const ManifoldPoint xn = exp_map(x, {x, g.components});
        const double gnn = obj.gradient_excluding(xn, nullptr, opts.eps_cut).norm();
        if (gnn >= gn) break;
        x = xn;
        gn = gnn;
        ++r.iterations;
      }
      fx = obj.value(x);
      r.grad_norm = gn;
      r.converged = gn <= 1e-8;
    }
  }
  r.x = x;
  r.objective = fx;
  if (!r.converged) {
    const TangentVector g = obj.gradient_excluding(x, nullptr, opts.eps_cut);
    r.grad_norm = g.norm();
    r.converged = r.grad_norm <= 1e-8;
  }
  return r;
}

FrechetSolveResult circle_exact(const FrechetObjective& obj, const FrechetOptions& opts) {
  const auto& pts = obj.points();
  const std::size_t n = pts.size();
  double lift_mean = 0.0;
  for (const auto& p : pts) lift_mean += p.coords[0];
  lift_mean /= static_cast<double>(n);

  // Every local minimizer of the circular Frechet function is an
  // arithmetic-mean lift shifted by a multiple of 2 pi / n.
  std::vector<std::pair<double, double>> cands;  // (objective, angle)
  cands.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = wrap_angle(lift_mean + kTwoPi * static_cast<double>(k) /
                                                  static_cast<double>(n));
    const ManifoldPoint c = {obj.kind(), Vec::Constant(1, ang)};
    cands.emplace_back(obj.value(c), ang);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < cands.size(); ++k)
    if (cands[k].first < cands[best].first) best = k;

  bool tie = false;
  double best_angle = cands[best].second;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (k == best) continue;
    if (cands[k].first <= cands[best].first + opts.tie_tol &&
        std::abs(wrap_angle(cands[k].second - best_angle)) > 1e-9) {
      tie = true;
      if (cands[k].second < best_angle) best_angle = cands[k].second;
    }
  }

  FrechetSolveResult res{ManifoldPoint{obj.kind(), Vec::Constant(1, best_angle)}};
  res.objective = obj.value(res.mean);
  res.gradient_norm = obj.gradient_excluding(res.mean, &res.cut_exclusions).norm();
  res.iterations = 0;
  res.starts = static_cast<int>(n);
  res.tie_detected = tie;
  return res;
}

}  // namespace

ManifoldPoint extrinsic_start(const ManifoldKind& kind, const std::vector<ManifoldPoint>& pts) {
  if (pts.empty()) throw EmptyData("extrinsic_start: empty sample");
  switch (kind.family) {
    case ManifoldFamily::Circle:
    case ManifoldFamily::Torus: {
      Vec c(kind.dim());
      for (int k = 0; k < kind.dim(); ++k) {
        double s = 0.0, co = 0.0;
        for (const auto& p : pts) {
          s += std::sin(p.coords[k]);
          co += std::cos(p.coords[k]);
        }
        c[k] = std::atan2(s, co);
      }
      return make_point(kind, std::move(c));
    }
    case ManifoldFamily::Sphere: {
      Vec m = Vec::Zero(kind.coord_size());
      for (const auto& p : pts) m += p.coords;
      if (m.norm() < 1e-12) return pts.front();
      return make_point(kind, std::move(m));
    }
    case ManifoldFamily::ProjectivePlane: {
      Mat s = Mat::Zero(3, 3);
      for (const auto& p : pts) s += p.coords * p.coords.transpose();
      Eigen::SelfAdjointEigenSolver<Mat> eig(s);
      Vec lead = eig.eigenvectors().col(2);  // largest eigenvalue
      return make_point(kind, std::move(lead));
    }
  }
  throw Error("extrinsic_start: unsupported kind");
}

FrechetSolveResult frechet_mean(const FrechetObjective& obj, const FrechetOptions& opts) {
  if (obj.is_sample() && obj.points().empty()) throw EmptyData("frechet_mean: empty sample");

  if (obj.kind().family == ManifoldFamily::Circle && obj.is_sample() && !opts.force_descent)
    return circle_exact(obj, opts);

  const int m = obj.kind().dim();
  const ManifoldPoint x0 = obj.is_sample() ? extrinsic_start(obj.kind(), obj.points())
                                           : [&] {
                                               Vec c = Vec::Zero(obj.kind().coord_size());
                                               if (!obj.kind().angular()) c[0] = 1.0;
                                               return make_point(obj.kind(), std::move(c));
                                             }();

  // 3^m lattice of normal-coordinate offsets around the extrinsic start.
  std::vector<ManifoldPoint> starts;
  const double r = kPi / 2.0;
  const int total = static_cast<int>(std::pow(3, m));
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    Vec off(m);
    for (int k = 0; k < m; ++k) {
      off[k] = r * static_cast<double>(rem % 3 - 1);
      rem /= 3;
    }
    starts.push_back(exp_map(x0, {x0, off}));
  }
  if (m == 1 && obj.is_sample()) {
    // One-dimensional Frechet functions have up to n basins of width ~2pi/n;
    // the 3-point lattice can miss the global one. Seed a global grid at
    // sub-basin spacing.
    const std::size_t k_starts =
        std::min<std::size_t>(128, std::max<std::size_t>(9, 2 * obj.points().size()));
    for (std::size_t k = 0; k < k_starts; ++k) {
      Vec off = Vec::Constant(1, -kPi + kTwoPi * static_cast<double>(k) /
                                         static_cast<double>(k_starts));
      starts.push_back(exp_map(x0, {x0, off}));
    }
  }

  const std::vector<StartResult> results = par::map_indexed<StartResult>(
      static_cast<std::int64_t>(starts.size()), [&](std::int64_t i) {
        try {
          return descend(obj, starts[static_cast<std::size_t>(i)], opts);
        } catch (const std::exception& e) {
          StartResult failed{starts[static_cast<std::size_t>(i)]};
          failed.error = e.what();
          return failed;
        }
      });
  for (const auto& sr : results)
    if (!sr.error.empty()) throw SolverFailure("frechet_mean: " + sr.error);

  // Deterministic argmin-then-lexicographic reduction.
  const StartResult* best = nullptr;
  for (const auto& sr : results) {
    if (!sr.converged) continue;
    if (!best || sr.objective < best->objective ||
        (sr.objective <= best->objective + opts.tie_tol &&
         lex_less(sr.x.coords, best->x.coords)))
      best = &sr;
  }
  if (!best) {
    std::string diag = "frechet_mean: no start converged; gradient norms:";
    for (const auto& sr : results) diag += " " + std::to_string(sr.grad_norm);
    throw SolverFailure(diag);
  }

  bool tie = false;
  for (const auto& sr : results) {
    if (&sr == best || !sr.converged) continue;
    if (sr.objective <= best->objective + opts.tie_tol &&
        distance(sr.x, best->x) > 1e-8)
      tie = true;
  }

  FrechetSolveResult res{best->x};
  res.objective = best->objective;
  res.gradient_norm = best->grad_norm;
  res.starts = static_cast<int>(starts.size());
  res.tie_detected = tie;
  for (const auto& sr : results) {
    res.iterations += sr.iterations;
    res.cut_exclusions += sr.exclusions;
  }
  if (res.gradient_norm > 1e-8)
    throw SolverFailure("frechet_mean: stationarity check failed, |G| = " +
                        std::to_string(res.gradient_norm));
  return res;
}

ConsistencyTable consistency_probe(const DensityModel& model,
                                   const std::vector<std::size_t>& n_grid, int replicates,
                                   std::uint64_t seed) {
  if (!model.declared_mean()) throw Error("consistency_probe: model has no declared mean");
  const ManifoldPoint x0 = *model.declared_mean();

  ConsistencyTable table;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const std::size_t n = n_grid[ni];
    std::vector<double> dists = par::map_indexed<double>(replicates, [&](std::int64_t rep) {
      try {
        const SampleSet s =
            sample_stream(model, n, seed, (ni << 32) ^ static_cast<std::uint64_t>(rep));
        const FrechetSolveResult r = frechet_mean(FrechetObjective::from_sample(s));
        return distance(x0, r.mean);
      } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    });
    std::erase_if(dists, [](double d) { return std::isnan(d); });
    if (dists.size() < static_cast<std::size_t>(0.99 * replicates))
      throw ExperimentInvalid("consistency_probe: more than 1% of solves failed at n = " +
                              std::to_string(n));
    std::sort(dists.begin(), dists.end());
    ConsistencyRow row;
    row.n = n;
    row.median = dists[dists.size() / 2];
    row.q95 = dists[static_cast<std::size_t>(0.95 * static_cast<double>(dists.size() - 1))];
    table.rows.push_back(row);
  }
  int dec = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].median < table.rows[i - 1].median) ++dec;
  table.monotone_fraction =
      table.rows.size() > 1
          ? static_cast<double>(dec) / static_cast<double>(table.rows.size() - 1)
          : 1.0;
  table.median_strictly_decreasing = table.rows.size() > 1 && table.monotone_fraction == 1.0;
  return table;
}

std::string FrechetSolveResult::to_json() const {
  nlohmann::ordered_json j;
  j["mean"] = nlohmann::ordered_json::parse(mean.to_json());
  j["objective"] = objective;
  j["gradient_norm"] = gradient_norm;
  j["iterations"] = iterations;
  j["starts"] = starts;
  j["tie_detected"] = tie_detected;
  j["cut_exclusions"] = cut_exclusions;
  return j.dump(2);
}

}  // namespace manistats
