#include "manistats/experiments.hpp"

#include "manistats/parallel.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace manistats {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool wants(const ExperimentConfig& cfg, const char* section) {
  return std::find(cfg.checks.begin(), cfg.checks.end(), section) != cfg.checks.end();
}

std::uint64_t stream_key(std::size_t n_index, std::int64_t replicate) {
  return (static_cast<std::uint64_t>(n_index) << 32) ^ static_cast<std::uint64_t>(replicate);
}

// Deterministic direction fan: the coordinate axes pattern used by the decay
// tables. m = 1: {+1, -1}; m = 2: eight equally spaced angles; m = 3: the
// cube-corner directions.
std::vector<Vec> direction_fan(int m) {
  std::vector<Vec> dirs;
  if (m == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else if (m == 2) {
    for (int k = 0; k < 8; ++k) {
      const double a = kTwoPi * k / 8.0;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      dirs.push_back(u);
    }
  } else {
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          Vec u(3);
          u << sx, sy, sz;
          dirs.push_back(u / u.norm());
        }
  }
  return dirs;
}

ManifoldPoint uniform_point(const ManifoldKind& kind, RngStream& rng) {
  if (kind.angular()) {
    Vec c(kind.dim());
    for (int i = 0; i < kind.dim(); ++i) c[i] = rng.uniform(-kPi, kPi);
    return make_point(kind, std::move(c));
  }
  Vec v(kind.coord_size());
  double n2;
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    n2 = v.squaredNorm();
  } while (n2 < 1e-24);
  return make_point(kind, std::move(v));
}

// Distance from x0 to the cut locus of z, from the closed-form descriptions.
double distance_to_cut(const ManifoldPoint& z, const ManifoldPoint& x0) {
  switch (z.kind.family) {
    case ManifoldFamily::Circle:
      return std::abs(wrap_angle(x0.coords[0] - z.coords[0] - kPi));
    case ManifoldFamily::Torus: {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < z.coords.size(); ++i)
        best = std::min(best, std::abs(wrap_angle(x0.coords[i] - z.coords[i] - kPi)));
      return best;
    }
    case ManifoldFamily::Sphere:
      return kPi - distance(z, x0);
    case ManifoldFamily::ProjectivePlane:
      return kPi / 2.0 - distance(z, x0);
  }
  return 0.0;
}

}  // namespace

VolProbeResult vol_A_delta_probe(const ManifoldKind& kind, const ManifoldPoint& x0,
                                 const std::vector<double>& deltas, std::size_t mc_points,
                                 std::uint64_t seed) {
  require_same_kind(kind, x0.kind, "vol_A_delta_probe");
  for (double d : deltas)
    if (d > kPi / 4.0) throw Error("vol_A_delta_probe: delta must be at most pi/4");

  // One cut distance per Monte Carlo point, shared across all deltas.
  const std::vector<double> dist = par::map_indexed<double>(
      static_cast<std::int64_t>(mc_points), [&](std::int64_t i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        return distance_to_cut(uniform_point(kind, rng), x0);
      });

  const double vol = kind.volume();
  VolProbeResult res;
  res.delta = deltas;
  for (double d : deltas) {
    std::size_t hits = 0;
    for (double v : dist)
      if (v < d) ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(mc_points);
    res.estimate.push_back(vol * p);
    res.standard_error.push_back(
        vol * std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(mc_points)));
    switch (kind.family) {
      case ManifoldFamily::Circle: res.closed_form.push_back(2.0 * d); break;
      case ManifoldFamily::Torus:
        res.closed_form.push_back(8.0 * kPi * d);  // paper's upper bound for T^2
        res.closed_form_is_bound = true;
        break;
      case ManifoldFamily::Sphere: res.closed_form.push_back(kTwoPi * (1.0 - std::cos(d))); break;
      case ManifoldFamily::ProjectivePlane: res.closed_form.push_back(kTwoPi * std::sin(d)); break;
    }
  }

  // Least-squares slope of log(estimate) against log(delta).
  const std::size_t k = deltas.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log(res.delta[i]);
    const double y = std::log(std::max(res.estimate[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = k * sxx - sx * sx;
  res.loglog_slope = denom != 0.0 ? (k * sxy - sx * sy) / denom : 0.0;

  res.within_bands = true;
  for (std::size_t i = 0; i < k; ++i) {
    const double err = res.estimate[i] - res.closed_form[i];
    const bool ok = res.closed_form_is_bound ? err <= 3.0 * res.standard_error[i]
                                             : std::abs(err) <= 3.0 * res.standard_error[i];
    if (!ok) res.within_bands = false;
  }
  return res;
}

namespace {

// Geometry of the transport-expansion configuration for one direction: the
// geodesic straddles a cut-hypersurface crossing at its midpoint (or, for
// spheres with empty regular cut locus, the plain Taylor expansion is used).
double transport_remainder(const ManifoldKind& kind, const ManifoldPoint& p, const Vec& u,
                           double rho) {
  const ManifoldPoint xa = exp_map(p, {p, -0.5 * rho * u});
  const ManifoldPoint xb = exp_map(p, {p, 0.5 * rho * u});
  switch (kind.family) {
    case ManifoldFamily::Circle:
    case ManifoldFamily::Torus: {
      int c = 0;
      for (Eigen::Index i = 1; i < u.size(); ++i)
        if (std::abs(u[i]) > std::abs(u[c])) c = static_cast<int>(i);
      Vec zc = p.coords;
      zc[c] = wrap_angle(zc[c] + kPi);
      const ManifoldPoint z = make_point(kind, std::move(zc));
      return transport_expansion_check(z, xa, xb);
    }
    case ManifoldFamily::ProjectivePlane: {
      const ManifoldPoint z = exp_map(p, {p, (kPi / 2.0) * u});
      return transport_expansion_check(z, xa, xb);
    }
    case ManifoldFamily::Sphere: {
      // Empty regular cut locus; check the smooth expansion against a fixed
      // off-geodesic point.
      int weakest = 0;
      for (Eigen::Index i = 1; i < u.size(); ++i)
        if (std::abs(u[i]) < std::abs(u[weakest])) weakest = static_cast<int>(i);
      Vec v = u;
      v[weakest] += 1.0;
      v.normalize();
      const ManifoldPoint z = exp_map(p, {p, 0.8 * v});
      return taylor_expansion_residual(z, xa, xb);
    }
  }
  throw Error("transport_remainder: unsupported kind");
}

}  // namespace

DecayTable residual_decay_suite(const DensityModel& model, const CltPrediction& pred,
                                const std::vector<double>& ladder) {
  if (!model.declared_mean())
    throw Error("residual_decay_suite: model has no declared mean");
  const ManifoldPoint x0 = *model.declared_mean();
  const std::vector<Vec> dirs = direction_fan(x0.kind.dim());
  constexpr double kFloor = 1e-12;

  DecayTable table;
  for (double rho : ladder) {
    DecayRow row;
    row.rho = rho;
    double lin_max = 0.0, trans_max = 0.0;
    for (const Vec& u : dirs) {
      const ManifoldPoint x = exp_map(x0, {x0, rho * u});
      lin_max = std::max(lin_max, linearization_residual(model, x0, x, pred));
      trans_max = std::max(trans_max, transport_remainder(x0.kind, x0, u, rho));
    }
    row.linearization_ratio = lin_max / rho;
    row.transport_ratio = trans_max / rho;
    row.linearization_at_floor = lin_max <= kFloor;
    row.transport_at_floor = trans_max <= kFloor;
    table.rows.push_back(row);
  }

  auto decreasing = [&](auto ratio_of, auto floor_of) {
    bool ok = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      if (floor_of(table.rows[i]) || floor_of(table.rows[i - 1])) continue;
      if (ratio_of(table.rows[i]) > ratio_of(table.rows[i - 1])) ok = false;
    }
    return ok;
  };
  table.linearization_decreasing =
      decreasing([](const DecayRow& r) { return r.linearization_ratio; },
                 [](const DecayRow& r) { return r.linearization_at_floor; });
  table.transport_decreasing =
      decreasing([](const DecayRow& r) { return r.transport_ratio; },
                 [](const DecayRow& r) { return r.transport_at_floor; });
  return table;
}

namespace {

struct Replicate {
  Vec w;
  bool ok = false;
};

void write_w_csv(const std::string& path,
                 const std::vector<std::pair<std::size_t, std::vector<Replicate>>>& all) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# manistats-replicates v1\n";
  out << "# columns: n,replicate,w...\n";
  out << std::setprecision(17);
  for (const auto& [n, reps] : all) {
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (!reps[r].ok) continue;
      out << n << "," << r;
      for (Eigen::Index i = 0; i < reps[r].w.size(); ++i) out << "," << reps[r].w[i];
      out << "\n";
    }
  }
}

}  // namespace

ExperimentReport run_clt_experiment(const ExperimentConfig& config) {
  for (std::size_t n : config.n_grid)
    if (n < 10) throw Error("experiment config: n must be at least 10");
  if (config.replicates < 1) throw Error("experiment config: replicates must be positive");
  // Covariance comparisons need at least 100 replicates; smaller runs still
  // produce a valid report but their bands are not asserted.
  const bool compare_cov = config.replicates >= 100;
  if (!config.model.declared_mean())
    throw Error("run_clt_experiment: model has no declared mean");

  const ManifoldPoint x0 = *config.model.declared_mean();
  const int m = x0.kind.dim();

  ExperimentReport report;
  report.config_echo = config.to_json();
  report.threads = par::max_threads();
  report.kernel_mode = par::mode() == par::Mode::OpenMP ? "openmp" : "serial";

  const bool need_prediction =
      wants(config, "clt") || wants(config, "residual_decay");
  if (need_prediction) report.prediction = psi_mu(config.model);

  bool all_ok = true;

  if (wants(config, "clt")) {
    const Mat& sigma = report.prediction->Sigma;
    if (!report.prediction->psi_positive_definite)
      throw DegenerateHessian("run_clt_experiment: Psi is not strictly positive definite",
                              report.prediction->psi_eigenvalues);

    std::vector<std::pair<std::size_t, std::vector<Replicate>>> all_w;
    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
      const std::size_t n = config.n_grid[ni];
      const std::vector<Replicate> reps = par::map_indexed<Replicate>(
          config.replicates, [&](std::int64_t rep) -> Replicate {
            try {
              const SampleSet s =
                  sample_stream(config.model, n, config.seed, stream_key(ni, rep));
              const FrechetSolveResult r = frechet_mean(FrechetObjective::from_sample(s));
              Replicate out;
              out.w = std::sqrt(static_cast<double>(n)) * log_map(x0, r.mean).components;
              out.ok = true;
              return out;
            } catch (const Error&) {
              return {};
            }
          });

      CltPerN row;
      row.n = n;
      row.replicates = config.replicates;
      std::size_t good = 0;
      Vec mean = Vec::Zero(m);
      for (const auto& r : reps)
        if (r.ok) {
          mean += r.w;
          ++good;
        }
      row.failures = config.replicates - static_cast<int>(good);
      if (static_cast<double>(row.failures) >
          config.max_failure_fraction * config.replicates)
        throw ExperimentInvalid("solver failure fraction exceeds " +
                                std::to_string(config.max_failure_fraction));
      mean /= static_cast<double>(good);

      Mat cov = Mat::Zero(m, m);
      Mat second4 = Mat::Zero(m, m);  // E[(a_j a_k)^2]
      Vec m3 = Vec::Zero(m), m4 = Vec::Zero(m);
      for (const auto& r : reps) {
        if (!r.ok) continue;
        const Vec a = r.w - mean;
        const Mat outer = a * a.transpose();
        cov += outer;
        second4 += outer.cwiseProduct(outer);
        for (int j = 0; j < m; ++j) {
          m3[j] += a[j] * a[j] * a[j];
          m4[j] += a[j] * a[j] * a[j] * a[j];
        }
      }
      const double g = static_cast<double>(good);
      cov /= g;
      second4 /= g;
      m3 /= g;
      m4 /= g;

      row.empirical_mean = mean;
      row.empirical_cov = cov;
      row.cov_se = ((second4 - cov.cwiseProduct(cov)).cwiseMax(0.0) / g).cwiseSqrt();
      row.rel_frobenius_error = (cov - sigma).norm() / sigma.norm();
      row.skewness_z = Vec(m);
      row.kurtosis_z = Vec(m);
      for (int j = 0; j < m; ++j) {
        const double sd = std::sqrt(cov(j, j));
        row.skewness_z[j] = (m3[j] / (sd * sd * sd)) / std::sqrt(6.0 / g);
        row.kurtosis_z[j] = (m4[j] / (sd * sd * sd * sd) - 3.0) / std::sqrt(24.0 / g);
      }
      row.mean_norm = mean.norm();
      row.mean_norm_bound = 4.0 * std::sqrt(sigma.trace() / g);
      row.compared = compare_cov;
      row.within_band = true;
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          if (std::abs(cov(j, k) - sigma(j, k)) > config.se_band * row.cov_se(j, k))
            row.within_band = false;
      if (compare_cov && !row.within_band) all_ok = false;
      report.clt.push_back(row);
      all_w.emplace_back(n, reps);
    }
    report.clt_rel_error_nonincreasing = true;
    for (std::size_t i = 1; i < report.clt.size(); ++i)
      if (report.clt[i].rel_frobenius_error >
          report.clt[i - 1].rel_frobenius_error + 0.05)
        report.clt_rel_error_nonincreasing = false;
    if (!config.export_w_path.empty()) write_w_csv(config.export_w_path, all_w);
  }

  if (wants(config, "residual_decay")) {
    report.decay = residual_decay_suite(config.model, *report.prediction, config.decay_ladder);
    if (!report.decay->linearization_decreasing || !report.decay->transport_decreasing)
      all_ok = false;
  }

  if (wants(config, "vol_probe")) {
    report.vol_probe = vol_A_delta_probe(x0.kind, x0, config.vol_deltas,
                                         config.vol_mc_points, config.seed ^ 0x766f6cULL);
    if (!report.vol_probe->within_bands) all_ok = false;
  }

  if (wants(config, "consistency")) {
    report.consistency = consistency_probe(config.model, config.consistency_n,
                                           config.consistency_replicates,
                                           config.seed ^ 0x636f6e73ULL);
    if (!report.consistency->median_strictly_decreasing) all_ok = false;
  }

  report.checks_passed = all_ok;
  if (!config.out_path.empty()) persist_report(report, config.out_path);
  return report;
}

// ---------------------------------------------------------------------------
// JSON serialization

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["model"] = ordered_json::parse(model.to_json());
  j["n_grid"] = n_grid;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["checks"] = checks;
  j["out"] = out_path;
  j["export_w"] = export_w_path;
  j["tolerances"] = ordered_json{{"se_band", se_band},
                                 {"vol_mc_points", vol_mc_points},
                                 {"vol_deltas", vol_deltas},
                                 {"decay_ladder", decay_ladder},
                                 {"consistency_n", consistency_n},
                                 {"consistency_replicates", consistency_replicates},
                                 {"max_failure_fraction", max_failure_fraction}};
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  c.model = DensityModel::from_json(j.at("model").dump());
  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("checks")) c.checks = j.at("checks").get<std::vector<std::string>>();
  c.out_path = j.value("out", "");
  c.export_w_path = j.value("export_w", "");
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.se_band = t.value("se_band", c.se_band);
    c.vol_mc_points = t.value("vol_mc_points", c.vol_mc_points);
    if (t.contains("vol_deltas")) c.vol_deltas = t.at("vol_deltas").get<std::vector<double>>();
    if (t.contains("decay_ladder"))
      c.decay_ladder = t.at("decay_ladder").get<std::vector<double>>();
    if (t.contains("consistency_n"))
      c.consistency_n = t.at("consistency_n").get<std::vector<std::size_t>>();
    c.consistency_replicates = t.value("consistency_replicates", c.consistency_replicates);
    c.max_failure_fraction = t.value("max_failure_fraction", c.max_failure_fraction);
  }
  return c;
}

namespace {

ordered_json clt_row_to_json(const CltPerN& r) {
  ordered_json j;
  j["n"] = r.n;
  j["replicates"] = r.replicates;
  j["failures"] = r.failures;
  j["empirical_mean"] = vec_to_json(r.empirical_mean);
  j["empirical_cov"] = mat_to_json(r.empirical_cov);
  j["cov_se"] = mat_to_json(r.cov_se);
  j["rel_frobenius_error"] = r.rel_frobenius_error;
  j["skewness_z"] = vec_to_json(r.skewness_z);
  j["kurtosis_z"] = vec_to_json(r.kurtosis_z);
  j["mean_norm"] = r.mean_norm;
  j["mean_norm_bound"] = r.mean_norm_bound;
  j["compared"] = r.compared;
  j["within_band"] = r.within_band;
  return j;
}

CltPerN clt_row_from_json(const ordered_json& j) {
  CltPerN r;
  r.n = j.at("n").get<std::size_t>();
  r.replicates = j.at("replicates").get<int>();
  r.failures = j.at("failures").get<int>();
  r.empirical_mean = vec_from_json(j.at("empirical_mean"));
  r.empirical_cov = mat_from_json(j.at("empirical_cov"));
  r.cov_se = mat_from_json(j.at("cov_se"));
  r.rel_frobenius_error = j.at("rel_frobenius_error").get<double>();
  r.skewness_z = vec_from_json(j.at("skewness_z"));
  r.kurtosis_z = vec_from_json(j.at("kurtosis_z"));
  r.mean_norm = j.at("mean_norm").get<double>();
  r.mean_norm_bound = j.at("mean_norm_bound").get<double>();
  r.compared = j.at("compared").get<bool>();
  r.within_band = j.at("within_band").get<bool>();
  return r;
}

}  // namespace

std::string ExperimentReport::to_json() const {
  ordered_json j;
  j["format_version"] = format_version;
  j["library_version"] = library_version;
  j["config"] = ordered_json::parse(config_echo);
  j["runtime"] = ordered_json{{"threads", threads}, {"kernel_mode", kernel_mode}};
  if (prediction) j["prediction"] = ordered_json::parse(prediction->to_json());
  ordered_json rows = ordered_json::array();
  for (const auto& r : clt) rows.push_back(clt_row_to_json(r));
  j["clt"] = ordered_json{{"per_n", rows},
                          {"rel_error_nonincreasing", clt_rel_error_nonincreasing}};
  if (decay) {
    ordered_json d = ordered_json::array();
    for (const auto& r : decay->rows)
      d.push_back(ordered_json{{"rho", r.rho},
                               {"linearization_ratio", r.linearization_ratio},
                               {"transport_ratio", r.transport_ratio},
                               {"linearization_at_floor", r.linearization_at_floor},
                               {"transport_at_floor", r.transport_at_floor}});
    j["residual_decay"] =
        ordered_json{{"rows", d},
                     {"linearization_decreasing", decay->linearization_decreasing},
                     {"transport_decreasing", decay->transport_decreasing}};
  }
  if (vol_probe) {
    j["vol_probe"] = ordered_json{{"delta", vol_probe->delta},
                                  {"estimate", vol_probe->estimate},
                                  {"standard_error", vol_probe->standard_error},
                                  {"closed_form", vol_probe->closed_form},
                                  {"closed_form_is_bound", vol_probe->closed_form_is_bound},
                                  {"loglog_slope", vol_probe->loglog_slope},
                                  {"within_bands", vol_probe->within_bands}};
  }
  if (consistency) {
    ordered_json rows2 = ordered_json::array();
    for (const auto& r : consistency->rows)
      rows2.push_back(ordered_json{{"n", r.n}, {"median", r.median}, {"q95", r.q95}});
    j["consistency"] =
        ordered_json{{"rows", rows2},
                     {"monotone_fraction", consistency->monotone_fraction},
                     {"median_strictly_decreasing", consistency->median_strictly_decreasing}};
  }
  j["checks_passed"] = checks_passed;
  return j.dump(2);
}

ExperimentReport ExperimentReport::from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (!j.contains("format_version") ||
      j.at("format_version").get<int>() != kReportFormatVersion)
    throw VersionError("unsupported report format version");
  ExperimentReport r;
  r.library_version = j.at("library_version").get<std::string>();
  r.config_echo = j.at("config").dump(2);
  r.threads = j.at("runtime").at("threads").get<int>();
  r.kernel_mode = j.at("runtime").at("kernel_mode").get<std::string>();
  if (j.contains("prediction"))
    r.prediction = CltPrediction::from_json(j.at("prediction").dump());
  if (j.contains("clt")) {
    for (const auto& row : j.at("clt").at("per_n")) r.clt.push_back(clt_row_from_json(row));
    r.clt_rel_error_nonincreasing = j.at("clt").at("rel_error_nonincreasing").get<bool>();
  }
  if (j.contains("residual_decay")) {
    DecayTable t;
    for (const auto& row : j.at("residual_decay").at("rows")) {
      DecayRow dr;
      dr.rho = row.at("rho").get<double>();
      dr.linearization_ratio = row.at("linearization_ratio").get<double>();
      dr.transport_ratio = row.at("transport_ratio").get<double>();
      dr.linearization_at_floor = row.at("linearization_at_floor").get<bool>();
      dr.transport_at_floor = row.at("transport_at_floor").get<bool>();
      t.rows.push_back(dr);
    }
    t.linearization_decreasing = j.at("residual_decay").at("linearization_decreasing").get<bool>();
    t.transport_decreasing = j.at("residual_decay").at("transport_decreasing").get<bool>();
    r.decay = t;
  }
  if (j.contains("vol_probe")) {
    VolProbeResult v;
    const json& p = j.at("vol_probe");
    v.delta = p.at("delta").get<std::vector<double>>();
    v.estimate = p.at("estimate").get<std::vector<double>>();
    v.standard_error = p.at("standard_error").get<std::vector<double>>();
    v.closed_form = p.at("closed_form").get<std::vector<double>>();
    v.closed_form_is_bound = p.at("closed_form_is_bound").get<bool>();
    v.loglog_slope = p.at("loglog_slope").get<double>();
    v.within_bands = p.at("within_bands").get<bool>();
    r.vol_probe = v;
  }
  if (j.contains("consistency")) {
    ConsistencyTable t;
    for (const auto& row : j.at("consistency").at("rows")) {
      ConsistencyRow cr;
      cr.n = row.at("n").get<std::size_t>();
      cr.median = row.at("median").get<double>();
      cr.q95 = row.at("q95").get<double>();
      t.rows.push_back(cr);
    }
    t.monotone_fraction = j.at("consistency").at("monotone_fraction").get<double>();
    t.median_strictly_decreasing =
        j.at("consistency").at("median_strictly_decreasing").get<bool>();
    r.consistency = t;
  }
  r.checks_passed = j.at("checks_passed").get<bool>();
  return r;
}

void persist_report(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << report.to_json() << "\n";
}

ExperimentReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ExperimentReport::from_json(ss.str());
}

}  // namespace manistats
