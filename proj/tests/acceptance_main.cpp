// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code; seeds are fixed.

#include "manistats/checks.hpp"
#include "manistats/experiments.hpp"
#include "manistats/parallel.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace manistats;

namespace {

constexpr std::uint64_t kSeed = 20240817;

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> fn;
};

const DensityModel& shipped(ManifoldFamily family, int d = 0) {
  static const std::vector<DensityModel> models = shipped_models();
  for (const auto& m : models)
    if (m.kind().family == family && (d == 0 || m.kind().d == d)) return m;
  throw Error("no shipped model for that family");
}

bool geometry_invariants(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = run_check_suite(kSeed, /*quick=*/false, "geometry/");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : results) {
    if (!r.passed) {
      detail = r.name + ": " + r.detail;
      return false;
    }
  }
  if (secs >= 60.0) {
    detail = "runtime " + std::to_string(secs) + "s exceeds 1 minute";
    return false;
  }
  detail = std::to_string(results.size()) + " invariant groups, " + std::to_string(secs) + "s";
  return true;
}

bool j_closed_forms(std::string& detail) {
  // circle: exact 2 pi psi(pi)
  {
    const auto& model = shipped(ManifoldFamily::Circle);
    const auto x0 = *model.declared_mean();
    const double psi_pi = model.density(
        make_point(model.kind(), Vec::Constant(1, x0.coords[0] + kPi)));
    const Mat j = j_mu_quadrature(model, x0);
    if (std::abs(j(0, 0) - kTwoPi * psi_pi) > 1e-14 * kTwoPi * psi_pi) {
      detail = "circle J != 2 pi psi(pi)";
      return false;
    }
  }
  // torus: diagonal matches independent high-resolution marginal quadrature
  {
    const auto& model = shipped(ManifoldFamily::Torus);
    const auto x0 = *model.declared_mean();
    const Mat j = j_mu_quadrature(model, x0);
    auto marginal = [&](int cut_coord) {
      return oracle::simpson(
          [&](double t) {
            Vec c = x0.coords;
            c[cut_coord] = wrap_angle(x0.coords[cut_coord] + kPi);
            c[1 - cut_coord] = wrap_angle(x0.coords[1 - cut_coord] + t);
            return model.density(make_point(model.kind(), std::move(c)));
          },
          -kPi, kPi, 200000);
    };
    if (std::abs(j(0, 0) - kTwoPi * marginal(0)) > 1e-8 ||
        std::abs(j(1, 1) - kTwoPi * marginal(1)) > 1e-8) {
      detail = "torus J diagonal deviates from 2 pi * marginal";
      return false;
    }
  }
  // rp2 uniform: (pi/4) I
  {
    const auto uni = DensityModel::rp2_projected_vmf(Vec{{0.0, 0.0, 1.0}}, 0.0, 1.0);
    const auto x0 = make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}});
    const Mat j = j_mu_quadrature(uni, x0);
    const Mat target = (kPi / 4.0) * Mat::Identity(2, 2);
    if ((j - target).cwiseAbs().maxCoeff() > 1e-8) {
      detail = "rp2 uniform J != (pi/4) I";
      return false;
    }
  }
  // spheres: exactly zero
  for (int d : {2, 3}) {
    const auto& model = shipped(ManifoldFamily::Sphere, d);
    if (j_mu_quadrature(model, *model.declared_mean()).cwiseAbs().maxCoeff() != 0.0) {
      detail = "sphere" + std::to_string(d) + " J not exactly zero";
      return false;
    }
  }
  return true;
}

bool psi_oracle_identity(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& model : shipped_models()) {
    const int nodes = model.kind().dim() >= 3 ? 64 : 128;
    PredictionOptions opts;
    opts.hessian_nodes = nodes;
    opts.v0_nodes = nodes;
    const CltPrediction pred = psi_mu(model, opts);
    const Mat fd = fd_frechet_hessian(model, pred.base, 1e-3, nodes);
    const double rel = (2.0 * pred.Psi - fd).norm() / fd.norm();
    if (rel > 1e-3) {
      detail = model.kind().name() + ": relative Frobenius error " + std::to_string(rel);
      return false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 300.0) {
    detail = "runtime " + std::to_string(secs) + "s exceeds 5 minutes";
    return false;
  }
  detail = "5 models, " + std::to_string(secs) + "s";
  return true;
}

bool residual_decay(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> ladder = {1e-1, 1e-2, 1e-3, 1e-4};
  for (const auto* model :
       {&shipped(ManifoldFamily::Circle), &shipped(ManifoldFamily::Torus),
        &shipped(ManifoldFamily::Sphere, 2), &shipped(ManifoldFamily::ProjectivePlane)}) {
    const CltPrediction pred = psi_mu(*model);
    const DecayTable table = residual_decay_suite(*model, pred, ladder);
    const DecayRow& first = table.rows.front();
    const DecayRow& last = table.rows.back();
    const bool lin_ok = last.linearization_at_floor ||
                        last.linearization_ratio <= first.linearization_ratio / 20.0;
    const bool trans_ok =
        last.transport_at_floor || last.transport_ratio <= first.transport_ratio / 20.0;
    if (!lin_ok) {
      detail = model->kind().name() + ": linearization ratio fell only from " +
               std::to_string(first.linearization_ratio) + " to " +
               std::to_string(last.linearization_ratio);
      return false;
    }
    if (!trans_ok) {
      detail = model->kind().name() + ": transport ratio fell only from " +
               std::to_string(first.transport_ratio) + " to " +
               std::to_string(last.transport_ratio);
      return false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 120.0) {
    detail = "runtime " + std::to_string(secs) + "s exceeds 2 minutes";
    return false;
  }
  detail = "4 models, " + std::to_string(secs) + "s";
  return true;
}

bool clt_monte_carlo(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const DensityModel* model;
    int replicates;
  };
  const std::vector<Case> cases = {{&shipped(ManifoldFamily::Circle), 5000},
                                   {&shipped(ManifoldFamily::Sphere, 2), 2000},
                                   {&shipped(ManifoldFamily::Torus), 2000},
                                   {&shipped(ManifoldFamily::ProjectivePlane), 2000}};
  for (const auto& c : cases) {
    ExperimentConfig cfg;
    cfg.model = *c.model;
    cfg.n_grid = {2000};
    cfg.replicates = c.replicates;
    cfg.seed = kSeed;
    cfg.checks = {"clt"};
    const ExperimentReport rep = run_clt_experiment(cfg);
    const CltPerN& row = rep.clt.front();
    if (!row.within_band) {
      std::string worst;
      const Mat& sig = rep.prediction->Sigma;
      for (int i = 0; i < row.empirical_cov.rows(); ++i)
        for (int k = 0; k < row.empirical_cov.cols(); ++k)
          worst += " [" + std::to_string(i) + "," + std::to_string(k) + "] emp " +
                   std::to_string(row.empirical_cov(i, k)) + " pred " +
                   std::to_string(sig(i, k)) + " se " + std::to_string(row.cov_se(i, k)) + ";";
      detail = c.model->kind().name() + ": covariance outside 3 replicate SE bands:" + worst;
      return false;
    }
    if (row.failures > 0.01 * c.replicates) {
      detail = c.model->kind().name() + ": too many solver failures";
      return false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 1800.0) {
    detail = "runtime " + std::to_string(secs) + "s exceeds 30 minutes";
    return false;
  }
  detail = "4 models at n=2000, " + std::to_string(secs) + "s";
  return true;
}

bool vol_probes(std::string& detail) {
  const std::vector<double> deltas = {0.05, 0.1, 0.2};
  const std::size_t n = 1000000;
  struct Case {
    ManifoldKind kind;
    ManifoldPoint x0;
  };
  const std::vector<Case> cases = {
      {ManifoldKind::circle(), make_point(ManifoldKind::circle(), Vec::Zero(1))},
      {ManifoldKind::torus(2), make_point(ManifoldKind::torus(2), Vec::Zero(2))},
      {ManifoldKind::projective_plane(),
       make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}})}};
  for (const auto& c : cases) {
    const VolProbeResult r = vol_A_delta_probe(c.kind, c.x0, deltas, n, kSeed);
    if (!r.within_bands) {
      detail = c.kind.name() + ": estimate outside 3 MC standard errors";
      return false;
    }
    if (r.loglog_slope < 0.9 || r.loglog_slope > 1.1) {
      detail = c.kind.name() + ": slope " + std::to_string(r.loglog_slope);
      return false;
    }
  }
  return true;
}

bool consistency(std::string& detail) {
  for (const auto& model : shipped_models()) {
    const int replicates = model.kind().dim() >= 3 ? 60 : 100;
    const ConsistencyTable table =
        consistency_probe(model, {100, 1000, 10000}, replicates, kSeed);
    if (!table.median_strictly_decreasing) {
      detail = model.kind().name() + ": medians";
      for (const auto& row : table.rows) detail += " " + std::to_string(row.median);
      return false;
    }
  }
  return true;
}

bool reproducibility(std::string& detail) {
  ExperimentConfig cfg;
  cfg.model = shipped(ManifoldFamily::Circle);
  cfg.n_grid = {200, 500};
  cfg.replicates = 300;
  cfg.seed = kSeed;
  cfg.checks = {"clt", "vol_probe", "consistency"};
  cfg.vol_mc_points = 100000;
  cfg.consistency_n = {100, 1000};
  cfg.consistency_replicates = 40;
  const std::string a = run_clt_experiment(cfg).to_json();
  const std::string b = run_clt_experiment(cfg).to_json();
  if (a != b) {
    detail = "reports differ between identical runs";
    return false;
  }
  detail = std::to_string(a.size()) + " bytes, byte-identical";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"geometry invariants (round trip, transport, two-branch)", geometry_invariants},
      {"J_mu closed forms (circle, torus, rp2 uniform, spheres zero)", j_closed_forms},
      {"Psi oracle identity (2 Psi = FD Hessian of F)", psi_oracle_identity},
      {"residual decay (linearization and transport expansion)", residual_decay},
      {"CLT Monte Carlo covariance at n=2000", clt_monte_carlo},
      {"vol(A_delta) probes and slopes", vol_probes},
      {"consistency: median distance strictly decreasing in n", consistency},
      {"bit-identical report reproduction", reproducibility},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%zu/%zu] %s  %s (%.1fs)%s%s\n", i + 1, criteria.size(),
                ok ? "PASS" : "FAIL", criteria[i].name.c_str(), secs,
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d/%zu acceptance criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
