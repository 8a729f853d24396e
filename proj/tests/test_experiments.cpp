#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manistats/experiments.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace manistats;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.model = DensityModel::circle({0.0, 1.5, 0.25});
  cfg.n_grid = {200};
  cfg.replicates = 150;
  cfg.seed = 91;
  cfg.checks = {"clt"};
  cfg.se_band = 6.0;  // generous at this scale; bands are exercised in acceptance
  return cfg;
}

}  // namespace

TEST_CASE("experiment config validation") {
  ExperimentConfig bad = small_config();
  bad.n_grid = {5};
  CHECK_THROWS_AS(run_clt_experiment(bad), Error);
}

TEST_CASE("small CLT run: mean of replicates near zero, report well-formed") {
  const ExperimentConfig cfg = small_config();
  const ExperimentReport rep = run_clt_experiment(cfg);
  REQUIRE(rep.clt.size() == 1);
  const CltPerN& row = rep.clt[0];
  CHECK(row.failures == 0);
  CHECK(row.compared);
  // CLT of the replicate mean
  CHECK(row.mean_norm <= row.mean_norm_bound);
  // empirical covariance symmetric PSD
  CHECK((row.empirical_cov - row.empirical_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  Eigen::SelfAdjointEigenSolver<Mat> eig(row.empirical_cov);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("10-replicate run still produces a schema-valid report (no band assertion)") {
  ExperimentConfig cfg = small_config();
  cfg.replicates = 10;
  const ExperimentReport rep = run_clt_experiment(cfg);
  REQUIRE(rep.clt.size() == 1);
  CHECK_FALSE(rep.clt[0].compared);
  const ExperimentReport loaded = ExperimentReport::from_json(rep.to_json());
  CHECK(loaded.to_json() == rep.to_json());
}

TEST_CASE("reports persist losslessly and re-running is byte-identical") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "manistats_report.json").string();

  ExperimentConfig cfg = small_config();
  cfg.out_path = path;
  const ExperimentReport a = run_clt_experiment(cfg);
  const ExperimentReport loaded = load_report(path);
  CHECK(loaded.to_json() == a.to_json());

  // byte-identical reproduction from the same config
  std::string s1;
  {
    std::ifstream f1(path);
    s1.assign((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  }
  run_clt_experiment(cfg);  // overwrites the same out path
  std::ifstream f2(path);
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK_FALSE(s1.empty());
  std::filesystem::remove(path);
}

TEST_CASE("unknown report version is rejected") {
  const ExperimentReport rep = run_clt_experiment(small_config());
  std::string text = rep.to_json();
  const std::string needle = "\"format_version\": 1";
  text.replace(text.find(needle), needle.size(), "\"format_version\": 99");
  CHECK_THROWS_AS(ExperimentReport::from_json(text), VersionError);
}

TEST_CASE("empty report (no checks selected) is valid and round-trips") {
  ExperimentConfig cfg = small_config();
  cfg.checks = {};
  const ExperimentReport rep = run_clt_experiment(cfg);
  CHECK(rep.clt.empty());
  CHECK_FALSE(rep.decay.has_value());
  CHECK_FALSE(rep.vol_probe.has_value());
  CHECK(rep.checks_passed);
  const ExperimentReport loaded = ExperimentReport::from_json(rep.to_json());
  CHECK(loaded.to_json() == rep.to_json());
}

TEST_CASE("per-replicate w export") {
  const auto path = (std::filesystem::temp_directory_path() / "manistats_w.csv").string();
  ExperimentConfig cfg = small_config();
  cfg.replicates = 100;
  cfg.export_w_path = path;
  run_clt_experiment(cfg);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 100);
  std::filesystem::remove(path);
}

TEST_CASE("vol_A_delta_probe: closed forms within 3 MC standard errors") {
  const std::vector<double> deltas = {0.05, 0.1, 0.2};
  const std::size_t n = 200000;

  const auto c0 = make_point(ManifoldKind::circle(), Vec::Zero(1));
  const auto rc = vol_A_delta_probe(ManifoldKind::circle(), c0, deltas, n, 5);
  for (std::size_t i = 0; i < deltas.size(); ++i)
    CHECK(std::abs(rc.estimate[i] - 2.0 * deltas[i]) <= 3.0 * rc.standard_error[i]);
  CHECK(rc.loglog_slope == doctest::Approx(1.0).epsilon(0.1));

  const auto t0 = make_point(ManifoldKind::torus(2), Vec::Zero(2));
  const auto rt = vol_A_delta_probe(ManifoldKind::torus(2), t0, deltas, n, 6);
  for (std::size_t i = 0; i < deltas.size(); ++i)
    CHECK(rt.estimate[i] <= 8.0 * kPi * deltas[i] + 3.0 * rt.standard_error[i]);
  CHECK(rt.loglog_slope == doctest::Approx(1.0).epsilon(0.1));

  const auto p0 = make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}});
  const auto rp = vol_A_delta_probe(ManifoldKind::projective_plane(), p0, deltas, n, 7);
  for (std::size_t i = 0; i < deltas.size(); ++i)
    CHECK(std::abs(rp.estimate[i] - kTwoPi * std::sin(deltas[i])) <=
          3.0 * rp.standard_error[i]);
  CHECK(rp.loglog_slope == doctest::Approx(1.0).epsilon(0.1));

  CHECK_THROWS_AS(vol_A_delta_probe(ManifoldKind::circle(), c0, {1.0}, 100, 8), Error);
}

TEST_CASE("residual decay suite: ratios decrease or sit at the exactness floor") {
  const auto model = DensityModel::circle({0.0, 1.5, 0.25});
  const auto pred = psi_mu(model);
  const auto table = residual_decay_suite(model, pred, {1e-1, 1e-2, 1e-3, 1e-4});
  REQUIRE(table.rows.size() == 4);
  CHECK(table.linearization_decreasing);
  CHECK(table.transport_decreasing);
  // the flat-circle transport expansion is exact
  for (const auto& row : table.rows) CHECK(row.transport_at_floor);
}

TEST_CASE("residual decay: concentrated no-cut-mass model is exact at all rho") {
  // concentrated von Mises without uniform component: psi(pi) ~ e^{-50},
  // the linearization is exact up to quadrature error
  const auto model = DensityModel::circle({0.0, 50.0, 0.0});
  const auto pred = psi_mu(model);
  const auto x0 = pred.base;
  for (double rho : {1e-1, 1e-2, 1e-3}) {
    const auto x = exp_map(x0, {x0, Vec::Constant(1, rho)});
    CHECK(linearization_residual(model, x0, x, pred) <= 1e-9);
  }
}
