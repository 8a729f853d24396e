#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manistats/experiments.hpp"
#include "manistats/parallel.hpp"
#include "manistats/quadrature.hpp"
#include "oracles.hpp"

using namespace manistats;

namespace {

struct ModeGuard {
  par::Mode saved = par::mode();
  ~ModeGuard() { par::mode() = saved; }
};

}  // namespace

TEST_CASE("map_indexed slots are bit-identical to the serial reference") {
  ModeGuard guard;
  auto body = [](std::int64_t i) {
    RngStream rng(17, static_cast<std::uint64_t>(i));
    double acc = 0.0;
    for (int k = 0; k < 100; ++k) acc += std::sin(rng.uniform01() * k);
    return acc;
  };
  par::mode() = par::Mode::OpenMP;
  const auto parallel = par::map_indexed<double>(5000, body);
  const auto serial = par::map_indexed_serial<double>(5000, body);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < parallel.size(); ++i) REQUIRE(parallel[i] == serial[i]);
}

TEST_CASE("pairwise_sum is deterministic and close to the running sum") {
  RngStream rng(18);
  std::vector<double> v(100001);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0) * 1e6;
  const double a = par::pairwise_sum(v);
  const double b = par::pairwise_sum(v);
  CHECK(a == b);
  CHECK(std::abs(a - par::running_sum(v)) <= 1e-6 * std::abs(a) + 1e-6);
}

TEST_CASE("quadrature kernel agrees with the serial reference") {
  const auto model = DensityModel::sphere_vmf(2, Vec{{0.0, 0.0, 1.0}}, 2.0, 0.3);
  const auto rule = manifold_rule(*model.declared_mean(), 64);
  auto f = [&](const ManifoldPoint& p) { return model.density(p); };
  const double par_val = integrate(rule, f);
  const double ser_val = integrate_serial(rule, f);
  CHECK(par_val == doctest::Approx(ser_val).epsilon(1e-13));
}

TEST_CASE("thread count does not change results (bitwise)") {
  ModeGuard guard;
  ExperimentConfig cfg;
  cfg.model = DensityModel::circle({0.0, 1.5, 0.25});
  cfg.n_grid = {100};
  cfg.replicates = 120;
  cfg.seed = 5;
  cfg.checks = {"clt"};

  par::mode() = par::Mode::Serial;
  const std::string serial = run_clt_experiment(cfg).to_json();
  par::mode() = par::Mode::OpenMP;
  const std::string parallel = run_clt_experiment(cfg).to_json();

  // the runtime block records the mode; everything downstream must agree
  const auto tail = [](const std::string& s) { return s.substr(s.find("\"prediction\"")); };
  CHECK(tail(serial) == tail(parallel));
}

TEST_CASE("j_mu and hessian quadratures are mode-independent bitwise") {
  ModeGuard guard;
  const auto model = DensityModel::torus_product({{0.0, 1.5, 0.25}, {0.5, 2.0, 0.2}});
  const auto x0 = *model.declared_mean();

  par::mode() = par::Mode::Serial;
  const Mat j_serial = j_mu_quadrature(model, x0);
  const Mat h_serial = hessian_integral(model, x0, 64);
  par::mode() = par::Mode::OpenMP;
  const Mat j_par = j_mu_quadrature(model, x0);
  const Mat h_par = hessian_integral(model, x0, 64);

  CHECK((j_serial - j_par).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h_serial - h_par).cwiseAbs().maxCoeff() == 0.0);
}
