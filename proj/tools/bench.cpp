// Benchmark comparing the OpenMP kernels against their serial references on
// the heavy inner loops: replicate batches of Frechet solves, manifold
// quadrature, J quadrature and the volume probe.

#include "manistats/experiments.hpp"
#include "manistats/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

using namespace manistats;

namespace {

double time_of(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-34s serial %8.3fs  openmp %8.3fs  speedup %5.2fx  %s\n", name, serial,
              parallel, serial / parallel, identical ? "results identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", par::max_threads());

  // replicate batch of Frechet solves
  {
    const DensityModel model = DensityModel::sphere_vmf(2, Vec{{0.0, 0.0, 1.0}}, 2.0, 0.3);
    ExperimentConfig cfg;
    cfg.model = model;
    cfg.n_grid = {500};
    cfg.replicates = 400;
    cfg.seed = 1;
    cfg.checks = {"clt"};
    std::string out_serial, out_parallel;
    const double ts = time_of([&] {
      par::mode() = par::Mode::Serial;
      out_serial = run_clt_experiment(cfg).to_json();
    });
    const double tp = time_of([&] {
      par::mode() = par::Mode::OpenMP;
      out_parallel = run_clt_experiment(cfg).to_json();
    });
    const auto tail = [](const std::string& s) { return s.substr(s.find("\"prediction\"")); };
    report("clt replicate batch (S^2)", ts, tp, tail(out_serial) == tail(out_parallel));
  }

  // manifold quadrature (population Hessian integral on S^2)
  {
    const DensityModel model = DensityModel::sphere_vmf(2, Vec{{0.0, 0.0, 1.0}}, 2.0, 0.3);
    const ManifoldPoint x0 = *model.declared_mean();
    Mat h_serial, h_parallel;
    const double ts = time_of([&] {
      par::mode() = par::Mode::Serial;
      h_serial = hessian_integral(model, x0, 256);
    });
    const double tp = time_of([&] {
      par::mode() = par::Mode::OpenMP;
      h_parallel = hessian_integral(model, x0, 256);
    });
    report("hessian integral 256^2 (S^2)", ts, tp,
           (h_serial - h_parallel).cwiseAbs().maxCoeff() == 0.0);
  }

  // J quadrature on the torus
  {
    const DensityModel model = DensityModel::torus_product({{0.0, 1.5, 0.25}, {0.5, 2.0, 0.2}});
    const ManifoldPoint x0 = *model.declared_mean();
    Mat j_serial, j_parallel;
    const double ts = time_of([&] {
      par::mode() = par::Mode::Serial;
      j_serial = j_mu_quadrature(model, x0, 131072);
    });
    const double tp = time_of([&] {
      par::mode() = par::Mode::OpenMP;
      j_parallel = j_mu_quadrature(model, x0, 131072);
    });
    report("J quadrature 131072 nodes (T^2)", ts, tp,
           (j_serial - j_parallel).cwiseAbs().maxCoeff() == 0.0);
  }

  // volume probe Monte Carlo
  {
    const ManifoldPoint x0 = make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}});
    VolProbeResult a, b;
    const double ts = time_of([&] {
      par::mode() = par::Mode::Serial;
      a = vol_A_delta_probe(ManifoldKind::projective_plane(), x0, {0.05, 0.1, 0.2}, 2000000, 3);
    });
    const double tp = time_of([&] {
      par::mode() = par::Mode::OpenMP;
      b = vol_A_delta_probe(ManifoldKind::projective_plane(), x0, {0.05, 0.1, 0.2}, 2000000, 3);
    });
    report("vol probe 2e6 points (RP^2)", ts, tp, a.estimate == b.estimate);
  }

  par::mode() = par::Mode::OpenMP;
  return 0;
}
