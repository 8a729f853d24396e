#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manistats/asymptotics.hpp"
#include "manistats/checks.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace manistats;

namespace {

ManifoldPoint circle_pt(double a) {
  return make_point(ManifoldKind::circle(), Vec::Constant(1, a));
}

const DensityModel& shipped(ManifoldFamily family, int d = 0) {
  static const std::vector<DensityModel> models = shipped_models();
  for (const auto& m : models)
    if (m.kind().family == family && (d == 0 || m.kind().d == d)) return m;
  throw Error("no shipped model for that family");
}

}  // namespace

TEST_CASE("hessian_tensor_point: flat identity, removable singularity, pi/2 eigenvalues") {
  RngStream rng(51);
  const auto t2 = ManifoldKind::torus(2);
  const auto x = oracle::random_point(t2, rng);
  const auto y = oracle::random_point(t2, rng);
  if ((hessian_tensor_point(x, y) - Mat::Identity(2, 2)).norm() > 0)
    FAIL("flat Hessian tensor must be the identity");

  const auto s2 = ManifoldKind::sphere(2);
  const auto p = oracle::random_point(s2, rng);
  CHECK((hessian_tensor_point(p, p) - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));

  // rho = pi/2: eigenvalue 1 along the geodesic direction, 0 orthogonal
  const Vec u = oracle::random_unit(2, rng);
  const auto q = exp_map(p, {p, (kPi / 2.0) * u});
  const Mat h = hessian_tensor_point(p, q);
  const Vec dir = log_map(p, q).components / (kPi / 2.0);
  CHECK((h * dir - dir).norm() <= 1e-12);
  Vec perp(2);
  perp << -dir[1], dir[0];
  CHECK((h * perp).norm() <= 1e-12);
}

TEST_CASE("hessian_tensor_numeric: oracle agreement, flat case, error paths") {
  const auto t2 = ManifoldKind::torus(2);
  RngStream rng(52);
  const auto x = oracle::random_point(t2, rng);
  const auto y = oracle::random_point(t2, rng);
  CHECK((hessian_tensor_numeric(x, y, 1e-4) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-8);
  CHECK_THROWS_AS(hessian_tensor_numeric(x, y, 0.0), InvalidStep);

  for (const auto& kind :
       {ManifoldKind::sphere(2), ManifoldKind::sphere(3), ManifoldKind::projective_plane()}) {
    RngStream r2(53, static_cast<std::uint64_t>(kind.family), static_cast<std::uint64_t>(kind.d));
    for (int t = 0; t < 50; ++t) {
      const auto a = oracle::random_point(kind, r2);
      const Vec u = oracle::random_unit(kind.dim(), r2);
      const double tc = cut_time(a, {a, u});
      const auto b = exp_map(a, {a, r2.uniform(0.1, tc - 0.1) * u});
      REQUIRE((hessian_tensor_point(a, b) - hessian_tensor_numeric(a, b, 1e-4))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-5);
    }
  }

  const auto s2 = ManifoldKind::sphere(2);
  const auto e1 = make_point(s2, Vec{{1.0, 0.0, 0.0}});
  const auto anti = make_point(s2, Vec{{-1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(hessian_tensor_point(e1, anti), CutLocusError);
}

TEST_CASE("j_mu_quadrature: circle equals 2 pi psi(pi) exactly") {
  const auto& model = shipped(ManifoldFamily::Circle);
  const auto x0 = *model.declared_mean();
  const double psi_pi = model.density(circle_pt(x0.coords[0] + kPi));
  const Mat j = j_mu_quadrature(model, x0);
  REQUIRE(j.rows() == 1);
  CHECK(j(0, 0) == doctest::Approx(kTwoPi * psi_pi).epsilon(1e-15));
}

TEST_CASE("j_mu_quadrature: torus diagonal matches independent marginal quadrature") {
  const auto& model = shipped(ManifoldFamily::Torus);
  const auto x0 = *model.declared_mean();
  const Mat j = j_mu_quadrature(model, x0);

  // independent high-resolution quadrature of the chart marginals
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
  CHECK(j(0, 0) == doctest::Approx(kTwoPi * marginal(0)).epsilon(1e-8));
  CHECK(j(1, 1) == doctest::Approx(kTwoPi * marginal(1)).epsilon(1e-8));
  CHECK(std::abs(j(0, 1)) <= 1e-12);
  CHECK(std::abs(j(1, 0)) <= 1e-12);
}

TEST_CASE("j_mu_quadrature: rp2 uniform gives (pi/4) I") {
  const auto uni = DensityModel::rp2_projected_vmf(Vec{{0.0, 0.0, 1.0}}, 0.0, 1.0);
  const auto x0 = make_point(ManifoldKind::projective_plane(), Vec{{0.0, 0.0, 1.0}});
  const Mat j = j_mu_quadrature(uni, x0);
  // independent high-resolution quadrature of pi * (1/(2 pi)) * cos^2
  const double diag = oracle::simpson(
      [](double th) { return kPi * (1.0 / kTwoPi) * std::cos(th) * std::cos(th); }, 0.0, kPi,
      1000000);
  CHECK(diag == doctest::Approx(kPi / 4.0).epsilon(1e-12));
  CHECK(j(0, 0) == doctest::Approx(diag).epsilon(1e-8));
  CHECK(j(1, 1) == doctest::Approx(diag).epsilon(1e-8));
  CHECK(std::abs(j(0, 1)) <= 1e-8);
}

TEST_CASE("j_mu_quadrature: spheres give exactly zero; empty structure is not an error") {
  for (int d : {2, 3}) {
    const auto& model = shipped(ManifoldFamily::Sphere, d);
    const Mat j = j_mu_quadrature(model, *model.declared_mean());
    CHECK(j.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("j_mu_quadrature: invariant under flipping every chart normal") {
  for (const auto& model : shipped_models()) {
    if (model.kind().family == ManifoldFamily::Sphere) continue;
    const auto x0 = *model.declared_mean();
    CutStructure cut = cut_structure(x0);
    const Mat j1 = j_mu_quadrature(model, cut, 256);
    for (auto& chart : cut.charts) {
      auto old_n = chart.normal_at_base;
      chart.normal_at_base = [old_n](const Vec& t) { return Vec(-old_n(t)); };
    }
    const Mat j2 = j_mu_quadrature(model, cut, 256);
    CHECK((j1 - j2).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("quadrature convergence: doubling nodes moves J and H_bar below 1e-8") {
  for (const auto& model : shipped_models()) {
    const auto x0 = *model.declared_mean();
    CHECK((j_mu_quadrature(model, x0, 256) - j_mu_quadrature(model, x0, 512))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
    const int nodes = model.kind().dim() >= 3 ? 64 : 128;
    CHECK((hessian_integral(model, x0, nodes) - hessian_integral(model, x0, 2 * nodes))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
  }
}

TEST_CASE("psi_mu: circle closed form 1 - 2 pi psi(pi) and scalar Sigma algebra") {
  const auto& model = shipped(ManifoldFamily::Circle);
  const auto pred = psi_mu(model);
  const double psi_pi = model.density(circle_pt(pred.base.coords[0] + kPi));
  CHECK(pred.Psi(0, 0) == doctest::Approx(1.0 - kTwoPi * psi_pi).epsilon(1e-9));
  CHECK(pred.psi_positive_definite);
  CHECK(pred.Sigma(0, 0) ==
        doctest::Approx(pred.V0(0, 0) / std::pow(1.0 - kTwoPi * psi_pi, 2)).epsilon(1e-9));
}

TEST_CASE("psi_mu: flat manifolds have H_bar = I; spheres have Psi = H_bar") {
  const auto& torus = shipped(ManifoldFamily::Torus);
  const auto predt = psi_mu(torus);
  CHECK((predt.H_bar - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);

  const auto& s3 = shipped(ManifoldFamily::Sphere, 3);
  PredictionOptions opts;
  opts.hessian_nodes = 64;
  opts.v0_nodes = 64;
  const auto preds = psi_mu(s3, opts);
  CHECK(preds.J.cwiseAbs().maxCoeff() == 0.0);
  CHECK((preds.Psi - preds.H_bar).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oracle identity: 2 Psi equals the FD Hessian of F_mu (shipped models, m <= 2)") {
  for (const auto& model : shipped_models()) {
    if (model.kind().dim() >= 3) continue;  // acceptance covers S^3
    const auto pred = psi_mu(model);
    const Mat fd = fd_frechet_hessian(model, pred.base);
    CHECK((2.0 * pred.Psi - fd).norm() / fd.norm() <= 1e-3);
  }
}

TEST_CASE("v0: zero for point mass, pi^2/3 for circle uniform, diagonal for symmetric") {
  SampleSet degen;
  degen.kind = ManifoldKind::circle();
  for (int i = 0; i < 10; ++i) degen.points.push_back(circle_pt(0.4));
  CHECK(v0_sample(degen, circle_pt(0.4)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  const auto uni = DensityModel::circle({0.0, 0.0, 1.0});
  const Mat v = v0_population(uni, circle_pt(0.0));
  CHECK(v(0, 0) == doctest::Approx(kPi * kPi / 3.0).epsilon(1e-9));

  for (const auto& model : shipped_models()) {
    if (model.kind().dim() < 2 || model.kind().dim() > 2) continue;
    const Mat v0 = v0_population(model, *model.declared_mean());
    CHECK(std::abs(v0(0, 1)) <= 1e-8);
  }
}

TEST_CASE("clt_covariance: identity Psi passes V0 through; degenerate Psi throws") {
  CltPrediction pred{circle_pt(0.0)};
  pred.Psi = Mat::Identity(2, 2);
  pred.V0 = (Mat(2, 2) << 2.0, 0.3, 0.3, 1.0).finished();
  pred.psi_eigenvalues = Vec::Constant(2, 1.0);
  pred.psi_positive_definite = true;
  CHECK((clt_covariance(pred) - pred.V0).cwiseAbs().maxCoeff() <= 1e-14);

  CltPrediction bad{circle_pt(0.0)};
  bad.Psi = Mat::Constant(1, 1, 1e-14);
  bad.V0 = Mat::Identity(1, 1);
  bad.psi_eigenvalues = Vec::Constant(1, 1e-14);
  bad.psi_positive_definite = false;
  CHECK_THROWS_AS(clt_covariance(bad), DegenerateHessian);
}

TEST_CASE("Sigma is equivariant under an orthogonal change of frame") {
  const auto pred = psi_mu(shipped(ManifoldFamily::ProjectivePlane));
  RngStream rng(54);
  Mat g(2, 2);
  for (int i = 0; i < 4; ++i) g(i / 2, i % 2) = rng.normal();
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  CltPrediction rot = pred;
  rot.Psi = q * pred.Psi * q.transpose();
  rot.V0 = q * pred.V0 * q.transpose();
  CHECK((clt_covariance(rot) - q * pred.Sigma * q.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("linearization_residual: zero at the mean, o(rho) decay") {
  for (const auto& model : shipped_models()) {
    if (model.kind().dim() >= 3) continue;
    const auto pred = psi_mu(model);
    const auto x0 = pred.base;
    CHECK(linearization_residual(model, x0, x0, pred) <= 1e-10);

    const Vec u = Vec::Unit(model.kind().dim(), 0);
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (double rho : {1e-1, 1e-2, 1e-3}) {
      const auto x = exp_map(x0, {x0, rho * u});
      const double ratio = linearization_residual(model, x0, x, pred) / rho;
      CHECK(ratio <= prev_ratio + 1e-9);
      prev_ratio = ratio;
    }
  }
}

TEST_CASE("transport expansion: circle crossing reproduces the 2 pi jump") {
  const auto z = circle_pt(0.0);
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const auto xa = circle_pt(kPi - delta);
    const auto xb = circle_pt(-(kPi - delta));
    // with the jump included the remainder vanishes on the flat circle
    CHECK(transport_expansion_check(z, xa, xb) <= 1e-12);
    // and without it the defect is exactly the jump magnitude 2 pi
    const Vec lhs = parallel_transport(xb, xa, log_map(xb, z)).components;
    const Vec l0 = log_map(xa, z).components;
    const Vec l01 = log_map(xa, xb).components;
    const Vec no_jump = l0 - hessian_tensor_point(xa, z) * l01;
    CHECK((lhs - no_jump).norm() == doctest::Approx(kTwoPi).epsilon(1e-12));
  }
}

TEST_CASE("transport expansion: torus chart crossed orthogonally jumps 2 pi in that coordinate") {
  const auto t2 = ManifoldKind::torus(2);
  const auto z = make_point(t2, Vec::Zero(2));
  // geodesic through p = (0.4, pi) moving in the second coordinate
  Vec pc(2);
  pc << 0.4, kPi;
  const auto p = make_point(t2, pc);
  Vec u(2);
  u << 0.0, 1.0;
  const double rho = 0.02;
  const auto xa = exp_map(p, {p, -0.5 * rho * u});
  const auto xb = exp_map(p, {p, 0.5 * rho * u});
  CHECK(transport_expansion_check(z, xa, xb) <= 1e-12);

  const Vec lhs = parallel_transport(xb, xa, log_map(xb, z)).components;
  const Vec no_jump =
      log_map(xa, z).components - hessian_tensor_point(xa, z) * log_map(xa, xb).components;
  const Vec jump = lhs - no_jump;
  CHECK(std::abs(jump[0]) <= 1e-12);
  CHECK(std::abs(jump[1]) == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("transport expansion: rp2 crossing has jump magnitude pi and o(rho) remainder") {
  const auto rp2 = ManifoldKind::projective_plane();
  const auto p = make_point(rp2, Vec{{0.0, 0.0, 1.0}});
  RngStream rng(55);
  const Vec u = oracle::random_unit(2, rng);
  const auto z = exp_map(p, {p, (kPi / 2.0) * u});

  double prev = std::numeric_limits<double>::infinity();
  for (double rho : {1e-1, 1e-2, 1e-3}) {
    const auto xa = exp_map(p, {p, -0.5 * rho * u});
    const auto xb = exp_map(p, {p, 0.5 * rho * u});
    const double rem = transport_expansion_check(z, xa, xb);
    CHECK(rem / rho <= prev / std::max(rho * 10, 1e-9) + 1e-9);
    CHECK(rem <= 2.0 * rho * rho + 1e-10);  // empirically O(rho^2)
    prev = rem;

    const Vec lhs = parallel_transport(xb, xa, log_map(xb, z)).components;
    const Vec no_jump =
        log_map(xa, z).components - hessian_tensor_point(xa, z) * log_map(xa, xb).components;
    CHECK((lhs - no_jump).norm() == doctest::Approx(kPi).epsilon(1e-2));
  }
}

TEST_CASE("transport expansion: no crossing or sphere target is rejected") {
  const auto z = circle_pt(0.0);
  CHECK_THROWS_AS(transport_expansion_check(z, circle_pt(0.3), circle_pt(0.5)),
                  InvalidConfiguration);

  const auto s2 = ManifoldKind::sphere(2);
  const auto a = make_point(s2, Vec{{1.0, 0.0, 0.0}});
  const auto b = make_point(s2, Vec{{0.99, 0.1, 0.0}});
  const auto zz = make_point(s2, Vec{{0.0, 0.0, 1.0}});
  CHECK_THROWS_AS(transport_expansion_check(zz, a, b), InvalidConfiguration);
  // the smooth Taylor expansion is the right tool there
  CHECK(taylor_expansion_residual(zz, a, b) <= 1e-3);
}

TEST_CASE("CltPrediction JSON round trip") {
  const auto pred = psi_mu(shipped(ManifoldFamily::Circle));
  const auto back = CltPrediction::from_json(pred.to_json());
  CHECK((back.Psi - pred.Psi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.Sigma - pred.Sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.psi_positive_definite == pred.psi_positive_definite);
}
