#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manistats/experiments.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace manistats;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MANISTATS_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WEXITSTATUS(status);
  return r;
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("geom distance/cut_time worked examples") {
  auto r = run_cli("geom --kind circle --op distance --x 0 --y 1.5707963267948966");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out).at("result").get<double>() == doctest::Approx(kPi / 2));

  r = run_cli("geom --kind sphere2 --op cut_time");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out).at("result").get<double>() == doctest::Approx(kPi));

  r = run_cli("geom --kind rp2 --op cut_time");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out).at("result").get<double>() == doctest::Approx(kPi / 2));
}

TEST_CASE("geom matches direct library calls (thin adapter)") {
  const auto r = run_cli("geom --kind sphere2 --op log --x [1,0,0] --y [0,1,0]");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  const auto x = make_point(ManifoldKind::sphere(2), Vec{{1.0, 0.0, 0.0}});
  const auto y = make_point(ManifoldKind::sphere(2), Vec{{0.0, 1.0, 0.0}});
  const TangentVector expected = log_map(x, y);
  CHECK(j.at("result").at("norm").get<double>() ==
        doctest::Approx(expected.norm()).epsilon(1e-15));
  const auto comp = j.at("result").at("components").get<std::vector<double>>();
  for (std::size_t i = 0; i < comp.size(); ++i)
    CHECK(comp[i] == doctest::Approx(expected.components[static_cast<Eigen::Index>(i)])
                         .epsilon(1e-15));
}

TEST_CASE("geom error paths: cut locus exits 3, parse errors exit 2") {
  CHECK(run_cli("geom --kind circle --op log --x 0 --y 3.141592653589793").exit_code == 3);
  CHECK(run_cli("geom --kind circle --op distance --x notjson --y 0").exit_code == 2);
  CHECK(run_cli("geom --kind circle --op warp --x 0 --y 1").exit_code == 3);
  CHECK(run_cli("nosuchcommand").exit_code == 2);
}

TEST_CASE("sample -> mean pipeline equals direct library result") {
  const std::string model_path = temp_file("manistats_model.json");
  {
    std::ofstream out(model_path);
    out << DensityModel::circle({0.0, 1.5, 0.25}).to_json();
  }
  const std::string csv_path = temp_file("manistats_cli_sample.csv");
  auto r = run_cli("sample --model " + model_path + " --n 200 --seed 77 --out " + csv_path);
  REQUIRE(r.exit_code == 0);

  r = run_cli("mean --in " + csv_path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);

  const auto model = DensityModel::circle({0.0, 1.5, 0.25});
  const auto direct = frechet_mean(FrechetObjective::from_sample(sample(model, 200, 77)));
  CHECK(j.at("mean").at("coords").at(0).get<double>() ==
        doctest::Approx(direct.mean.coords[0]).epsilon(1e-15));
  CHECK(j.at("objective").get<double>() == doctest::Approx(direct.objective).epsilon(1e-15));

  std::filesystem::remove(model_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("predict emits Psi = 1 - 2 pi psi(pi) for the circle mixture") {
  const std::string model_path = temp_file("manistats_model2.json");
  const auto model = DensityModel::circle({0.0, 1.5, 0.25});
  {
    std::ofstream out(model_path);
    out << model.to_json();
  }
  const auto r = run_cli("predict --model " + model_path);
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  const double psi_pi =
      model.density(make_point(ManifoldKind::circle(), Vec::Constant(1, kPi)));
  CHECK(j.at("Psi").at(0).at(0).get<double>() ==
        doctest::Approx(1.0 - kTwoPi * psi_pi).epsilon(1e-9));
  CHECK(j.at("psi_positive_definite").get<bool>());
  std::filesystem::remove(model_path);
}

TEST_CASE("simulate requires a seed and writes a schema-valid report") {
  const std::string model_path = temp_file("manistats_model3.json");
  {
    std::ofstream out(model_path);
    out << DensityModel::circle({0.0, 1.5, 0.25}).to_json();
  }
  // no seed: usage error
  CHECK(run_cli("simulate --model " + model_path + " --n 100 --replicates 10").exit_code == 2);

  const std::string report_path = temp_file("manistats_cli_report.json");
  const auto r = run_cli("simulate --model " + model_path +
                         " --seed 11 --n 100 --replicates 10 --out " + report_path);
  CHECK(r.exit_code == 0);
  REQUIRE(std::filesystem::exists(report_path));
  CHECK_NOTHROW(load_report(report_path));
  std::filesystem::remove(model_path);
  std::filesystem::remove(report_path);
}
