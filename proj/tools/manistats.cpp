#include "manistats/checks.hpp"
#include "manistats/experiments.hpp"
#include "manistats/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace manistats;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text << "\n";
}

ManifoldPoint parse_point(const ManifoldKind& kind, const std::string& text) {
  const json j = json::parse(text);
  Vec coords;
  if (j.is_number()) {
    coords = Vec::Constant(1, j.get<double>());
  } else if (j.is_array()) {
    coords.resize(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords[i] = j.at(i).get<double>();
  } else if (j.is_object()) {
    return ManifoldPoint::from_json(text);
  } else {
    throw Error("cannot parse point from: " + text);
  }
  return make_point(kind, std::move(coords));
}

Vec parse_components(const std::string& text, int m) {
  const json j = json::parse(text);
  Vec v;
  if (j.is_number()) v = Vec::Constant(1, j.get<double>());
  else {
    v.resize(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  }
  if (v.size() != m) throw Error("tangent components have wrong length");
  return v;
}

ordered_json point_json(const ManifoldPoint& p) { return ordered_json::parse(p.to_json()); }

int cmd_geom(const std::string& kind_name, const std::string& op, const std::string& x_text,
             const std::string& y_text, const std::string& v_text, const std::string& out) {
  const ManifoldKind kind = ManifoldKind::parse(kind_name);
  const int m = kind.dim();

  auto default_x = [&] {
    Vec c = Vec::Zero(kind.coord_size());
    if (!kind.angular()) c[0] = 1.0;
    return make_point(kind, std::move(c));
  };
  auto default_u = [&] {
    Vec u = Vec::Zero(m);
    u[0] = 1.0;
    return u;
  };

  ordered_json result;
  result["kind"] = kind.name();
  result["op"] = op;

  if (op == "distance") {
    const ManifoldPoint x = parse_point(kind, x_text);
    const ManifoldPoint y = parse_point(kind, y_text);
    result["result"] = distance(x, y);
  } else if (op == "exp") {
    const ManifoldPoint x = parse_point(kind, x_text);
    const Vec v = parse_components(v_text, m);
    result["result"] = point_json(exp_map(x, {x, v}));
  } else if (op == "log") {
    const ManifoldPoint x = parse_point(kind, x_text);
    const ManifoldPoint y = parse_point(kind, y_text);
    const TangentVector v = log_map(x, y);
    result["result"] =
        ordered_json{{"components", std::vector<double>(v.components.data(),
                                                        v.components.data() + v.components.size())},
                     {"norm", v.norm()}};
  } else if (op == "transport") {
    const ManifoldPoint x = parse_point(kind, x_text);
    const ManifoldPoint y = parse_point(kind, y_text);
    const Vec v = parse_components(v_text, m);
    const TangentVector w = parallel_transport(x, y, {x, v});
    result["result"] = ordered_json{
        {"components",
         std::vector<double>(w.components.data(), w.components.data() + w.components.size())}};
  } else if (op == "cut_time") {
    const ManifoldPoint x = x_text.empty() ? default_x() : parse_point(kind, x_text);
    Vec u = v_text.empty() ? default_u() : parse_components(v_text, m);
    result["result"] = cut_time(x, {x, u});
  } else {
    throw Error("unknown geom op: " + op +
                " (expected distance|exp|log|transport|cut_time)");
  }
  write_text(out, result.dump(2));
  return kExitOk;
}

int cmd_mean(const std::string& in_path, const std::string& out) {
  const SampleSet s = SampleSet::load_csv(in_path);
  const FrechetSolveResult r = frechet_mean(FrechetObjective::from_sample(s));
  write_text(out, r.to_json());
  return kExitOk;
}

int cmd_sample(const std::string& model_path, std::size_t n, std::uint64_t seed,
               const std::string& out) {
  const DensityModel model = DensityModel::from_json(slurp(model_path));
  const SampleSet s = sample(model, n, seed);
  if (out.empty()) throw Error("sample: --out is required");
  s.save_csv(out);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& out) {
  const DensityModel model = DensityModel::from_json(slurp(model_path));
  const CltPrediction pred = psi_mu(model);
  write_text(out, pred.to_json());
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& model_path,
                 bool have_seed, std::uint64_t seed, int n, int replicates,
                 const std::string& checks_csv, const std::string& out,
                 const std::string& export_w, double tolerance) {
  ExperimentConfig cfg;
  bool config_has_seed = false;
  if (!config_path.empty()) {
    const std::string text = slurp(config_path);
    cfg = ExperimentConfig::from_json(text);
    config_has_seed = json::parse(text).contains("seed");
  } else if (!model_path.empty()) {
    const std::string model_text = slurp(model_path);
    const json mj = json::parse(model_text);
    cfg.model = DensityModel::from_json(model_text);
    if (mj.contains("seed")) {
      cfg.seed = mj.at("seed").get<std::uint64_t>();
      config_has_seed = true;
    }
  } else {
    std::cerr << "simulate: pass --config or --model\n";
    return kExitUsage;
  }
  if (have_seed) {
    cfg.seed = seed;
    config_has_seed = true;
  }
  if (!config_has_seed) {
    std::cerr << "simulate: --seed is required (no hidden entropy)\n";
    return kExitUsage;
  }
  if (n > 0) cfg.n_grid = {static_cast<std::size_t>(n)};
  if (replicates > 0) cfg.replicates = replicates;
  if (!checks_csv.empty()) {
    cfg.checks.clear();
    std::stringstream ss(checks_csv);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.checks.push_back(item);
  }
  if (!out.empty()) cfg.out_path = out;
  if (!export_w.empty()) cfg.export_w_path = export_w;
  if (tolerance > 0.0) cfg.se_band = tolerance;

  const ExperimentReport report = run_clt_experiment(cfg);
  if (cfg.out_path.empty()) std::cout << report.to_json() << "\n";
  std::cerr << "checks_passed: " << (report.checks_passed ? "true" : "false") << "\n";
  return report.checks_passed ? kExitOk : kExitCheckFail;
}

int cmd_check(std::uint64_t seed, bool quick) {
  const std::vector<CheckResult> results = run_check_suite(seed, quick);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << "  [" << r.detail << "]";
    std::cout << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitCheckFail;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("MANISTATS_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) par::set_threads(t);
  }

  CLI::App app{"Riemannian Frechet means, cut-locus asymptotics and CLT verification"};
  app.require_subcommand(1);

  // geom
  std::string kind_name = "circle", op, x_text, y_text, v_text, out_path;
  auto* geom = app.add_subcommand("geom", "geometry queries");
  geom->add_option("--kind", kind_name, "circle|torus<d>|sphere<d>|rp2")->required();
  geom->add_option("--op", op, "distance|exp|log|transport|cut_time")->required();
  geom->add_option("--x", x_text, "point (number, array, or point JSON)");
  geom->add_option("--y", y_text, "point");
  geom->add_option("--v", v_text, "tangent components");
  geom->add_option("--out", out_path, "output path (default stdout)");

  // mean
  std::string in_path, mean_out;
  auto* mean = app.add_subcommand("mean", "sample Frechet mean from CSV");
  mean->add_option("--in", in_path, "sample CSV path")->required();
  mean->add_option("--out", mean_out, "output path (default stdout)");

  // sample
  std::string sample_model, sample_out;
  std::uint64_t sample_seed = 0;
  std::size_t sample_n = 0;
  auto* smp = app.add_subcommand("sample", "draw a reproducible sample to CSV");
  smp->add_option("--model", sample_model, "model config JSON path")->required();
  smp->add_option("--n", sample_n, "sample size")->required();
  smp->add_option("--seed", sample_seed, "seed")->required();
  smp->add_option("--out", sample_out, "output CSV path")->required();

  // predict
  std::string predict_model, predict_out;
  auto* predict = app.add_subcommand("predict", "CLT prediction (J, Psi, V0, Sigma)");
  predict->add_option("--model", predict_model, "model config JSON path")->required();
  predict->add_option("--out", predict_out, "output path (default stdout)");

  // simulate
  std::string sim_config, sim_model, sim_checks, sim_out, sim_export_w;
  std::uint64_t sim_seed = 0;
  int sim_n = 0, sim_replicates = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo CLT experiment");
  simulate->add_option("--config", sim_config, "experiment config JSON path");
  simulate->add_option("--model", sim_model, "model config JSON path");
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "seed (required)");
  simulate->add_option("--n", sim_n, "single sample size (overrides grid)");
  simulate->add_option("--replicates", sim_replicates, "replicates per n");
  simulate->add_option("--checks", sim_checks, "comma list: clt,residual_decay,vol_probe,consistency");
  double sim_tolerance = 0.0;
  simulate->add_option("--tolerance", sim_tolerance, "covariance band width in replicate SEs (default 3)");
  simulate->add_option("--out", sim_out, "report path");
  simulate->add_option("--export-w", sim_export_w, "per-replicate CSV path");

  // check
  std::uint64_t check_seed = 20240817;
  bool check_quick = false;
  auto* check = app.add_subcommand("check", "run the invariant suite");
  check->add_option("--seed", check_seed, "seed");
  check->add_flag("--quick", check_quick, "trimmed trial counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (geom->parsed()) return cmd_geom(kind_name, op, x_text, y_text, v_text, out_path);
    if (mean->parsed()) return cmd_mean(in_path, mean_out);
    if (smp->parsed()) return cmd_sample(sample_model, sample_n, sample_seed, sample_out);
    if (predict->parsed()) return cmd_predict(predict_model, predict_out);
    if (simulate->parsed())
      return cmd_simulate(sim_config, sim_model, seed_opt->count() > 0, sim_seed, sim_n,
                          sim_replicates, sim_checks, sim_out, sim_export_w, sim_tolerance);
    if (check->parsed()) return cmd_check(check_seed, check_quick);
  } catch (const CutLocusError& e) {
    ordered_json err{{"error", "CutLocusError"}, {"message", e.what()}};
    ordered_json branches = ordered_json::array();
    for (const auto& b : e.branch_vectors)
      branches.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    err["branches"] = branches;
    std::cerr << err.dump(2) << "\n";
    return kExitDomain;
  } catch (const json::exception& e) {
    std::cerr << ordered_json{{"error", "ParseError"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << ordered_json{{"error", "DomainError"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << ordered_json{{"error", "InternalError"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
