#pragma once

#include "manistats/asymptotics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace manistats {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

struct ExperimentConfig {
  DensityModel model = DensityModel::circle({0.0, 1.0, 0.25});
  std::vector<std::size_t> n_grid = {500, 2000, 8000};
  int replicates = 2000;
  std::uint64_t seed = 0;
  // Which sections to run: any of "clt", "residual_decay", "vol_probe",
  // "consistency".
  std::vector<std::string> checks = {"clt"};
  std::string out_path;
  std::string export_w_path;  // optional per-replicate CSV

  // Tolerance overrides.
  double se_band = 3.0;
  std::size_t vol_mc_points = 1000000;
  std::vector<double> vol_deltas = {0.05, 0.1, 0.2};
  std::vector<double> decay_ladder = {1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<std::size_t> consistency_n = {100, 1000, 10000};
  int consistency_replicates = 100;
  double max_failure_fraction = 0.01;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

struct CltPerN {
  std::size_t n = 0;
  int replicates = 0;
  int failures = 0;
  Vec empirical_mean;
  Mat empirical_cov;
  Mat cov_se;  // delta-method standard error per entry
  double rel_frobenius_error = 0.0;
  Vec skewness_z;
  Vec kurtosis_z;
  double mean_norm = 0.0;
  double mean_norm_bound = 0.0;  // 4 sqrt(tr Sigma / replicates)
  bool compared = false;  // band comparison needs >= 100 replicates
  bool within_band = false;
};

struct DecayRow {
  double rho = 0.0;
  double linearization_ratio = 0.0;  // max over directions of residual / rho
  double transport_ratio = 0.0;      // max over directions of remainder / rho
  bool linearization_at_floor = false;
  bool transport_at_floor = false;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  bool linearization_decreasing = false;
  bool transport_decreasing = false;
};

struct VolProbeResult {
  std::vector<double> delta;
  std::vector<double> estimate;
  std::vector<double> standard_error;
  std::vector<double> closed_form;  // reference value, or upper bound
  bool closed_form_is_bound = false;
  double loglog_slope = 0.0;
  bool within_bands = false;
};

struct ExperimentReport {
  int format_version = kReportFormatVersion;
  std::string library_version = kLibraryVersion;
  std::string config_echo;  // config JSON
  int threads = 1;
  std::string kernel_mode = "serial";

  std::optional<CltPrediction> prediction;
  std::vector<CltPerN> clt;
  bool clt_rel_error_nonincreasing = false;
  std::optional<DecayTable> decay;
  std::optional<VolProbeResult> vol_probe;
  std::optional<ConsistencyTable> consistency;
  bool checks_passed = false;

  std::string to_json() const;
  static ExperimentReport from_json(const std::string& text);
};

// Monte Carlo verification of the CLT plus the optional diagnostic sections
// selected in the config. Replicates run as parallel tasks keyed by
// (seed, n index, replicate index); aggregation is fixed-order, so the
// report is bit-identical for a given config regardless of thread count.
ExperimentReport run_clt_experiment(const ExperimentConfig& config);

// Monte Carlo estimate of vol({z : C_z intersects B_delta(x0)}) using the
// closed-form cut descriptions, with the fitted log-log slope.
VolProbeResult vol_A_delta_probe(const ManifoldKind& kind, const ManifoldPoint& x0,
                                 const std::vector<double>& deltas,
                                 std::size_t mc_points, std::uint64_t seed);

// Linearization and transport-expansion decay ratios along deterministic
// direction fans, for rho in the given ladder.
DecayTable residual_decay_suite(const DensityModel& model, const CltPrediction& pred,
                                const std::vector<double>& ladder);

void persist_report(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report(const std::string& path);

}  // namespace manistats
