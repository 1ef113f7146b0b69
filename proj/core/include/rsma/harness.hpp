#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rsma/baselines.hpp"
#include "rsma/netmodel.hpp"
#include "rsma/qt_algo.hpp"

namespace rsma {

enum class SweepParameter { kFronthaul, kSnr, kTargetRates, kAlpha };

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

enum class CriticalityVariant { kMixed, kNoMixLO, kNoMixME, kNoMixHI, kNoCrit };

std::string to_string(CriticalityVariant v);
CriticalityVariant variant_from_string(const std::string& s);

// Optimization-time config for a variant. NoMixX sets every desired rate to
// level X; NoCrit sets alpha to 0. Mixed returns the config unchanged.
SystemConfig apply_criticality_variant(CriticalityVariant variant, const SystemConfig& config);

// Grid value semantics: fronthaul in Mbps per BS, snr as 10 log10(P_max /
// sigma^2) in dB, target-rates as the LO level in Mbps (ME = 2 LO, HI = 4 LO),
// alpha unitless.
SystemConfig apply_sweep_value(SweepParameter parameter, double value, const SystemConfig& config);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kFronthaul;
  std::vector<double> grid;
  std::vector<SchemeKind> schemes = all_schemes();
  std::vector<CriticalityVariant> variants = {CriticalityVariant::kMixed};
  std::vector<std::uint64_t> seeds;
  ClusterSizes sizes;
  int decode_set_size = 2;
  QtOptions qt;
  int threads = 0;  // 0: hardware concurrency

  // Throws ConfigError on an empty grid, seed list, scheme or variant list.
  void validate() const;
};

// One optimizer run. Metrics are evaluated against the true (mixed) demands
// and the true alpha whatever the variant.
struct ResultRow {
  std::string parameter;
  double value = 0.0;
  double sum_target_mbps = 0.0;
  std::string variant;
  std::uint64_t seed = 0;
  std::string scheme;
  double psi = 0.0;
  double mse = 0.0;
  double power_w = 0.0;
  double phi = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degraded = false;
  bool feasible = false;
  std::string status;  // ok | degraded | infeasible | error
  double worst_ascent = 0.0;
  double wall_ms = 0.0;
};

struct RunOutput {
  ResultRow row;
  Solution solution;
};

// Generates the scenario, builds the scheme's structure and runs the
// optimizer for a single (config, seed, scheme, variant) point.
RunOutput run_point(const SystemConfig& config, std::uint64_t seed, SchemeKind scheme, CriticalityVariant variant,
                    const ClusterSizes& sizes, int decode_set_size, const QtOptions& qt);

// Rows ordered by grid value, then variant, seed and scheme, independent of
// thread scheduling.
std::vector<ResultRow> sweep(const SweepSpec& spec, const SystemConfig& config);

std::string result_csv_header(bool include_timing = false);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing = false);

// Mean and sample standard deviation over seeds per (parameter, value,
// variant, scheme), in order of first appearance. Rows whose metrics are not
// finite are skipped. Throws ConfigError when the input has no data rows.
struct SeriesPoint {
  std::string parameter;
  double value = 0.0;
  std::string variant;
  std::string scheme;
  int count = 0;
  double psi_mean = 0.0, psi_std = 0.0;
  double mse_mean = 0.0, mse_std = 0.0;
  double power_mean = 0.0, power_std = 0.0;
  double phi_mean = 0.0, phi_std = 0.0;
  double iterations_mean = 0.0, iterations_std = 0.0;
};

std::vector<SeriesPoint> aggregate_results(std::istream& csv);
void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series);

// Experiment file: {"preset", "system", "structure", "algorithm", "solver",
// "sweep"}; every section optional.
struct ExperimentConfig {
  SystemConfig system = desk_scale_config();
  SweepSpec sweep;
};

ExperimentConfig default_experiment();
ExperimentConfig parse_experiment(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::string& path);

}  // namespace rsma
