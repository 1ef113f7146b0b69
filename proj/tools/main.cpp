// rsma: run, sweep, oracle and plotdata front end for the rsma core library.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rsma/baselines.hpp"
#include "rsma/csv.hpp"
#include "rsma/harness.hpp"
#include "rsma/metrics.hpp"
#include "rsma/oracle.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kSolverFailure = 2, kInfeasible = 3 };

struct CommonFlags {
  std::string config = "default";
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::vector<std::string> schemes;
  std::vector<std::string> variants;
  std::string out;
  bool timing = false;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("RSMA_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (v[used] != '\0') throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw rsma::ConfigError(std::string("RSMA_SEED is not an unsigned integer: '") + v + "'");
  }
}

std::uint64_t first_seed(const CommonFlags& f, std::uint64_t fallback) {
  if (f.seed) return *f.seed;
  if (auto e = env_seed()) return *e;
  return fallback;
}

// --out wins; otherwise RSMA_OUT_DIR/<name>; otherwise stdout (empty path).
std::string output_path(const CommonFlags& f, const std::string& default_name) {
  if (!f.out.empty()) return f.out;
  const char* dir = std::getenv("RSMA_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return {};
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / default_name).string();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rsma::ConfigError("cannot write '" + path + "'");
  out << text;
  std::cerr << "wrote " << path << '\n';
}

std::vector<rsma::SchemeKind> parse_schemes(const std::vector<std::string>& names) {
  std::vector<rsma::SchemeKind> out;
  for (const auto& n : names) out.push_back(rsma::scheme_from_string(n));
  return out;
}

std::vector<rsma::CriticalityVariant> parse_variants(const std::vector<std::string>& names) {
  std::vector<rsma::CriticalityVariant> out;
  for (const auto& n : names) out.push_back(rsma::variant_from_string(n));
  return out;
}

int cmd_run(const CommonFlags& f) {
  const auto exp = rsma::load_experiment(f.config);
  const std::uint64_t seed = first_seed(f, exp.sweep.seeds.front());
  const auto scheme = f.schemes.empty() ? rsma::SchemeKind::kRsma : rsma::scheme_from_string(f.schemes.front());
  const auto variant =
      f.variants.empty() ? rsma::CriticalityVariant::kMixed : rsma::variant_from_string(f.variants.front());
  if (f.schemes.size() > 1 || f.variants.size() > 1) throw rsma::ConfigError("run takes a single scheme and variant");

  const auto result =
      rsma::run_point(exp.system, seed, scheme, variant, exp.sweep.sizes, exp.sweep.decode_set_size, exp.sweep.qt);
  const auto& row = result.row;
  if (row.status == "infeasible") {
    std::cerr << "rsma run: first subproblem infeasible (seed " << seed << ")\n";
    return kInfeasible;
  }
  const auto& sol = result.solution;
  const rsma::Scenario sc = rsma::make_scenario(exp.system, seed);
  auto rep = rsma::make_report(sol.w, sol.r, sc.config, seed, rsma::to_string(scheme));
  rep.iterations = sol.iterations;
  rep.feasible = sol.feasibility.feasible;
  rep.status = row.status;

  nlohmann::ordered_json j;
  nlohmann::json body = rep;
  j["variant"] = rsma::to_string(variant);
  j["converged"] = sol.converged;
  j["degraded"] = sol.degraded;
  j["feasibility_worst_slack"] = sol.feasibility.worst();
  j["report"] = body;
  auto& log = j["iterate_log"] = nlohmann::ordered_json::array();
  for (const auto& rec : sol.log.records) {
    nlohmann::ordered_json e{{"iteration", rec.iteration}, {"psi", rec.psi},         {"mse", rec.mse},
                             {"power_w", rec.power_w},     {"status", rec.status},   {"solver_steps", rec.solver_steps}};
    if (f.timing) e["wall_ms"] = rec.wall_ms;
    log.push_back(e);
  }
  const std::string stem = "run_seed" + std::to_string(seed) + "_" + rsma::to_string(scheme);
  emit(output_path(f, stem + ".json"), j.dump(2) + "\n");

  bool solved = false;
  for (const auto& rec : sol.log.records) solved = solved || rec.status.rfind("optimal", 0) == 0;
  if (!solved || !sol.feasibility.feasible) {
    std::cerr << "rsma run: solver failure (seed " << seed << ")\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_sweep(const CommonFlags& f, const std::optional<std::string>& parameter, const std::vector<double>& grid,
              int threads) {
  auto exp = rsma::load_experiment(f.config);
  auto& spec = exp.sweep;
  if (parameter) spec.parameter = rsma::sweep_parameter_from_string(*parameter);
  if (!grid.empty()) spec.grid = grid;
  if (!f.schemes.empty()) spec.schemes = parse_schemes(f.schemes);
  if (!f.variants.empty()) spec.variants = parse_variants(f.variants);
  if (threads >= 0) spec.threads = threads;
  if (f.seeds || f.seed || env_seed()) {
    const int n = f.seeds ? *f.seeds : static_cast<int>(spec.seeds.size());
    if (n < 1) throw rsma::ConfigError("--seeds must be >= 1");
    const std::uint64_t s0 = first_seed(f, spec.seeds.front());
    spec.seeds.clear();
    for (int i = 0; i < n; ++i) spec.seeds.push_back(s0 + static_cast<std::uint64_t>(i));
  }
  const auto rows = rsma::sweep(spec, exp.system);
  std::ostringstream csv;
  rsma::write_results_csv(csv, rows, f.timing);
  emit(output_path(f, "sweep_" + rsma::to_string(spec.parameter) + ".csv"), csv.str());

  int failed = 0;
  for (const auto& r : rows) failed += r.status == "error" || r.status == "infeasible";
  if (failed > 0) std::cerr << "rsma sweep: " << failed << " of " << rows.size() << " runs failed\n";
  return kOk;
}

int cmd_oracle(const CommonFlags& f, int levels) {
  rsma::SystemConfig config = rsma::oracle_instance_config();
  rsma::QtOptions qt;
  if (f.config != "default") {
    std::ifstream in(f.config);
    if (!in) throw rsma::ConfigError("cannot open config file '" + f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw rsma::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const auto exp = rsma::parse_experiment(j);
    qt = exp.sweep.qt;
    if (j.contains("system")) {
      config = exp.system;
    }
  }
  const int n = f.seeds.value_or(f.seed || env_seed() ? 1 : 20);
  const std::uint64_t s0 = first_seed(f, 1);
  rsma::OracleOptions opts;
  opts.levels = levels;

  std::ostringstream out;
  out << "seed,algorithm_psi,grid_psi,refined_psi,resolution_slack,ratio,within_5pct\n";
  int passed = 0;
  for (int i = 0; i < n; ++i) {
    const auto seed = s0 + static_cast<std::uint64_t>(i);
    rsma::OracleComparison c;
    try {
      c = rsma::compare_with_oracle(config, seed, qt, opts);
    } catch (const rsma::OracleRefusal& e) {
      throw rsma::ConfigError(e.what());
    }
    const bool ok = c.ratio() <= 1.05;
    passed += ok;
    using rsma::csv::format_number;
    out << seed << ',' << format_number(c.algorithm_psi) << ',' << format_number(c.oracle.grid_psi) << ','
        << format_number(c.oracle.refined_psi) << ',' << format_number(c.oracle.resolution_slack) << ','
        << format_number(c.ratio()) << ',' << (ok ? 1 : 0) << '\n';
  }
  emit(output_path(f, "oracle.csv"), out.str());
  std::cerr << "rsma oracle: " << passed << "/" << n << " within 5% of the grid minimum\n";
  return kOk;
}

int cmd_plotdata(const CommonFlags& f, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw rsma::ConfigError("cannot open '" + input + "'");
  const auto series = rsma::aggregate_results(in);
  std::ostringstream out;
  rsma::write_series_csv(out, series);
  const auto stem = std::filesystem::path(input).stem().string();
  emit(output_path(f, stem + "_series.csv"), out.str());
  return kOk;
}

void add_common(CLI::App* app, CommonFlags& f, bool multi) {
  app->add_option("--config", f.config, "experiment JSON file, or 'default'");
  app->add_option("--seed", f.seed, "seed (first seed for multi-seed commands); env RSMA_SEED");
  app->add_option("--out", f.out, "output file; default RSMA_OUT_DIR/<name> or stdout");
  app->add_flag("--timing", f.timing, "include wall-clock columns");
  if (multi) {
    app->add_option("--seeds", f.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    app->add_option("--scheme", f.schemes, "rsma, scm, tin (repeatable or comma-separated)")->delimiter(',');
    app->add_option("--variant", f.variants, "Mixed, NoMixLO, NoMixME, NoMixHI, NoCrit")->delimiter(',');
  } else {
    app->add_option("--scheme", f.schemes, "rsma, scm or tin");
    app->add_option("--variant", f.variants, "Mixed, NoMixLO, NoMixME, NoMixHI or NoCrit");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fronthaul-constrained RSMA precoding: optimizer runs, sweeps and oracle checks"};
  app.require_subcommand(1);

  CommonFlags run_f, sweep_f, oracle_f, plot_f;
  auto* run = app.add_subcommand("run", "optimize one scenario and print its report");
  add_common(run, run_f, false);

  auto* sw = app.add_subcommand("sweep", "parameter sweep to CSV");
  add_common(sw, sweep_f, true);
  std::optional<std::string> parameter;
  std::vector<double> grid;
  int threads = -1;
  sw->add_option("--parameter", parameter, "fronthaul, snr, target-rates or alpha");
  sw->add_option("--grid", grid, "grid values (comma-separated)")->delimiter(',');
  sw->add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);

  auto* orc = app.add_subcommand("oracle", "compare the optimizer against the brute-force oracle");
  oracle_f.config = "default";
  add_common(orc, oracle_f, true);
  int levels = 0;
  orc->add_option("--levels", levels, "power levels per stream, 0 for automatic");

  auto* plot = app.add_subcommand("plotdata", "aggregate a sweep CSV into mean/std series");
  add_common(plot, plot_f, false);
  std::string input;
  plot->add_option("input", input, "sweep CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_f);
    if (*sw) return cmd_sweep(sweep_f, parameter, grid, threads);
    if (*orc) return cmd_oracle(oracle_f, levels);
    if (*plot) return cmd_plotdata(plot_f, input);
  } catch (const rsma::ConfigError& e) {
    std::cerr << "rsma: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const rsma::InitializationError& e) {
    std::cerr << "rsma: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "rsma: solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kConfigError;
}
