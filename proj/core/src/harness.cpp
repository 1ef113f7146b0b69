#include "rsma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rsma/csv.hpp"

namespace rsma {

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kFronthaul:
      return "fronthaul";
    case SweepParameter::kSnr:
      return "snr";
    case SweepParameter::kTargetRates:
      return "target-rates";
    case SweepParameter::kAlpha:
      return "alpha";
  }
  return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "fronthaul") return SweepParameter::kFronthaul;
  if (s == "snr") return SweepParameter::kSnr;
  if (s == "target-rates") return SweepParameter::kTargetRates;
  if (s == "alpha") return SweepParameter::kAlpha;
  throw ConfigError("unknown sweep parameter '" + s + "' (expected fronthaul, snr, target-rates or alpha)");
}

std::string to_string(CriticalityVariant v) {
  switch (v) {
    case CriticalityVariant::kMixed:
      return "Mixed";
    case CriticalityVariant::kNoMixLO:
      return "NoMixLO";
    case CriticalityVariant::kNoMixME:
      return "NoMixME";
    case CriticalityVariant::kNoMixHI:
      return "NoMixHI";
    case CriticalityVariant::kNoCrit:
      return "NoCrit";
  }
  return "?";
}

CriticalityVariant variant_from_string(const std::string& s) {
  for (auto v : {CriticalityVariant::kMixed, CriticalityVariant::kNoMixLO, CriticalityVariant::kNoMixME,
                 CriticalityVariant::kNoMixHI, CriticalityVariant::kNoCrit}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown criticality variant '" + s + "' (expected Mixed, NoMixLO, NoMixME, NoMixHI or NoCrit)");
}

SystemConfig apply_criticality_variant(CriticalityVariant variant, const SystemConfig& config) {
  SystemConfig out = config;
  auto flatten = [&out](Criticality level) {
    out.desired_rates_mbps.assign(static_cast<std::size_t>(out.num_users), out.level_rates.rate(level));
  };
  switch (variant) {
    case CriticalityVariant::kMixed:
      break;
    case CriticalityVariant::kNoMixLO:
      flatten(Criticality::kLow);
      break;
    case CriticalityVariant::kNoMixME:
      flatten(Criticality::kMedium);
      break;
    case CriticalityVariant::kNoMixHI:
      flatten(Criticality::kHigh);
      break;
    case CriticalityVariant::kNoCrit:
      out.alpha = 0.0;
      break;
  }
  return out;
}

SystemConfig apply_sweep_value(SweepParameter parameter, double value, const SystemConfig& config) {
  SystemConfig out = config;
  switch (parameter) {
    case SweepParameter::kFronthaul:
      out.fronthaul_capacity_mbps = value;
      break;
    case SweepParameter::kSnr:
      out.noise_psd_dbm_hz = noise_psd_for_snr(config, value);
      break;
    case SweepParameter::kTargetRates:
      out.level_rates = {4.0 * value, 2.0 * value, value};
      out.desired_rates_mbps.clear();
      break;
    case SweepParameter::kAlpha:
      out.alpha = value;
      break;
  }
  return out;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  if (seeds.empty()) throw ConfigError("sweep seed list is empty");
  if (schemes.empty()) throw ConfigError("sweep scheme list is empty");
  if (variants.empty()) throw ConfigError("sweep variant list is empty");
  if (threads < 0) throw ConfigError("sweep threads must be >= 0");
}

RunOutput run_point(const SystemConfig& config, std::uint64_t seed, SchemeKind scheme, CriticalityVariant variant,
                    const ClusterSizes& sizes, int decode_set_size, const QtOptions& qt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  ResultRow& row = out.row;
  row.seed = seed;
  row.scheme = to_string(scheme);
  row.variant = to_string(variant);
  const Scenario sc = make_scenario(config, seed);
  const SystemConfig& truth = sc.config;
  for (double d : truth.desired_rates_mbps) row.sum_target_mbps += d;
  const SystemConfig optimized = apply_criticality_variant(variant, truth);
  const RsmaStructure s = make_structure({scheme, sizes, decode_set_size}, sc.channel, truth);
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  try {
    out.solution = run(optimized, sc.channel, s, sc.noise_power_w, qt);
    const Solution& sol = out.solution;
    row.psi = objective_psi(sol.w, sol.r, truth);
    row.mse = rate_mse(sol.r, truth.desired_rates_mbps);
    row.power_w = total_power(sol.w);
    row.phi = energy_efficiency_phi(sol.w, sol.r, truth);
    row.iterations = sol.iterations;
    row.converged = sol.converged;
    row.degraded = sol.degraded;
    row.feasible = sol.feasibility.feasible;
    row.worst_ascent = sol.log.worst_ascent();
    row.status = sol.degraded ? "degraded" : "ok";
  } catch (const InitializationError&) {
    row.psi = row.mse = row.power_w = row.phi = kNan;
    row.status = "infeasible";
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<ResultRow> sweep(const SweepSpec& spec, const SystemConfig& config) {
  spec.validate();
  config.validate();
  struct Task {
    double value;
    CriticalityVariant variant;
    std::uint64_t seed;
    SchemeKind scheme;
  };
  std::vector<Task> tasks;
  for (double v : spec.grid) {
    for (auto variant : spec.variants) {
      for (auto seed : spec.seeds) {
        for (auto scheme : spec.schemes) tasks.push_back({v, variant, seed, scheme});
      }
    }
  }
  std::vector<ResultRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      const SystemConfig point = apply_sweep_value(spec.parameter, t.value, config);
      try {
        rows[i] = run_point(point, t.seed, t.scheme, t.variant, spec.sizes, spec.decode_set_size, spec.qt).row;
      } catch (const std::exception& e) {
        ResultRow& r = rows[i];
        r.seed = t.seed;
        r.scheme = to_string(t.scheme);
        r.variant = to_string(t.variant);
        r.psi = r.mse = r.power_w = r.phi = std::numeric_limits<double>::quiet_NaN();
        r.status = "error";
      }
      rows[i].parameter = to_string(spec.parameter);
      rows[i].value = t.value;
    }
  };
  unsigned n = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

std::string result_csv_header(bool include_timing) {
  std::string h =
      "parameter,value,sum_target_mbps,variant,seed,scheme,psi,mse,power_w,phi,iterations,converged,degraded,"
      "feasible,status,worst_ascent";
  if (include_timing) h += ",wall_ms";
  return h;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_timing) {
  using csv::format_number;
  out << result_csv_header(include_timing) << '\n';
  for (const auto& r : rows) {
    out << r.parameter << ',' << format_number(r.value) << ',' << format_number(r.sum_target_mbps) << ','
        << r.variant << ',' << r.seed << ',' << r.scheme << ',' << format_number(r.psi) << ','
        << format_number(r.mse) << ',' << format_number(r.power_w) << ',' << format_number(r.phi) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << (r.degraded ? 1 : 0) << ','
        << (r.feasible ? 1 : 0) << ',' << r.status << ',' << format_number(r.worst_ascent);
    if (include_timing) out << ',' << format_number(r.wall_ms);
    out << '\n';
  }
}

namespace {

struct Accumulator {
  std::vector<double> psi, mse, power, phi, iterations;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return used == s.size() ? v : std::numeric_limits<double>::quiet_NaN();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::vector<SeriesPoint> aggregate_results(std::istream& in) {
  csv::Table table;
  try {
    table = csv::read(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read result CSV: ") + e.what());
  }
  if (table.header.empty() || table.rows.empty()) throw ConfigError("result CSV has no data rows");
  const char* required[] = {"parameter", "value", "variant", "scheme", "psi", "mse", "power_w", "phi", "iterations"};
  for (const char* name : required) {
    if (table.column(name) < 0) throw ConfigError(std::string("result CSV lacks column '") + name + "'");
  }
  auto col = [&table](const char* name) { return static_cast<std::size_t>(table.column(name)); };
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, Accumulator> acc;
  for (const auto& row : table.rows) {
    const Key key{row[col("parameter")], row[col("value")], row[col("variant")], row[col("scheme")]};
    const double psi = parse_double(row[col("psi")]);
    const double mse = parse_double(row[col("mse")]);
    const double power = parse_double(row[col("power_w")]);
    const double phi = parse_double(row[col("phi")]);
    const double it = parse_double(row[col("iterations")]);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    if (!(std::isfinite(psi) && std::isfinite(mse) && std::isfinite(power) && std::isfinite(phi) && std::isfinite(it))) {
      continue;
    }
    a.psi.push_back(psi);
    a.mse.push_back(mse);
    a.power.push_back(power);
    a.phi.push_back(phi);
    a.iterations.push_back(it);
  }
  std::vector<SeriesPoint> out;
  for (const auto& key : order) {
    const auto& a = acc.at(key);
    SeriesPoint p;
    p.parameter = std::get<0>(key);
    p.value = parse_double(std::get<1>(key));
    p.variant = std::get<2>(key);
    p.scheme = std::get<3>(key);
    p.count = static_cast<int>(a.psi.size());
    std::tie(p.psi_mean, p.psi_std) = mean_std(a.psi);
    std::tie(p.mse_mean, p.mse_std) = mean_std(a.mse);
    std::tie(p.power_mean, p.power_std) = mean_std(a.power);
    std::tie(p.phi_mean, p.phi_std) = mean_std(a.phi);
    std::tie(p.iterations_mean, p.iterations_std) = mean_std(a.iterations);
    out.push_back(p);
  }
  return out;
}

void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series) {
  using csv::format_number;
  out << "parameter,value,variant,scheme,n,psi_mean,psi_std,mse_mean,mse_std,power_w_mean,power_w_std,phi_mean,"
         "phi_std,iterations_mean,iterations_std\n";
  for (const auto& p : series) {
    out << p.parameter << ',' << format_number(p.value) << ',' << p.variant << ',' << p.scheme << ',' << p.count
        << ',' << format_number(p.psi_mean) << ',' << format_number(p.psi_std) << ',' << format_number(p.mse_mean)
        << ',' << format_number(p.mse_std) << ',' << format_number(p.power_mean) << ','
        << format_number(p.power_std) << ',' << format_number(p.phi_mean) << ',' << format_number(p.phi_std) << ','
        << format_number(p.iterations_mean) << ',' << format_number(p.iterations_std) << '\n';
  }
}

ExperimentConfig default_experiment() {
  ExperimentConfig e;
  e.sweep.parameter = SweepParameter::kFronthaul;
  e.sweep.grid = {7, 14, 21, 28, 35, 42};
  for (std::uint64_t s = 1; s <= 20; ++s) e.sweep.seeds.push_back(s);
  return e;
}

ExperimentConfig parse_experiment(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const char* known[] = {"preset", "system", "structure", "algorithm", "solver", "sweep"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&key](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown experiment section '" + key + "'");
    }
  }
  ExperimentConfig e = default_experiment();
  try {
    if (j.contains("preset")) {
      const auto preset = j.at("preset").get<std::string>();
      if (preset == "desk") {
        e.system = desk_scale_config();
      } else if (preset == "paper") {
        e.system = paper_scale_config();
      } else {
        throw ConfigError("unknown preset '" + preset + "' (expected desk or paper)");
      }
    }
    if (j.contains("system")) from_json(j.at("system"), e.system);
    auto& sw = e.sweep;
    if (j.contains("structure")) {
      const auto& st = j.at("structure");
      if (st.contains("private_cluster_size")) st.at("private_cluster_size").get_to(sw.sizes.private_size);
      if (st.contains("common_cluster_size")) st.at("common_cluster_size").get_to(sw.sizes.common_size);
      if (st.contains("decode_set_size")) st.at("decode_set_size").get_to(sw.decode_set_size);
    }
    if (j.contains("algorithm")) {
      const auto& a = j.at("algorithm");
      if (a.contains("epsilon_rel")) a.at("epsilon_rel").get_to(sw.qt.epsilon_rel);
      if (a.contains("max_iterations")) a.at("max_iterations").get_to(sw.qt.max_iterations);
      if (a.contains("init")) sw.qt.init = init_mode_from_string(a.at("init").get<std::string>());
      if (a.contains("init_seed")) a.at("init_seed").get_to(sw.qt.init_seed);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      auto& st = sw.qt.solver;
      if (s.contains("feasibility_tol")) s.at("feasibility_tol").get_to(st.feasibility_tol);
      if (s.contains("relative_gap")) s.at("relative_gap").get_to(st.relative_gap);
      if (s.contains("acceptable_gap")) s.at("acceptable_gap").get_to(st.acceptable_gap);
      if (s.contains("max_iterations")) s.at("max_iterations").get_to(st.max_iterations);
      if (s.contains("barrier_growth")) s.at("barrier_growth").get_to(st.barrier_growth);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("parameter")) sw.parameter = sweep_parameter_from_string(s.at("parameter").get<std::string>());
      if (s.contains("grid")) s.at("grid").get_to(sw.grid);
      if (s.contains("schemes")) {
        sw.schemes.clear();
        for (const auto& x : s.at("schemes")) sw.schemes.push_back(scheme_from_string(x.get<std::string>()));
      }
      if (s.contains("variants")) {
        sw.variants.clear();
        for (const auto& x : s.at("variants")) sw.variants.push_back(variant_from_string(x.get<std::string>()));
      }
      if (s.contains("seeds")) {
        const auto& seeds = s.at("seeds");
        sw.seeds.clear();
        if (seeds.is_number_integer()) {
          const auto n = seeds.get<std::int64_t>();
          if (n < 1) throw ConfigError("sweep.seeds must be >= 1");
          const auto first = s.value("first_seed", std::uint64_t{1});
          for (std::int64_t i = 0; i < n; ++i) sw.seeds.push_back(first + static_cast<std::uint64_t>(i));
        } else {
          seeds.get_to(sw.seeds);
        }
      }
      if (s.contains("threads")) s.at("threads").get_to(sw.threads);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed experiment config: ") + ex.what());
  }
  e.system.validate();
  e.sweep.validate();
  try {
    e.sweep.qt.solver.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  if (!(e.sweep.qt.epsilon_rel > 0.0) || e.sweep.qt.max_iterations < 1) {
    throw ConfigError("algorithm: epsilon_rel must be > 0 and max_iterations >= 1");
  }
  if (e.sweep.sizes.private_size < 1 || e.sweep.sizes.private_size > e.system.num_bs ||
      e.sweep.sizes.common_size < 0 || e.sweep.sizes.common_size > e.system.num_bs) {
    throw ConfigError("structure: cluster sizes must lie in [1, num_bs]");
  }
  if (e.sweep.decode_set_size < 0) throw ConfigError("structure: decode_set_size must be >= 0");
  return e;
}

ExperimentConfig load_experiment(const std::string& path) {
  if (path == "default") return default_experiment();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + ex.what());
  }
  return parse_experiment(j);
}

}  // namespace rsma
