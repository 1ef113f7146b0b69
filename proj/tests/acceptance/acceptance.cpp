// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rsma/harness.hpp"
#include "rsma/oracle.hpp"
#include "rsma/rng.hpp"
#include "rsma/subproblem.hpp"

namespace {

using namespace rsma;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int n) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), first);
  return s;
}

// Worst feasibility slack over every Solution produced below (criterion 4).
struct FeasibilityLedger {
  double worst = std::numeric_limits<double>::infinity();
  long runs = 0;
  long failures = 0;

  void add(const Solution& sol) {
    ++runs;
    worst = std::min(worst, sol.feasibility.worst());
    if (sol.feasibility.worst() < -1e-6) ++failures;
  }
};

FeasibilityLedger feasibility;
const ExperimentConfig defaults = default_experiment();

RunOutput point(const SystemConfig& config, std::uint64_t seed, SchemeKind scheme,
                CriticalityVariant variant = CriticalityVariant::kMixed) {
  auto out = run_point(config, seed, scheme, variant, defaults.sweep.sizes, defaults.sweep.decode_set_size,
                       defaults.sweep.qt);
  if (out.row.status == "ok" || out.row.status == "degraded") feasibility.add(out.solution);
  return out;
}

Verdict qt_identity() {
  RandomStream rng(2024);
  double worst = 0.0;
  int rows = 0;
  for (int inst = 0; inst < 100; ++inst) {
    SystemConfig c = desk_scale_config();
    c.num_bs = 1 + static_cast<int>(rng.next_u64() % 4);
    c.num_users = 1 + static_cast<int>(rng.next_u64() % 6);
    c.antennas_per_bs = 1 + static_cast<int>(rng.next_u64() % 2);
    const auto sc = make_scenario(c, 1000 + static_cast<std::uint64_t>(inst));
    const int ps = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(c.num_bs));
    const auto s = make_rsma_structure(sc.channel, sc.config, {ps, 1}, static_cast<int>(rng.next_u64() % 3));
    const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kRandom, rng.next_u64());
    const double n = sc.noise_power_w;
    const auto u = update_aux(w, sc.channel, s, n);
    for (int k = 0; k < c.num_users; ++k) {
      const double gamma = rng.uniform(0.0, 100.0);
      const double g = qt_private_value(k, u.u_private[static_cast<std::size_t>(k)], gamma, w, sc.channel, s, n);
      worst = std::max(worst, std::abs(g - (gamma - sinr_private(k, w, sc.channel, s, n))));
      ++rows;
      for (int i : s.decode.decoded[static_cast<std::size_t>(k)]) {
        const double gc = qt_common_value(i, k, u.u_common(i, k), gamma, w, sc.channel, s, n);
        worst = std::max(worst, std::abs(gc - (gamma - sinr_common(i, k, w, sc.channel, s, n))));
        ++rows;
      }
    }
  }
  return {worst <= 1e-9, std::to_string(rows) + " rows over 100 instances, max |g - (gamma - Gamma)| = " +
                             fmt("%.3g", worst)};
}

struct DescentStats {
  double worst_ascent = -std::numeric_limits<double>::infinity();
  int runs = 0;
  std::vector<int> iterations;
};

DescentStats descent_runs() {
  DescentStats st;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto out = point(defaults.system, seed, SchemeKind::kRsma);
    st.worst_ascent = std::max(st.worst_ascent, out.solution.log.worst_ascent());
    st.iterations.push_back(out.solution.iterations);
    ++st.runs;
  }
  return st;
}

Verdict monotone_descent(const DescentStats& st) {
  return {st.worst_ascent <= 1e-6,
          std::to_string(st.runs) + " runs, worst normalized ascent " + fmt("%.3g", st.worst_ascent) + " (limit 1e-6)"};
}

Verdict convergence_speed(const DescentStats& st) {
  auto it = st.iterations;
  std::sort(it.begin(), it.end());
  const std::size_t n = it.size();
  const double median = n % 2 ? it[n / 2] : 0.5 * (it[n / 2 - 1] + it[n / 2]);
  const double mean = std::accumulate(it.begin(), it.end(), 0.0) / static_cast<double>(n);
  return {median <= 10.0 && mean <= 6.0,
          "median " + fmt("%.1f", median) + " (limit 10), mean " + fmt("%.2f", mean) + " (limit 6)"};
}

Verdict oracle_ratio() {
  double worst = 0.0;
  int over = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cmp = compare_with_oracle(oracle_instance_config(), seed);
    worst = std::max(worst, cmp.ratio());
    if (!(cmp.ratio() <= 1.05)) ++over;
  }
  return {over == 0, "20 instances, worst Psi_alg / Psi_grid = " + fmt("%.5f", worst) + " (limit 1.05)"};
}

// Largest per-BS sum of desired rates over the users it serves privately.
double fronthaul_need(const Scenario& sc) {
  const auto cl = build_clusters(sc.channel, sc.config, defaults.sweep.sizes);
  double need = 0.0;
  for (const auto& users : cl.private_clusters) {
    double sum = 0.0;
    for (int k : users) sum += sc.config.desired_rates_mbps[static_cast<std::size_t>(k)];
    need = std::max(need, sum);
  }
  return need;
}

struct SchemeMeans {
  double psi[3] = {0, 0, 0};
  double phi[3] = {0, 0, 0};
};

SchemeMeans scheme_means(double need_fraction, int seeds) {
  const SchemeKind kinds[3] = {SchemeKind::kRsma, SchemeKind::kScm, SchemeKind::kTin};
  SchemeMeans m;
  for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(seeds); ++seed) {
    SystemConfig c = defaults.system;
    c.fronthaul_capacity_mbps = need_fraction * fronthaul_need(make_scenario(c, seed));
    for (int i = 0; i < 3; ++i) {
      const auto out = point(c, seed, kinds[i]);
      m.psi[i] += out.row.psi / seeds;
      m.phi[i] += out.row.phi / seeds;
    }
  }
  return m;
}

Verdict scheme_ordering() {
  const int seeds = 20;
  const auto lo = scheme_means(0.5, seeds);
  const auto hi = scheme_means(4.0, seeds);
  const bool psi_ok = lo.psi[0] <= lo.psi[1] && lo.psi[1] <= lo.psi[2];
  const bool phi_ok = lo.phi[0] >= lo.phi[1] && lo.phi[1] >= lo.phi[2];
  const double phi_max = std::max({hi.phi[0], hi.phi[1], hi.phi[2]});
  const double phi_min = std::min({hi.phi[0], hi.phi[1], hi.phi[2]});
  const bool agree = phi_max <= 1.05 * phi_min;
  std::ostringstream d;
  d.precision(8);
  d << seeds << " seeds; C = 0.5 need: Psi rsma/scm/tin " << lo.psi[0] << " / " << lo.psi[1] << " / " << lo.psi[2]
    << ", Phi " << lo.phi[0] << " / " << lo.phi[1] << " / " << lo.phi[2] << "; C = 4 need: Phi spread "
    << fmt("%.4f", phi_max / phi_min - 1.0) << " (limit 0.05)";
  return {psi_ok && phi_ok && agree, d.str()};
}

Verdict alpha_tradeoff() {
  const std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const int seeds = 20;
  std::vector<double> mse(alphas.size(), 0.0), power(alphas.size(), 0.0);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    SystemConfig c = defaults.system;
    c.alpha = alphas[a];
    for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(seeds); ++seed) {
      const auto out = point(c, seed, SchemeKind::kRsma);
      mse[a] += out.row.mse / seeds;
      power[a] += out.row.power_w / seeds;
    }
  }
  int mse_up = 0, power_down = 0;
  for (std::size_t a = 1; a < alphas.size(); ++a) {
    if (mse[a] > mse[a - 1]) ++mse_up;
    if (power[a] < power[a - 1]) ++power_down;
  }
  return {mse_up <= 1 && power_down <= 1, "MSE increases at " + std::to_string(mse_up) +
                                              " steps, power decreases at " + std::to_string(power_down) +
                                              " steps (limit 1 each)"};
}

Verdict criticality_benefit() {
  const std::vector<double> grid = {3.0, 4.0, 5.0};
  const CriticalityVariant order[5] = {CriticalityVariant::kMixed, CriticalityVariant::kNoMixME,
                                       CriticalityVariant::kNoMixLO, CriticalityVariant::kNoMixHI,
                                       CriticalityVariant::kNoCrit};
  const int seeds = 20;
  bool ok = true;
  std::ostringstream d;
  d.precision(5);
  for (double v : grid) {
    const SystemConfig c = apply_sweep_value(SweepParameter::kTargetRates, v, defaults.system);
    double psi[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 5; ++i) {
      for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(seeds); ++seed) {
        psi[i] += point(c, seed, SchemeKind::kRsma, order[i]).row.psi / seeds;
      }
    }
    const double worst_nomix = std::max(psi[2], psi[3]);
    ok = ok && psi[0] <= psi[1] && psi[1] <= worst_nomix && worst_nomix <= psi[4];
    d << "LO=" << v << ": " << psi[0] << " <= " << psi[1] << " <= " << worst_nomix << " <= " << psi[4] << "; ";
  }
  return {ok, d.str() + std::to_string(seeds) + " seeds"};
}

Verdict variable_count() {
  int shapes = 0, mismatches = 0;
  for (int nb = 1; nb <= 4; ++nb) {
    for (int nk = 1; nk <= 6; ++nk) {
      for (int nl = 1; nl <= 2; ++nl) {
        SystemConfig c = desk_scale_config();
        c.num_bs = nb;
        c.num_users = nk;
        c.antennas_per_bs = nl;
        const auto sc = make_scenario(c, 7);
        const auto s = make_rsma_structure(sc.channel, sc.config, {nb, nb}, nk - 1);
        const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
        const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                          sc.noise_power_w);
        ++shapes;
        if (sub.layout.core_variable_count != nk * (2 * (nb * nl + 1) + nk + 1)) ++mismatches;
      }
    }
  }
  const auto sc = make_scenario(paper_scale_config(), 1);
  const auto s = make_rsma_structure(sc.channel, sc.config, {10, 10}, 15);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const int paper = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                     sc.noise_power_w)
                        .layout.core_variable_count;
  return {mismatches == 0 && paper == 944, std::to_string(shapes) + " shapes, " + std::to_string(mismatches) +
                                               " mismatches; B=10 K=16 L=2 gives " + std::to_string(paper)};
}

Verdict determinism() {
  auto e = defaults;
  e.sweep.seeds = seed_range(1, 3);
  e.sweep.threads = 2;
  std::ostringstream a, b;
  write_results_csv(a, sweep(e.sweep, e.system));
  e.sweep.threads = 1;
  write_results_csv(b, sweep(e.sweep, e.system));
  const std::string first = a.str();
  const bool same = first == b.str();
  const auto lines = std::count(first.begin(), first.end(), '\n');
  return {same && lines > 1, std::to_string(lines - 1) + " rows, " + (same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&failed](int id, const char* name, const std::function<Verdict()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("criterion %2d %-22s %s  %s [%.1f s]\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), s);
    std::fflush(stdout);
  };

  DescentStats descent;
  report(1, "qt-identity", qt_identity);
  report(2, "monotone-descent", [&descent] {
    descent = descent_runs();
    return monotone_descent(descent);
  });
  report(3, "convergence-speed", [&descent] { return convergence_speed(descent); });
  report(5, "oracle", oracle_ratio);
  report(6, "scheme-ordering", scheme_ordering);
  report(7, "alpha-tradeoff", alpha_tradeoff);
  report(8, "criticality-benefit", criticality_benefit);
  report(9, "variable-count", variable_count);
  report(10, "determinism", determinism);
  // Feasibility last: it covers every Solution produced above.
  report(4, "feasibility", [] {
    return Verdict{feasibility.failures == 0 && feasibility.runs > 0,
                   std::to_string(feasibility.runs) + " solutions, worst normalized slack " +
                       fmt("%.3g", feasibility.worst) + " (limit -1e-6)"};
  });
  std::printf("%s: %d of 10 criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
