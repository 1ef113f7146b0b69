#include "rsma/qt_algo.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rsma/csv.hpp"
#include "rsma/subproblem.hpp"

namespace rsma {

std::string to_string(InitMode m) { return m == InitMode::kMrt ? "mrt" : "random"; }

InitMode init_mode_from_string(const std::string& s) {
  if (s == "mrt") return InitMode::kMrt;
  if (s == "random") return InitMode::kRandom;
  throw ConfigError("unknown init mode '" + s + "' (expected mrt or random)");
}

double IterateLog::worst_ascent() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < records.size(); ++t) {
    const double prev = records[t - 1].psi;
    worst = std::max(worst, (records[t].psi - prev) / std::max(1.0, std::abs(prev)));
  }
  return worst;
}

void IterateLog::write_csv(std::ostream& out, bool include_timing) const {
  out << "iteration,psi,mse,power_w,status" << (include_timing ? ",wall_ms" : "") << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << csv::format_number(r.psi) << ',' << csv::format_number(r.mse) << ','
        << csv::format_number(r.power_w) << ',' << r.status;
    if (include_timing) out << ',' << csv::format_number(r.wall_ms);
    out << '\n';
  }
}

PrecoderSet init_precoders(const ChannelState& h, const RsmaStructure& s, const SystemConfig& config,
                           InitMode mode, std::uint64_t seed) {
  const int nk = h.num_users();
  const int nl = h.antennas();
  PrecoderSet w = PrecoderSet::zeros(nk, h.aggregate_dim());
  RandomStream rng(seed);
  const double pmax = config.max_power_w();
  for (int b = 0; b < h.num_bs(); ++b) {
    const auto& priv = s.clusters.private_clusters[static_cast<std::size_t>(b)];
    std::vector<int> comm;
    for (int i : s.clusters.common_clusters[static_cast<std::size_t>(b)]) {
      if (s.has_common_stream(i)) comm.push_back(i);
    }
    const auto streams = priv.size() + comm.size();
    if (streams == 0) continue;
    const double per_stream = std::sqrt(pmax / static_cast<double>(streams));
    auto fill = [&](Eigen::VectorXcd& target, const Eigen::VectorXcd& mrt) {
      Eigen::VectorXcd dir = mrt;
      if (mode == InitMode::kRandom) {
        for (int l = 0; l < nl; ++l) dir(l) = rng.complex_normal();
      }
      const double n = dir.norm();
      if (n > 0.0) target.segment(b * nl, nl) = dir * (per_stream / n);
    };
    for (int k : priv) fill(w.w_private[static_cast<std::size_t>(k)], h.link(b, k));
    for (int i : comm) {
      Eigen::VectorXcd dir = h.link(b, i);
      if (s.common_mode == CommonMode::kSharedSingle) {
        // The super-common stream points at all of its decoders.
        dir.setZero();
        for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
          const double n = h.link(b, k).norm();
          if (n > 0.0) dir += h.link(b, k) / n;
        }
      }
      fill(w.w_common[static_cast<std::size_t>(i)], dir);
    }
  }
  return w;
}

namespace {

double interference_power(int k, const InterferenceSet& set, const PrecoderSet& w, const ChannelState& h) {
  double acc = 0.0;
  for (int j : set.private_streams) acc += received_power(h.aggregate(k), w.w_private[static_cast<std::size_t>(j)]);
  for (int l : set.common_streams) acc += received_power(h.aggregate(k), w.w_common[static_cast<std::size_t>(l)]);
  return acc;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// A strictly interior start for the next subproblem derived from the current
// iterate. Precoders shrink by 5%, gamma sits at half the true SINR and every
// rate is a blend of its current value and its bound, scaled so each fronthaul
// row stays at or below 75% of capacity.
SubproblemPoint interior_start(const PrecoderSet& w, const RateAllocation& r, const SubproblemLayout& lay,
                               const ChannelState& h, const RsmaStructure& s, const SystemConfig& config,
                               double noise_w) {
  const int nk = s.num_users();
  SubproblemPoint p{w, r, SinrAuxiliaries::zeros(nk)};
  for (int k = 0; k < nk; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    if (lay.private_gamma[ks] < 0) p.w.w_private[ks].setZero();
    bool any = false;
    for (int j = 0; j < nk; ++j) any = any || lay.common_gamma(k, j) >= 0;
    if (!any) p.w.w_common[ks].setZero();
    p.w.w_private[ks] *= 0.95;
    p.w.w_common[ks] *= 0.95;
  }
  const SinrAuxiliaries sinr = true_sinrs(p.w, h, s, noise_w);
  p.gamma.private_sinr = sinr.private_sinr;
  for (auto& g : p.gamma.private_sinr) g *= 0.5;
  p.gamma.common_sinr = 0.5 * sinr.common_sinr;

  const double tau = config.bandwidth_mhz;
  // base = half the current (clipped) rate, extra = a quarter of the bound.
  RateAllocation base = RateAllocation::zeros(nk);
  RateAllocation extra = RateAllocation::zeros(nk);
  for (int k = 0; k < nk; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    if (lay.private_rate[ks] < 0) continue;
    const double bound = shannon_rate_mbps(p.gamma.private_sinr[ks], tau);
    base.private_rate[ks] = 0.5 * std::clamp(r.private_rate[ks], 0.0, bound);
    extra.private_rate[ks] = 0.25 * bound;
  }
  if (s.common_mode == CommonMode::kPerUser) {
    for (int i = 0; i < nk; ++i) {
      const auto is = static_cast<std::size_t>(i);
      if (lay.common_rate[is] < 0) continue;
      double bound = std::numeric_limits<double>::infinity();
      for (int k : s.decode.decoders[is]) bound = std::min(bound, shannon_rate_mbps(p.gamma.common_sinr(i, k), tau));
      base.common_rate[is] = 0.5 * std::clamp(r.common_rate[is], 0.0, bound);
      extra.common_rate[is] = 0.25 * bound;
    }
  } else if (s.common_mode == CommonMode::kSharedSingle && lay.common_rate[0] >= 0) {
    double bound = std::numeric_limits<double>::infinity();
    for (int k : s.decode.decoders[0]) bound = std::min(bound, shannon_rate_mbps(p.gamma.common_sinr(0, k), tau));
    double used = 0.0;
    for (double c : r.common_rate) used += std::max(c, 0.0);
    const double factor = used > bound ? bound / used : 1.0;
    for (int k = 0; k < nk; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      base.common_rate[ks] = 0.5 * std::max(r.common_rate[ks], 0.0) * factor;
      extra.common_rate[ks] = 0.25 * bound / nk;
    }
  }
  double theta = 1.0;
  const double cap = config.fronthaul_capacity_mbps;
  for (int b = 0; b < s.num_bs(); ++b) {
    const double fixed = fronthaul_usage(b, base, s.clusters);
    const double more = fronthaul_usage(b, extra, s.clusters);
    if (more > 0.0) theta = std::min(theta, (0.75 * cap - fixed) / more);
  }
  theta = std::max(theta, 0.0);
  for (int k = 0; k < nk; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    p.r.private_rate[ks] = base.private_rate[ks] + theta * extra.private_rate[ks];
    p.r.common_rate[ks] = base.common_rate[ks] + theta * extra.common_rate[ks];
  }
  return p;
}

}  // namespace

AuxVariables update_aux(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w) {
  const int nk = s.num_users();
  AuxVariables u = AuxVariables::zeros(nk);
  for (int k = 0; k < nk; ++k) {
    const auto& hk = h.aggregate(k);
    const double denom = noise_w + interference_power(k, private_interference(s, k), w, h);
    u.u_private[static_cast<std::size_t>(k)] = w.w_private[static_cast<std::size_t>(k)].dot(hk) / denom;
  }
  for (int i = 0; i < nk; ++i) {
    if (!s.has_common_stream(i)) continue;
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      const auto& hk = h.aggregate(k);
      const double denom = noise_w + interference_power(k, common_interference(s, i, k), w, h);
      u.u_common(i, k) = w.w_common[static_cast<std::size_t>(i)].dot(hk) / denom;
    }
  }
  return u;
}

SinrAuxiliaries true_sinrs(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w) {
  const int nk = s.num_users();
  SinrAuxiliaries g = SinrAuxiliaries::zeros(nk);
  for (int k = 0; k < nk; ++k) g.private_sinr[static_cast<std::size_t>(k)] = sinr_private(k, w, h, s, noise_w);
  for (int i = 0; i < nk; ++i) {
    if (!s.has_common_stream(i)) continue;
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) g.common_sinr(i, k) = sinr_common(i, k, w, h, s, noise_w);
  }
  return g;
}

Solution run(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s, double noise_w,
             const QtOptions& opts) {
  config.validate();
  opts.solver.validate();
  if (!(opts.epsilon_rel > 0.0) || opts.max_iterations < 1) {
    throw ConfigError("qt options: epsilon_rel must be > 0 and max_iterations >= 1");
  }
  s.decode.check_consistency();
  const int nk = config.num_users;

  Solution sol;
  sol.w = init_precoders(h, s, config, opts.init, opts.init_seed);
  sol.r = RateAllocation::zeros(nk);
  sol.gamma = true_sinrs(sol.w, h, s, noise_w);
  sol.psi = objective_psi(sol.w, sol.r, config);
  const double mse_weight = config.alpha;
  auto record = [&](int t, const PrecoderSet& w, const RateAllocation& r, std::string status, int steps, double ms) {
    IterateRecord rec;
    rec.iteration = t;
    rec.mse = rate_mse(r, config.desired_rates_mbps);
    rec.power_w = total_power(w);
    rec.psi = mse_weight * rec.mse + (1.0 - mse_weight) * rec.power_w;
    rec.status = std::move(status);
    rec.solver_steps = steps;
    rec.wall_ms = ms;
    sol.log.records.push_back(rec);
  };
  record(0, sol.w, sol.r, "init", 0, 0.0);

  PrecoderSet w = sol.w;
  RateAllocation r = sol.r;
  double prev = sol.psi;
  for (int t = 1; t <= opts.max_iterations; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const AuxVariables u = update_aux(w, h, s, noise_w);
    const Subproblem sub = build_subproblem(h, s, u, config, noise_w);
    const SubproblemPoint start = interior_start(w, r, sub.layout, h, s, config, noise_w);
    const conic::SolverResult res = conic::solve(sub.program, opts.solver, encode_point(sub, start, config));
    sol.iterations = t;
    if (res.status != conic::SolverStatus::kOptimal) {
      if (t == 1 && res.status == conic::SolverStatus::kInfeasible) {
        throw InitializationError("first subproblem infeasible from the initial precoders");
      }
      sol.degraded = true;
      record(t, w, r, to_string(res.status), res.newton_steps, elapsed_ms(t0));
      break;
    }
    SubproblemPoint pt = decode_point(sub.layout, res.x);
    record(t, pt.w, pt.r, res.reduced_accuracy ? "optimal-reduced" : "optimal", res.newton_steps, elapsed_ms(t0));
    const double psi = sol.log.records.back().psi;
    w = pt.w;
    r = pt.r;
    if (psi < sol.psi) {
      sol.psi = psi;
      sol.w = std::move(pt.w);
      sol.r = std::move(pt.r);
      sol.gamma = std::move(pt.gamma);
    }
    if (std::abs(psi - prev) <= opts.epsilon_rel * std::max(1.0, std::abs(prev))) {
      sol.converged = true;
      break;
    }
    prev = psi;
  }
  sol.feasibility = check_feasibility(sol.w, sol.r, h, s, config, noise_w, 1e-6);
  return sol;
}

StationarityReport stationarity_check(const Solution& sol, const ChannelState& h, const RsmaStructure& s,
                                      const SystemConfig& config, double noise_w, double tol,
                                      const conic::SolverSettings& solver) {
  StationarityReport rep;
  const double psi = objective_psi(sol.w, sol.r, config);
  const AuxVariables u = update_aux(sol.w, h, s, noise_w);
  const Subproblem sub = build_subproblem(h, s, u, config, noise_w);
  const SubproblemPoint start = interior_start(sol.w, sol.r, sub.layout, h, s, config, noise_w);
  const auto res = conic::solve(sub.program, solver, encode_point(sub, start, config));
  if (res.status == conic::SolverStatus::kOptimal) {
    const auto pt = decode_point(sub.layout, res.x);
    rep.psi_change = std::abs(objective_psi(pt.w, pt.r, config) - psi) / std::max(1.0, std::abs(psi));
  } else {
    rep.psi_change = std::numeric_limits<double>::infinity();
  }
  rep.fixed_point = rep.psi_change <= tol;

  // Lemma-1 tightness on streams whose rate-log row binds.
  const SinrAuxiliaries truth = true_sinrs(sol.w, h, s, noise_w);
  const double tau = config.bandwidth_mhz;
  auto check = [&](double rate, double gamma, double actual) {
    if (rate <= 0.0) return;
    if (shannon_rate_mbps(gamma, tau) - rate > 1e-6 * std::max(1.0, rate)) return;
    ++rep.binding_streams;
    rep.sinr_gap = std::max(rep.sinr_gap, std::abs(gamma - actual) / std::max(1.0, actual));
  };
  const int nk = s.num_users();
  for (int k = 0; k < nk; ++k) {
    check(sol.r.private_rate[static_cast<std::size_t>(k)], sol.gamma.private_sinr[static_cast<std::size_t>(k)],
          truth.private_sinr[static_cast<std::size_t>(k)]);
  }
  for (int i = 0; i < nk; ++i) {
    if (!s.has_common_stream(i)) continue;
    const double rate = s.common_mode == CommonMode::kSharedSingle
                            ? std::accumulate(sol.r.common_rate.begin(), sol.r.common_rate.end(), 0.0)
                            : sol.r.common_rate[static_cast<std::size_t>(i)];
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      check(rate, sol.gamma.common_sinr(i, k), truth.common_sinr(i, k));
    }
  }
  rep.tight = rep.sinr_gap <= tol;
  return rep;
}

}  // namespace rsma
