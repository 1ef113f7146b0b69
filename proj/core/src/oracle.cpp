#include "rsma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rsma/baselines.hpp"
#include "rsma/metrics.hpp"

namespace rsma {

void check_oracle_eligible(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s) {
  auto refuse = [](const std::string& why) { throw OracleRefusal("oracle_grid_search: " + why); };
  if (h.num_bs() > 2 || h.num_users() > 3) refuse("instance too large (needs B <= 2, K <= 3)");
  if (h.antennas() != 1) refuse("needs a single antenna per BS");
  if (config.num_bs != h.num_bs() || config.num_users != h.num_users()) refuse("config and channel disagree");
  if (s.num_users() != h.num_users() || s.num_bs() != h.num_bs()) refuse("structure and channel disagree");
  for (int k = 0; k < h.num_users(); ++k) {
    if (s.clusters.private_serving(k).size() != 1) refuse("every private stream needs exactly one serving BS");
  }
  switch (s.common_mode) {
    case CommonMode::kNone:
      if (s.num_common_streams() != 0) refuse("TIN structure carries common streams");
      break;
    case CommonMode::kSharedSingle:
      if (h.num_bs() != 1) refuse("the single-common structure needs B = 1");
      break;
    case CommonMode::kPerUser:
      refuse("per-user common streams are not supported");
  }
}

std::vector<double> project_onto_polytope(const std::vector<double>& d, const std::vector<std::vector<double>>& a,
                                          const std::vector<double>& b) {
  const int n = static_cast<int>(d.size());
  const int m = static_cast<int>(a.size());
  const Eigen::Map<const Eigen::VectorXd> dv(d.data(), n);
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), m);
  auto feasible = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd r = A * t - bv;
    for (int i = 0; i < m; ++i) {
      if (r(i) > 1e-9 * std::max(1.0, std::abs(bv(i)))) return false;
    }
    return true;
  };

  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> active;
  // Each subset of at most n rows defines a candidate: the projection of d on
  // the affine set where those rows hold with equality.
  auto visit = [&](auto&& self, int from) -> void {
    Eigen::VectorXd t = dv;
    if (!active.empty()) {
      const int s = static_cast<int>(active.size());
      Eigen::MatrixXd as(s, n);
      Eigen::VectorXd bs(s);
      for (int i = 0; i < s; ++i) {
        as.row(i) = A.row(active[static_cast<std::size_t>(i)]);
        bs(i) = bv(active[static_cast<std::size_t>(i)]);
      }
      const Eigen::MatrixXd g = as * as.transpose();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
      const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
      const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
      if (!(dmin > 1e-12 * std::max(1.0, dmax))) return;  // dependent rows; supersets are too
      t = dv - as.transpose() * ldlt.solve(as * dv - bs);
    }
    if (feasible(t)) {
      const double dist = (t - dv).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = t;
      }
    }
    if (static_cast<int>(active.size()) == n) return;
    for (int i = from; i < m; ++i) {
      active.push_back(i);
      self(self, i + 1);
      active.pop_back();
    }
  };
  visit(visit, 0);
  if (best.size() == 0) throw std::domain_error("project_onto_polytope: empty polytope");
  return {best.data(), best.data() + n};
}

namespace {

struct Instance {
  int num_users = 0;
  int num_bs = 0;
  bool has_common = false;
  std::vector<int> bs;                   // serving BS per stream
  std::vector<std::vector<double>> gain;  // gain[j][k] = |h_{bs(j),k}|^2 / sigma^2
  double tau = 0.0;
  double capacity = 0.0;
  double p_max = 0.0;
  double alpha = 0.0;
  std::vector<double> desired;
  std::vector<std::vector<int>> served;  // private users per BS

  int num_streams() const { return static_cast<int>(bs.size()); }
};

Instance make_instance(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s, double noise_w) {
  Instance in;
  in.num_users = h.num_users();
  in.num_bs = h.num_bs();
  in.has_common = s.common_mode == CommonMode::kSharedSingle && s.has_common_stream(0);
  in.tau = config.bandwidth_mhz;
  in.capacity = config.fronthaul_capacity_mbps;
  in.p_max = config.max_power_w();
  in.alpha = config.alpha;
  in.desired = config.desired_rates_mbps;
  in.served.assign(static_cast<std::size_t>(in.num_bs), {});
  auto add_stream = [&](int b) {
    in.bs.push_back(b);
    std::vector<double> g(static_cast<std::size_t>(in.num_users));
    for (int k = 0; k < in.num_users; ++k) {
      g[static_cast<std::size_t>(k)] = std::norm(h.link(b, k)(0)) / noise_w;
    }
    in.gain.push_back(std::move(g));
  };
  for (int k = 0; k < in.num_users; ++k) {
    const int b = s.clusters.private_serving(k).front();
    in.served[static_cast<std::size_t>(b)].push_back(k);
    add_stream(b);
  }
  if (in.has_common) add_stream(0);
  return in;
}

struct Evaluation {
  double psi = 0.0;
  std::vector<double> rates;
};

Evaluation evaluate(const Instance& in, const std::vector<double>& p) {
  const int nk = in.num_users;
  const auto uk = static_cast<std::size_t>(nk);
  std::vector<double> bound(uk);
  double common = std::numeric_limits<double>::infinity();
  for (int k = 0; k < nk; ++k) {
    double interference = 1.0;
    for (int j = 0; j < nk; ++j) {
      if (j != k) interference += in.gain[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(j)];
    }
    const double signal = in.gain[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(k)];
    bound[static_cast<std::size_t>(k)] = in.tau * std::log2(1.0 + signal / interference);
    if (in.has_common) {
      const double c = in.gain[uk][static_cast<std::size_t>(k)] * p[uk] / (interference + signal);
      common = std::min(common, in.tau * std::log2(1.0 + c));
    }
  }

  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (int k = 0; k < nk; ++k) {
    std::vector<double> row(uk, 0.0);
    row[static_cast<std::size_t>(k)] = -1.0;
    a.push_back(row);
    b.push_back(0.0);
  }
  if (in.has_common) {
    for (unsigned mask = 1; mask < (1u << nk); ++mask) {
      std::vector<double> row(uk, 0.0);
      double rhs = common;
      for (int k = 0; k < nk; ++k) {
        if (mask & (1u << k)) {
          row[static_cast<std::size_t>(k)] = 1.0;
          rhs += bound[static_cast<std::size_t>(k)];
        }
      }
      a.push_back(row);
      b.push_back(rhs);
    }
    a.emplace_back(uk, 1.0);
    b.push_back(in.capacity);
  } else {
    for (int k = 0; k < nk; ++k) {
      std::vector<double> row(uk, 0.0);
      row[static_cast<std::size_t>(k)] = 1.0;
      a.push_back(row);
      b.push_back(bound[static_cast<std::size_t>(k)]);
    }
    for (const auto& users : in.served) {
      if (users.empty()) continue;
      std::vector<double> row(uk, 0.0);
      for (int k : users) row[static_cast<std::size_t>(k)] = 1.0;
      a.push_back(row);
      b.push_back(in.capacity);
    }
  }

  Evaluation e;
  e.rates = project_onto_polytope(in.desired, a, b);
  double mse = 0.0;
  for (int k = 0; k < nk; ++k) {
    const double gap = e.rates[static_cast<std::size_t>(k)] - in.desired[static_cast<std::size_t>(k)];
    mse += gap * gap;
  }
  double power = 0.0;
  for (double x : p) power += x;
  e.psi = in.alpha * mse / nk + (1.0 - in.alpha) * power;
  return e;
}

bool within_budget(const Instance& in, const std::vector<double>& p) {
  std::vector<double> used(static_cast<std::size_t>(in.num_bs), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) used[static_cast<std::size_t>(in.bs[j])] += p[j];
  for (double u : used) {
    if (u > in.p_max * (1.0 + 1e-12)) return false;
  }
  return true;
}

int auto_levels(int streams) {
  switch (streams) {
    case 1:
      return 400;
    case 2:
      return 80;
    case 3:
      return 24;
    default:
      return 12;
  }
}

}  // namespace

OracleResult oracle_grid_search(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s,
                                double noise_w, const OracleOptions& opts) {
  check_oracle_eligible(config, h, s);
  if (static_cast<int>(config.desired_rates_mbps.size()) != h.num_users()) {
    throw OracleRefusal("oracle_grid_search: desired rates are not resolved");
  }
  const Instance in = make_instance(config, h, s, noise_w);
  const int ns = in.num_streams();
  const int levels = opts.levels > 0 ? opts.levels : auto_levels(ns);
  if (levels < 2) throw OracleRefusal("oracle_grid_search: needs at least two levels");

  std::vector<double> ladder(static_cast<std::size_t>(levels), 0.0);
  const double lo = std::log(in.p_max * opts.min_fraction);
  const double hi = std::log(in.p_max);
  for (int i = 1; i < levels; ++i) {
    const double f = levels == 2 ? 1.0 : static_cast<double>(i - 1) / (levels - 2);
    ladder[static_cast<std::size_t>(i)] = std::exp(lo + f * (hi - lo));
  }
  const double ratio = levels > 2 ? std::exp((hi - lo) / (levels - 2)) : 2.0;

  OracleResult out;
  out.levels = levels;
  struct Candidate {
    double psi;
    std::vector<int> index;
  };
  std::vector<Candidate> top;
  const auto keep = static_cast<std::size_t>(std::max(1, opts.refine_starts));

  std::vector<int> idx(static_cast<std::size_t>(ns), 0);
  std::vector<double> p(static_cast<std::size_t>(ns), 0.0);
  auto powers_of = [&](const std::vector<int>& ix) {
    std::vector<double> q(ix.size());
    for (std::size_t j = 0; j < ix.size(); ++j) q[j] = ladder[static_cast<std::size_t>(ix[j])];
    return q;
  };
  while (true) {
    p = powers_of(idx);
    if (within_budget(in, p)) {
      const double psi = evaluate(in, p).psi;
      ++out.evaluations;
      if (top.size() < keep || psi < top.back().psi) {
        top.push_back({psi, idx});
        std::sort(top.begin(), top.end(), [](const Candidate& x, const Candidate& y) { return x.psi < y.psi; });
        if (top.size() > keep) top.pop_back();
      }
    }
    int j = 0;
    while (j < ns && ++idx[static_cast<std::size_t>(j)] == levels) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == ns) break;
  }

  out.grid_psi = top.front().psi;
  out.grid_power_w = powers_of(top.front().index);
  for (int j = 0; j < ns; ++j) {
    for (int step : {-1, 1}) {
      std::vector<int> nb = top.front().index;
      nb[static_cast<std::size_t>(j)] += step;
      if (nb[static_cast<std::size_t>(j)] < 0 || nb[static_cast<std::size_t>(j)] >= levels) continue;
      const auto q = powers_of(nb);
      if (!within_budget(in, q)) continue;
      out.resolution_slack = std::max(out.resolution_slack, std::abs(evaluate(in, q).psi - out.grid_psi));
    }
  }

  out.refined_psi = out.grid_psi;
  out.refined_power_w = out.grid_power_w;
  if (opts.refine) {
    const double floor = in.p_max * opts.min_fraction;
    for (const auto& start : top) {
      std::vector<double> x = powers_of(start.index);
      double fx = start.psi;
      double f = ratio;
      auto try_move = [&](std::vector<double> y) {
        if (!within_budget(in, y)) return false;
        const double fy = evaluate(in, y).psi;
        ++out.evaluations;
        if (fy < fx - 1e-15 * std::max(1.0, std::abs(fx))) {
          x = std::move(y);
          fx = fy;
          return true;
        }
        return false;
      };
      while (f - 1.0 > 1e-10) {
        bool moved = false;
        for (int j = 0; j < ns; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          std::vector<double> y = x;
          y[uj] = x[uj] > 0.0 ? x[uj] * f : floor;
          if (try_move(y)) {
            moved = true;
            continue;
          }
          y = x;
          y[uj] = x[uj] / f < floor ? 0.0 : x[uj] / f;
          if (x[uj] > 0.0 && try_move(y)) {
            moved = true;
            continue;
          }
          // Shift power between streams of one BS along the budget face.
          for (int i = 0; i < ns; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (i == j || in.bs[ui] != in.bs[uj] || x[uj] <= 0.0) continue;
            const double delta = x[uj] * (f - 1.0);
            if (x[ui] < delta) continue;
            y = x;
            y[uj] += delta;
            y[ui] -= delta;
            if (try_move(y)) {
              moved = true;
              break;
            }
          }
        }
        if (!moved) f = std::sqrt(f);
      }
      if (fx < out.refined_psi) {
        out.refined_psi = fx;
        out.refined_power_w = x;
      }
    }
  }
  out.refined_rate_mbps = evaluate(in, out.refined_power_w).rates;
  return out;
}

SystemConfig oracle_instance_config() {
  SystemConfig c = desk_scale_config();
  c.num_bs = 1;
  c.num_users = 2;
  c.antennas_per_bs = 1;
  return c;
}

OracleComparison compare_with_oracle(const SystemConfig& config, std::uint64_t seed, const QtOptions& qt,
                                     const OracleOptions& opts) {
  const Scenario sc = make_scenario(config, seed);
  const RsmaStructure s = make_structure({SchemeKind::kTin, {1, 0}, 0}, sc.channel, sc.config);
  OracleComparison cmp;
  cmp.seed = seed;
  cmp.oracle = oracle_grid_search(sc.config, sc.channel, s, sc.noise_power_w, opts);
  const Solution sol = run(sc.config, sc.channel, s, sc.noise_power_w, qt);
  cmp.algorithm_psi = objective_psi(sol.w, sol.r, sc.config);
  return cmp;
}

}  // namespace rsma
