#include "rsma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rsma/csv.hpp"

namespace rsma {

PrecoderSet PrecoderSet::zeros(int num_users, int aggregate_dim) {
  PrecoderSet w;
  w.w_private.assign(static_cast<std::size_t>(num_users), Eigen::VectorXcd::Zero(aggregate_dim));
  w.w_common.assign(static_cast<std::size_t>(num_users), Eigen::VectorXcd::Zero(aggregate_dim));
  return w;
}

double PrecoderSet::masking_violation(const ClusterSets& clusters, int antennas) const {
  double worst = 0.0;
  for (int b = 0; b < clusters.num_bs(); ++b) {
    for (int k = 0; k < num_users(); ++k) {
      if (!clusters.serves_private(b, k)) {
        worst = std::max(worst, w_private[static_cast<std::size_t>(k)].segment(b * antennas, antennas).cwiseAbs().maxCoeff());
      }
      if (!clusters.serves_common(b, k)) {
        worst = std::max(worst, w_common[static_cast<std::size_t>(k)].segment(b * antennas, antennas).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

RateAllocation RateAllocation::zeros(int num_users) {
  RateAllocation r;
  r.private_rate.assign(static_cast<std::size_t>(num_users), 0.0);
  r.common_rate.assign(static_cast<std::size_t>(num_users), 0.0);
  return r;
}

double RateAllocation::total(int k) const {
  return private_rate[static_cast<std::size_t>(k)] + common_rate[static_cast<std::size_t>(k)];
}

double RateAllocation::sum() const {
  return std::accumulate(private_rate.begin(), private_rate.end(), 0.0) +
         std::accumulate(common_rate.begin(), common_rate.end(), 0.0);
}

double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w) {
  return std::norm(h.dot(w));  // Eigen's dot conjugates the left operand: h^H w
}

namespace {

double interference(int k, const InterferenceSet& set, const PrecoderSet& w, const ChannelState& h) {
  const auto& hk = h.aggregate(k);
  double acc = 0.0;
  for (int j : set.private_streams) acc += received_power(hk, w.w_private[static_cast<std::size_t>(j)]);
  for (int l : set.common_streams) acc += received_power(hk, w.w_common[static_cast<std::size_t>(l)]);
  return acc;
}

}  // namespace

double sinr_private(int k, const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w) {
  const double signal = received_power(h.aggregate(k), w.w_private[static_cast<std::size_t>(k)]);
  return signal / (interference(k, private_interference(s, k), w, h) + noise_w);
}

double sinr_common(int i, int k, const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s,
                   double noise_w) {
  const auto set = common_interference(s, i, k);  // validates i in I_k
  const double signal = received_power(h.aggregate(k), w.w_common[static_cast<std::size_t>(i)]);
  return signal / (interference(k, set, w, h) + noise_w);
}

double shannon_rate_mbps(double sinr, double bandwidth_mhz) { return bandwidth_mhz * std::log2(1.0 + sinr); }

AchievableRates achievable_rates(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s,
                                 const SystemConfig& config, double noise_w) {
  const int nk = s.num_users();
  AchievableRates out;
  out.private_mbps.resize(static_cast<std::size_t>(nk));
  out.common_per_decoder.assign(static_cast<std::size_t>(nk), {});
  out.common_min_mbps.assign(static_cast<std::size_t>(nk), 0.0);
  for (int k = 0; k < nk; ++k) {
    out.private_mbps[static_cast<std::size_t>(k)] =
        shannon_rate_mbps(sinr_private(k, w, h, s, noise_w), config.bandwidth_mhz);
  }
  for (int i = 0; i < nk; ++i) {
    if (!s.has_common_stream(i)) continue;
    double lowest = std::numeric_limits<double>::infinity();
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      const double rate = shannon_rate_mbps(sinr_common(i, k, w, h, s, noise_w), config.bandwidth_mhz);
      out.common_per_decoder[static_cast<std::size_t>(i)].emplace_back(k, rate);
      lowest = std::min(lowest, rate);
    }
    out.common_min_mbps[static_cast<std::size_t>(i)] = lowest;
  }
  return out;
}

double fronthaul_usage(int b, const RateAllocation& r, const ClusterSets& clusters) {
  double acc = 0.0;
  for (int k : clusters.private_clusters[static_cast<std::size_t>(b)]) acc += r.private_rate[static_cast<std::size_t>(k)];
  for (int k : clusters.common_clusters[static_cast<std::size_t>(b)]) acc += r.common_rate[static_cast<std::size_t>(k)];
  return acc;
}

double transmit_power(int b, const PrecoderSet& w, const ClusterSets& clusters, int antennas) {
  double acc = 0.0;
  for (int k : clusters.private_clusters[static_cast<std::size_t>(b)]) {
    acc += w.w_private[static_cast<std::size_t>(k)].segment(b * antennas, antennas).squaredNorm();
  }
  for (int k : clusters.common_clusters[static_cast<std::size_t>(b)]) {
    acc += w.w_common[static_cast<std::size_t>(k)].segment(b * antennas, antennas).squaredNorm();
  }
  return acc;
}

double total_power(const PrecoderSet& w) {
  double acc = 0.0;
  for (const auto& v : w.w_private) acc += v.squaredNorm();
  for (const auto& v : w.w_common) acc += v.squaredNorm();
  return acc;
}

double rate_mse(const RateAllocation& r, const std::vector<double>& desired_mbps) {
  const auto nk = desired_mbps.size();
  if (nk == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    const double gap = r.private_rate[k] + r.common_rate[k] - desired_mbps[k];
    acc += gap * gap;
  }
  return acc / static_cast<double>(nk);
}

double objective_psi(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config) {
  return config.alpha * rate_mse(r, config.desired_rates_mbps) + (1.0 - config.alpha) * total_power(w);
}

double energy_efficiency_phi(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config) {
  return r.sum() / (total_power(w) + config.circuit_power_w());
}

double qt_private_value(int k, std::complex<double> u, double gamma, const PrecoderSet& w,
                        const ChannelState& h, const RsmaStructure& s, double noise_w) {
  const auto& hk = h.aggregate(k);
  const std::complex<double> wh = w.w_private[static_cast<std::size_t>(k)].dot(hk);  // w^H h
  return gamma - 2.0 * std::real(std::conj(u) * wh) +
         std::norm(u) * (noise_w + interference(k, private_interference(s, k), w, h));
}

double qt_common_value(int i, int k, std::complex<double> u, double gamma, const PrecoderSet& w,
                       const ChannelState& h, const RsmaStructure& s, double noise_w) {
  const auto& hk = h.aggregate(k);
  const auto set = common_interference(s, i, k);
  const std::complex<double> wh = w.w_common[static_cast<std::size_t>(i)].dot(hk);
  return gamma - 2.0 * std::real(std::conj(u) * wh) + std::norm(u) * (noise_w + interference(k, set, w, h));
}

double FeasibilityReport::worst() const {
  return std::min({fronthaul_slack, power_slack, private_rate_slack, common_rate_slack, nonnegativity_slack});
}

FeasibilityReport check_feasibility(const PrecoderSet& w, const RateAllocation& r, const ChannelState& h,
                                    const RsmaStructure& s, const SystemConfig& config, double noise_w,
                                    double tol) {
  if (tol < 0.0) throw std::invalid_argument("check_feasibility: tol must be >= 0");
  FeasibilityReport rep;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  rep.fronthaul_slack = rep.power_slack = rep.private_rate_slack = rep.common_rate_slack =
      rep.nonnegativity_slack = kInf;
  const double cap = config.fronthaul_capacity_mbps;
  const double pmax = config.max_power_w();
  for (int b = 0; b < s.num_bs(); ++b) {
    rep.fronthaul_slack = std::min(rep.fronthaul_slack, (cap - fronthaul_usage(b, r, s.clusters)) / cap);
    rep.power_slack =
        std::min(rep.power_slack, (pmax - transmit_power(b, w, s.clusters, config.antennas_per_bs)) / pmax);
  }
  const auto rates = achievable_rates(w, h, s, config, noise_w);
  const int nk = s.num_users();
  for (int k = 0; k < nk; ++k) {
    const double bound = rates.private_mbps[static_cast<std::size_t>(k)];
    rep.private_rate_slack =
        std::min(rep.private_rate_slack, (bound - r.private_rate[static_cast<std::size_t>(k)]) / std::max(1.0, bound));
    rep.nonnegativity_slack = std::min({rep.nonnegativity_slack, r.private_rate[static_cast<std::size_t>(k)],
                                        r.common_rate[static_cast<std::size_t>(k)]});
  }
  for (int i = 0; i < nk; ++i) {
    double used = 0.0;
    if (s.common_mode == CommonMode::kSharedSingle) {
      if (i != 0) continue;
      used = std::accumulate(r.common_rate.begin(), r.common_rate.end(), 0.0);
    } else {
      used = r.common_rate[static_cast<std::size_t>(i)];
    }
    if (!s.has_common_stream(i)) {
      // A slot without a stream can carry no common rate.
      rep.common_rate_slack = std::min(rep.common_rate_slack, -std::abs(used));
      continue;
    }
    for (const auto& [k, bound] : rates.common_per_decoder[static_cast<std::size_t>(i)]) {
      (void)k;
      rep.common_rate_slack = std::min(rep.common_rate_slack, (bound - used) / std::max(1.0, bound));
    }
  }
  auto finite_or_zero = [](double& v) {
    if (!std::isfinite(v)) v = 0.0;
  };
  finite_or_zero(rep.fronthaul_slack);
  finite_or_zero(rep.power_slack);
  finite_or_zero(rep.private_rate_slack);
  finite_or_zero(rep.common_rate_slack);
  finite_or_zero(rep.nonnegativity_slack);
  rep.feasible = rep.worst() >= -tol;
  return rep;
}

SolutionReport make_report(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config,
                           std::uint64_t seed, std::string scheme) {
  SolutionReport rep;
  rep.seed = seed;
  rep.scheme = std::move(scheme);
  rep.mse = rate_mse(r, config.desired_rates_mbps);
  rep.power_w = total_power(w);
  rep.psi = objective_psi(w, r, config);
  rep.phi = energy_efficiency_phi(w, r, config);
  rep.private_rates = r.private_rate;
  rep.common_rates = r.common_rate;
  rep.desired_rates = config.desired_rates_mbps;
  return rep;
}

void to_json(nlohmann::json& j, const SolutionReport& r) {
  j = nlohmann::json{{"seed", r.seed},
                     {"scheme", r.scheme},
                     {"psi", r.psi},
                     {"mse_mbps2", r.mse},
                     {"power_w", r.power_w},
                     {"phi_mbps_per_w", r.phi},
                     {"private_rates_mbps", r.private_rates},
                     {"common_rates_mbps", r.common_rates},
                     {"desired_rates_mbps", r.desired_rates},
                     {"iterations", r.iterations},
                     {"feasible", r.feasible},
                     {"status", r.status}};
}

std::string solution_csv_header() {
  return "seed,scheme,psi,mse,power_w,phi,iterations,status,private_rates,common_rates";
}

std::string to_csv_row(const SolutionReport& r) {
  std::string row = std::to_string(r.seed);
  row += ',' + r.scheme;
  row += ',' + csv::format_number(r.psi);
  row += ',' + csv::format_number(r.mse);
  row += ',' + csv::format_number(r.power_w);
  row += ',' + csv::format_number(r.phi);
  row += ',' + std::to_string(r.iterations);
  row += ',' + r.status;
  row += ',' + csv::join_numbers(r.private_rates);
  row += ',' + csv::join_numbers(r.common_rates);
  return row;
}

}  // namespace rsma
