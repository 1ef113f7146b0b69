#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "rsma/netmodel.hpp"
#include "rsma/structure.hpp"

namespace rsma {

// Aggregate precoders w_k^p, w_k^c in C^{LB}, stacked in BS-index order.
struct PrecoderSet {
  std::vector<Eigen::VectorXcd> w_private;
  std::vector<Eigen::VectorXcd> w_common;

  static PrecoderSet zeros(int num_users, int aggregate_dim);
  int num_users() const { return static_cast<int>(w_private.size()); }
  // Largest |entry| on a BS block outside the serving clusters.
  double masking_violation(const ClusterSets& clusters, int antennas) const;
};

// Rates in Mbps. Under CommonMode::kSharedSingle, common_rate[k] is user k's
// share of the super-common stream.
struct RateAllocation {
  std::vector<double> private_rate;
  std::vector<double> common_rate;

  static RateAllocation zeros(int num_users);
  double total(int k) const;
  double sum() const;
};

// |h^H w|^2 over the aggregate vectors.
double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w);

double sinr_private(int k, const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w);
// Throws std::domain_error when i is not in I_k.
double sinr_common(int i, int k, const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s,
                   double noise_w);

struct AchievableRates {
  std::vector<double> private_mbps;
  // Per common stream i: (decoder k, tau log2(1 + Gamma_{i,k}^c)) for k in M_i.
  std::vector<std::vector<std::pair<int, double>>> common_per_decoder;
  // min over decoders; 0 for slots without a stream.
  std::vector<double> common_min_mbps;
};

double shannon_rate_mbps(double sinr, double bandwidth_mhz);

AchievableRates achievable_rates(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s,
                                 const SystemConfig& config, double noise_w);

double fronthaul_usage(int b, const RateAllocation& r, const ClusterSets& clusters);
double transmit_power(int b, const PrecoderSet& w, const ClusterSets& clusters, int antennas);
// sum_k ||w_k^p||^2 + ||w_k^c||^2 in watts.
double total_power(const PrecoderSet& w);
// (1/K) sum_k |r_k - r_k^des|^2 in Mbps^2.
double rate_mse(const RateAllocation& r, const std::vector<double>& desired_mbps);
// alpha * MSE + (1 - alpha) * power. Mixes Mbps^2 and watts on purpose: there
// is no normalization constant.
double objective_psi(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config);
// Sum rate over transmit plus circuit power, Mbps/W.
double energy_efficiency_phi(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config);

// Quadratic-transform surrogates evaluated directly:
//   g^p = gamma - 2 Re{u^* (w_k^p)^H h_k} + |u|^2 [sigma^2 + interference]
// and the common analogue for message i at decoder k.
double qt_private_value(int k, std::complex<double> u, double gamma, const PrecoderSet& w,
                        const ChannelState& h, const RsmaStructure& s, double noise_w);
double qt_common_value(int i, int k, std::complex<double> u, double gamma, const PrecoderSet& w,
                       const ChannelState& h, const RsmaStructure& s, double noise_w);

// Worst normalized slack per constraint family; negative means violated.
// Fronthaul and power slacks are divided by their capacity, rate slacks by
// max(1, bound).
struct FeasibilityReport {
  double fronthaul_slack = 0.0;
  double power_slack = 0.0;
  double private_rate_slack = 0.0;
  double common_rate_slack = 0.0;
  double nonnegativity_slack = 0.0;
  bool feasible = true;

  double worst() const;
};

FeasibilityReport check_feasibility(const PrecoderSet& w, const RateAllocation& r, const ChannelState& h,
                                    const RsmaStructure& s, const SystemConfig& config, double noise_w,
                                    double tol);

struct SolutionReport {
  std::uint64_t seed = 0;
  std::string scheme;
  double psi = 0.0;
  double mse = 0.0;
  double power_w = 0.0;
  double phi = 0.0;
  std::vector<double> private_rates;
  std::vector<double> common_rates;
  std::vector<double> desired_rates;
  int iterations = 0;
  bool feasible = true;
  std::string status;
};

SolutionReport make_report(const PrecoderSet& w, const RateAllocation& r, const SystemConfig& config,
                           std::uint64_t seed, std::string scheme);

void to_json(nlohmann::json& j, const SolutionReport& r);

// Fixed CSV schema for solution reports.
std::string solution_csv_header();
std::string to_csv_row(const SolutionReport& r);

}  // namespace rsma
