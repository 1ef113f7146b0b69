#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "rsma/rng.hpp"

namespace rsma {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Criticality { kHigh, kMedium, kLow };

std::string to_string(Criticality c);
Criticality criticality_from_string(const std::string& s);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

struct CriticalityRates {
  double high_mbps = 14.0;
  double medium_mbps = 7.0;
  double low_mbps = 3.0;

  double rate(Criticality c) const;
};

enum class FadingModel { kRayleigh, kUnit };

struct ChannelModel {
  double shadowing_std_db = 8.0;
  double min_distance_m = 10.0;
  FadingModel fading = FadingModel::kRayleigh;
};

// All scenario parameters. Powers are configured in dBm, rates in Mbps and the
// bandwidth in MHz, so tau * log2(1 + SINR) is directly in Mbps.
struct SystemConfig {
  int num_bs = 10;
  int num_users = 16;
  int antennas_per_bs = 2;
  double fronthaul_capacity_mbps = 28.0;
  double max_power_dbm = 28.0;
  double bandwidth_mhz = 10.0;
  double noise_psd_dbm_hz = -168.0;
  double area_side_m = 800.0;
  double alpha = 0.5;
  double circuit_power_dbm = 38.0;
  std::uint64_t seed = 1;

  CriticalityRates level_rates;
  // Per-user tags and targets. Empty vectors are filled in by resolve_demands:
  // levels are assigned to random users in the 4:6:6 HI:ME:LO proportion.
  std::vector<Criticality> criticality_levels;
  std::vector<double> desired_rates_mbps;

  ChannelModel channel;

  double max_power_w() const { return dbm_to_watts(max_power_dbm); }
  double circuit_power_w() const { return dbm_to_watts(circuit_power_dbm); }
  int aggregate_dim() const { return num_bs * antennas_per_bs; }

  // Throws ConfigError.
  void validate() const;
};

// The full-size network used in the numerical study (B=10, K=16, L=2).
SystemConfig paper_scale_config();
// Desk-scale network for sweeps and tests (B=4, K=6, L=2).
SystemConfig desk_scale_config();

// Fills criticality_levels / desired_rates_mbps when empty. Deterministic in
// (config, rng).
SystemConfig resolve_demands(SystemConfig config, RandomStream rng);

void to_json(nlohmann::json& j, const SystemConfig& c);
void from_json(const nlohmann::json& j, SystemConfig& c);

struct Topology {
  Eigen::MatrixXd bs_positions;    // B x 2, meters
  Eigen::MatrixXd user_positions;  // K x 2, meters
  Eigen::MatrixXd distances;       // B x K, meters
};

// h_{b,k} in C^L for every BS/user pair, plus the stacked aggregate h_k in
// C^{LB} in BS-index order.
class ChannelState {
 public:
  ChannelState(int num_bs, int num_users, int antennas, std::vector<Eigen::VectorXcd> links);

  int num_bs() const { return num_bs_; }
  int num_users() const { return num_users_; }
  int antennas() const { return antennas_; }
  int aggregate_dim() const { return num_bs_ * antennas_; }

  const Eigen::VectorXcd& link(int b, int k) const { return links_[index(b, k)]; }
  const Eigen::VectorXcd& aggregate(int k) const { return aggregate_[static_cast<std::size_t>(k)]; }

  // Entry-wise scaled copy; used to normalize by the noise amplitude.
  ChannelState scaled(double factor) const;

 private:
  std::size_t index(int b, int k) const {
    return static_cast<std::size_t>(b) * static_cast<std::size_t>(num_users_) +
           static_cast<std::size_t>(k);
  }

  int num_bs_;
  int num_users_;
  int antennas_;
  std::vector<Eigen::VectorXcd> links_;
  std::vector<Eigen::VectorXcd> aggregate_;
};

Topology place_nodes(const SystemConfig& config, RandomStream rng);

// 128.1 + 37.6 log10(d / 1 km). Throws std::domain_error for d <= 0.
double path_loss_db(double distance_m);

// Path loss + per-link log-normal shadowing (shared across the L antennas)
// + i.i.d. CN(0,1) fading per antenna. Distances below
// config.channel.min_distance_m are clamped.
ChannelState draw_channel(const SystemConfig& config, const Topology& topology, RandomStream rng);

// sigma^2 in watts from the noise PSD (dBm/Hz) and bandwidth (MHz).
double noise_power_w(const SystemConfig& config);

// Noise PSD (dBm/Hz) that yields the requested per-BS SNR P_max / sigma^2.
double noise_psd_for_snr(const SystemConfig& config, double snr_db);

struct Scenario {
  SystemConfig config;  // demands resolved
  Topology topology;
  ChannelState channel;
  double noise_power_w;
};

// Demands, placement, shadowing and fading each draw from their own
// sub-stream of `seed`.
Scenario make_scenario(const SystemConfig& config, std::uint64_t seed);

}  // namespace rsma
