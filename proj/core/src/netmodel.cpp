#include "rsma/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace rsma {

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::kHigh:
      return "HI";
    case Criticality::kMedium:
      return "ME";
    case Criticality::kLow:
      return "LO";
  }
  return "?";
}

Criticality criticality_from_string(const std::string& s) {
  if (s == "HI") return Criticality::kHigh;
  if (s == "ME") return Criticality::kMedium;
  if (s == "LO") return Criticality::kLow;
  throw ConfigError("unknown criticality level '" + s + "' (expected HI, ME or LO)");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double CriticalityRates::rate(Criticality c) const {
  switch (c) {
    case Criticality::kHigh:
      return high_mbps;
    case Criticality::kMedium:
      return medium_mbps;
    case Criticality::kLow:
      return low_mbps;
  }
  return 0.0;
}

void SystemConfig::validate() const {
  if (num_bs < 1) throw ConfigError("num_bs must be >= 1");
  if (num_users < 1) throw ConfigError("num_users must be >= 1");
  if (antennas_per_bs < 1) throw ConfigError("antennas_per_bs must be >= 1");
  if (!(fronthaul_capacity_mbps > 0.0)) throw ConfigError("fronthaul_capacity_mbps must be > 0");
  if (!(bandwidth_mhz > 0.0)) throw ConfigError("bandwidth_mhz must be > 0");
  if (!(area_side_m > 0.0)) throw ConfigError("area_side_m must be > 0");
  if (!std::isfinite(max_power_dbm)) throw ConfigError("max_power_dbm must be finite");
  if (!std::isfinite(circuit_power_dbm)) throw ConfigError("circuit_power_dbm must be finite");
  if (!std::isfinite(noise_psd_dbm_hz)) throw ConfigError("noise_psd_dbm_hz must be finite");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (channel.shadowing_std_db < 0.0) throw ConfigError("shadowing_std_db must be >= 0");
  if (!(channel.min_distance_m >= 0.0)) throw ConfigError("min_distance_m must be >= 0");
  if (!(level_rates.high_mbps >= level_rates.medium_mbps &&
        level_rates.medium_mbps >= level_rates.low_mbps && level_rates.low_mbps >= 0.0)) {
    throw ConfigError("criticality level rates must satisfy HI >= ME >= LO >= 0");
  }
  const auto k = static_cast<std::size_t>(num_users);
  if (!criticality_levels.empty() && criticality_levels.size() != k) {
    throw ConfigError("criticality_levels must list one level per user");
  }
  if (!desired_rates_mbps.empty()) {
    if (desired_rates_mbps.size() != k) {
      throw ConfigError("desired_rates_mbps must list one rate per user");
    }
    for (double r : desired_rates_mbps) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("desired rates must be finite and >= 0");
    }
  }
  if (!criticality_levels.empty() && !desired_rates_mbps.empty()) {
    // A user tagged more critical never asks for less than a less critical one.
    auto rank = [](Criticality c) { return c == Criticality::kHigh ? 2 : c == Criticality::kMedium ? 1 : 0; };
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (rank(criticality_levels[a]) > rank(criticality_levels[b]) &&
            desired_rates_mbps[a] < desired_rates_mbps[b]) {
          throw ConfigError("desired rates inconsistent with criticality levels");
        }
      }
    }
  }
}

SystemConfig paper_scale_config() { return SystemConfig{}; }

SystemConfig desk_scale_config() {
  SystemConfig c;
  c.num_bs = 4;
  c.num_users = 6;
  c.antennas_per_bs = 2;
  return c;
}

SystemConfig resolve_demands(SystemConfig config, RandomStream rng) {
  const int k = config.num_users;
  if (config.criticality_levels.empty()) {
    const int n_hi = static_cast<int>(std::lround(k * 4.0 / 16.0));
    const int n_me = std::min(k - n_hi, static_cast<int>(std::lround(k * 6.0 / 16.0)));
    std::vector<Criticality> levels;
    levels.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      levels.push_back(i < n_hi ? Criticality::kHigh
                                : i < n_hi + n_me ? Criticality::kMedium : Criticality::kLow);
    }
    if (config.desired_rates_mbps.empty()) {
      // Fisher-Yates with our own uniform draws (std::shuffle is not portable).
      for (int i = k - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(levels[static_cast<std::size_t>(i)], levels[static_cast<std::size_t>(j)]);
      }
      config.criticality_levels = std::move(levels);
    } else {
      // Explicit rates: the highest rates take the highest levels.
      std::vector<std::size_t> order(static_cast<std::size_t>(k));
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&config](std::size_t a, std::size_t b) {
        return config.desired_rates_mbps[a] > config.desired_rates_mbps[b];
      });
      config.criticality_levels.assign(static_cast<std::size_t>(k), Criticality::kLow);
      for (std::size_t i = 0; i < order.size(); ++i) config.criticality_levels[order[i]] = levels[i];
    }
  }
  if (config.desired_rates_mbps.empty()) {
    config.desired_rates_mbps.reserve(static_cast<std::size_t>(k));
    for (Criticality c : config.criticality_levels) {
      config.desired_rates_mbps.push_back(config.level_rates.rate(c));
    }
  }
  return config;
}

void to_json(nlohmann::json& j, const SystemConfig& c) {
  std::vector<std::string> levels;
  for (Criticality l : c.criticality_levels) levels.push_back(to_string(l));
  j = nlohmann::json{
      {"num_bs", c.num_bs},
      {"num_users", c.num_users},
      {"antennas_per_bs", c.antennas_per_bs},
      {"fronthaul_capacity_mbps", c.fronthaul_capacity_mbps},
      {"max_power_dbm", c.max_power_dbm},
      {"bandwidth_mhz", c.bandwidth_mhz},
      {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
      {"area_side_m", c.area_side_m},
      {"alpha", c.alpha},
      {"circuit_power_dbm", c.circuit_power_dbm},
      {"seed", c.seed},
      {"level_rates_mbps", {{"HI", c.level_rates.high_mbps},
                            {"ME", c.level_rates.medium_mbps},
                            {"LO", c.level_rates.low_mbps}}},
      {"criticality_levels", levels},
      {"desired_rates_mbps", c.desired_rates_mbps},
      {"channel", {{"shadowing_std_db", c.channel.shadowing_std_db},
                   {"min_distance_m", c.channel.min_distance_m},
                   {"fading", c.channel.fading == FadingModel::kRayleigh ? "rayleigh" : "unit"}}},
  };
}

void from_json(const nlohmann::json& j, SystemConfig& c) {
  if (!j.is_object()) throw ConfigError("system config must be an object");
  auto get = [&j](const char* key, auto& out) {
    if (j.contains(key)) j.at(key).get_to(out);
  };
  get("num_bs", c.num_bs);
  get("num_users", c.num_users);
  get("antennas_per_bs", c.antennas_per_bs);
  get("fronthaul_capacity_mbps", c.fronthaul_capacity_mbps);
  get("max_power_dbm", c.max_power_dbm);
  get("bandwidth_mhz", c.bandwidth_mhz);
  get("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  get("area_side_m", c.area_side_m);
  get("alpha", c.alpha);
  get("circuit_power_dbm", c.circuit_power_dbm);
  get("seed", c.seed);
  if (j.contains("level_rates_mbps")) {
    const auto& lr = j.at("level_rates_mbps");
    if (lr.contains("HI")) lr.at("HI").get_to(c.level_rates.high_mbps);
    if (lr.contains("ME")) lr.at("ME").get_to(c.level_rates.medium_mbps);
    if (lr.contains("LO")) lr.at("LO").get_to(c.level_rates.low_mbps);
  }
  if (j.contains("criticality_levels")) {
    c.criticality_levels.clear();
    for (const auto& s : j.at("criticality_levels")) {
      c.criticality_levels.push_back(criticality_from_string(s.get<std::string>()));
    }
  }
  get("desired_rates_mbps", c.desired_rates_mbps);
  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    if (ch.contains("shadowing_std_db")) ch.at("shadowing_std_db").get_to(c.channel.shadowing_std_db);
    if (ch.contains("min_distance_m")) ch.at("min_distance_m").get_to(c.channel.min_distance_m);
    if (ch.contains("fading")) {
      const auto f = ch.at("fading").get<std::string>();
      if (f == "rayleigh") {
        c.channel.fading = FadingModel::kRayleigh;
      } else if (f == "unit") {
        c.channel.fading = FadingModel::kUnit;
      } else {
        throw ConfigError("unknown fading model '" + f + "'");
      }
    }
  }
}

ChannelState::ChannelState(int num_bs, int num_users, int antennas, std::vector<Eigen::VectorXcd> links)
    : num_bs_(num_bs), num_users_(num_users), antennas_(antennas), links_(std::move(links)) {
  if (links_.size() != static_cast<std::size_t>(num_bs) * static_cast<std::size_t>(num_users)) {
    throw std::invalid_argument("ChannelState: expected B*K link vectors");
  }
  aggregate_.reserve(static_cast<std::size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    Eigen::VectorXcd agg(num_bs * antennas);
    for (int b = 0; b < num_bs; ++b) {
      const auto& l = links_[index(b, k)];
      if (l.size() != antennas) throw std::invalid_argument("ChannelState: link length != L");
      agg.segment(b * antennas, antennas) = l;
    }
    aggregate_.push_back(std::move(agg));
  }
}

ChannelState ChannelState::scaled(double factor) const {
  std::vector<Eigen::VectorXcd> links = links_;
  for (auto& l : links) l *= factor;
  return ChannelState(num_bs_, num_users_, antennas_, std::move(links));
}

Topology place_nodes(const SystemConfig& config, RandomStream rng) {
  const double side = config.area_side_m;
  Topology t;
  t.bs_positions.resize(config.num_bs, 2);
  t.user_positions.resize(config.num_users, 2);
  for (int b = 0; b < config.num_bs; ++b) {
    t.bs_positions(b, 0) = rng.uniform(0.0, side);
    t.bs_positions(b, 1) = rng.uniform(0.0, side);
  }
  for (int k = 0; k < config.num_users; ++k) {
    t.user_positions(k, 0) = rng.uniform(0.0, side);
    t.user_positions(k, 1) = rng.uniform(0.0, side);
  }
  t.distances.resize(config.num_bs, config.num_users);
  for (int b = 0; b < config.num_bs; ++b) {
    for (int k = 0; k < config.num_users; ++k) {
      t.distances(b, k) = (t.bs_positions.row(b) - t.user_positions.row(k)).norm();
    }
  }
  return t;
}

double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

ChannelState draw_channel(const SystemConfig& config, const Topology& topology, RandomStream rng) {
  const int nb = config.num_bs;
  const int nk = config.num_users;
  const int nl = config.antennas_per_bs;
  RandomStream shadow_rng = rng.split("shadowing");
  RandomStream fading_rng = rng.split("fading");
  std::vector<Eigen::VectorXcd> links;
  links.reserve(static_cast<std::size_t>(nb * nk));
  for (int b = 0; b < nb; ++b) {
    for (int k = 0; k < nk; ++k) {
      const double d = std::max(topology.distances(b, k), config.channel.min_distance_m);
      const double shadow_db =
          config.channel.shadowing_std_db > 0.0 ? shadow_rng.normal(0.0, config.channel.shadowing_std_db) : 0.0;
      const double amplitude = std::pow(10.0, -(path_loss_db(d) + shadow_db) / 20.0);
      Eigen::VectorXcd h(nl);
      for (int l = 0; l < nl; ++l) {
        const std::complex<double> g =
            config.channel.fading == FadingModel::kRayleigh ? fading_rng.complex_normal(1.0)
                                                            : std::complex<double>(1.0, 0.0);
        h(l) = amplitude * g;
      }
      links.push_back(std::move(h));
    }
  }
  return ChannelState(nb, nk, nl, std::move(links));
}

double noise_power_w(const SystemConfig& config) {
  const double dbm = config.noise_psd_dbm_hz + 10.0 * std::log10(config.bandwidth_mhz * 1e6);
  return dbm_to_watts(dbm);
}

double noise_psd_for_snr(const SystemConfig& config, double snr_db) {
  return config.max_power_dbm - snr_db - 10.0 * std::log10(config.bandwidth_mhz * 1e6);
}

Scenario make_scenario(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  RandomStream root(seed);
  SystemConfig resolved = resolve_demands(config, root.split("demands"));
  resolved.seed = seed;
  resolved.validate();
  Topology topo = place_nodes(resolved, root.split("placement"));
  ChannelState channel = draw_channel(resolved, topo, root.split("channel"));
  const double sigma2 = noise_power_w(resolved);
  return Scenario{std::move(resolved), std::move(topo), std::move(channel), sigma2};
}

}  // namespace rsma
