#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rsma/netmodel.hpp"
#include "rsma/qt_algo.hpp"
#include "rsma/structure.hpp"

namespace rsma {

class OracleRefusal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Eligible: B <= 2, K <= 3, L = 1, every private stream served by exactly one
// BS, and either TIN or a single super-common stream with B = 1. With L = 1
// only |h w|^2 enters the SINRs, so phases drop out and the search runs over
// stream powers alone.
void check_oracle_eligible(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s);

struct OracleOptions {
  // Levels per stream: 0 plus a log-spaced ladder from P * min_fraction to P.
  // 0 picks a size from the stream count.
  int levels = 0;
  double min_fraction = 1e-6;
  bool refine = true;
  int refine_starts = 4;
};

struct OracleResult {
  double grid_psi = 0.0;
  double refined_psi = 0.0;  // pattern search from the best grid points; <= grid_psi
  // Largest Psi change between the grid argmin and its one-step neighbours.
  double resolution_slack = 0.0;
  // Private streams first, then the common stream when present; watts.
  std::vector<double> grid_power_w;
  std::vector<double> refined_power_w;
  std::vector<double> refined_rate_mbps;  // per-user totals
  int levels = 0;
  long evaluations = 0;
};

// Throws OracleRefusal for ineligible instances.
OracleResult oracle_grid_search(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s,
                                double noise_w, const OracleOptions& opts = {});

// Euclidean projection of d onto {t : A t <= b} by active-set enumeration.
// Exact for the few-variable polytopes used here.
std::vector<double> project_onto_polytope(const std::vector<double>& d, const std::vector<std::vector<double>>& a,
                                          const std::vector<double>& b);

// 1 BS, 2 users, single antenna; everything else from the desk preset.
SystemConfig oracle_instance_config();

struct OracleComparison {
  std::uint64_t seed = 0;
  double algorithm_psi = 0.0;
  OracleResult oracle;
  double ratio() const { return algorithm_psi / oracle.grid_psi; }
};

// TIN on `config` for one seed: the optimizer against the oracle.
OracleComparison compare_with_oracle(const SystemConfig& config, std::uint64_t seed, const QtOptions& qt = {},
                                     const OracleOptions& opts = {});

}  // namespace rsma
