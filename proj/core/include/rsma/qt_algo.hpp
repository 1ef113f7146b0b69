#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsma/aux.hpp"
#include "rsma/metrics.hpp"
#include "rsma/netmodel.hpp"
#include "rsma/solver.hpp"
#include "rsma/structure.hpp"

namespace rsma {

enum class InitMode { kMrt, kRandom };

std::string to_string(InitMode m);
InitMode init_mode_from_string(const std::string& s);

// Thrown when the first subproblem is infeasible from the initial precoders.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QtOptions {
  double epsilon_rel = 1e-4;
  int max_iterations = 50;
  InitMode init = InitMode::kMrt;
  std::uint64_t init_seed = 0;  // random mode only
  conic::SolverSettings solver;
};

struct IterateRecord {
  int iteration = 0;  // 0 is the initial point
  double psi = 0.0;
  double mse = 0.0;
  double power_w = 0.0;
  std::string status;
  int solver_steps = 0;  // Newton steps, both phases
  double wall_ms = 0.0;
};

struct IterateLog {
  std::vector<IterateRecord> records;

  // Largest increase psi_t - psi_{t-1} normalized by max(1, |psi_{t-1}|).
  double worst_ascent() const;
  void write_csv(std::ostream& out, bool include_timing = true) const;
};

struct Solution {
  PrecoderSet w;
  RateAllocation r;
  SinrAuxiliaries gamma;
  IterateLog log;
  FeasibilityReport feasibility;
  double psi = 0.0;
  int iterations = 0;  // subproblem solves
  bool converged = false;
  bool degraded = false;  // a solve failed and an earlier iterate was kept
};

// Each BS splits P_max uniformly over the streams it transmits; the per-stream
// block is h_{b,k} / ||h_{b,k}|| (mrt) or a normalized CN(0, I) draw (random).
// The super-common stream of SCM points at the sum of its decoders' normalized
// channels.
PrecoderSet init_precoders(const ChannelState& h, const RsmaStructure& s, const SystemConfig& config,
                           InitMode mode, std::uint64_t seed = 0);

// u_k^p = (w_k^p)^H h_k / (sigma^2 + I_k^p), u_{i,k}^c likewise.
AuxVariables update_aux(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w);

// Exact SINRs in the SinrAuxiliaries layout.
SinrAuxiliaries true_sinrs(const PrecoderSet& w, const ChannelState& h, const RsmaStructure& s, double noise_w);

Solution run(const SystemConfig& config, const ChannelState& h, const RsmaStructure& s, double noise_w,
             const QtOptions& opts = {});

struct StationarityReport {
  double psi_change = 0.0;  // relative, after one more aux update + solve
  double sinr_gap = 0.0;    // worst relative |gamma - Gamma| on binding rate rows
  int binding_streams = 0;
  bool fixed_point = false;
  bool tight = false;
  bool passed() const { return fixed_point && tight; }
};

StationarityReport stationarity_check(const Solution& sol, const ChannelState& h, const RsmaStructure& s,
                                      const SystemConfig& config, double noise_w, double tol,
                                      const conic::SolverSettings& solver = {});

}  // namespace rsma
