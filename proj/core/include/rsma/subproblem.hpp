#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "rsma/aux.hpp"
#include "rsma/conic_program.hpp"
#include "rsma/metrics.hpp"
#include "rsma/netmodel.hpp"
#include "rsma/structure.hpp"

namespace rsma {

// Where each quantity of the per-iteration convex program lives in the
// variable vector. Index -1 means "not a variable, fixed at zero": masked
// precoder entries, and streams whose auxiliary variable vanished (the QT row
// then forces their SINR and rate to zero).
struct SubproblemLayout {
  int num_users = 0;
  int aggregate_dim = 0;
  // [user][entry] indices of Re / Im parts of w_k^p and w_i^c.
  std::vector<std::vector<int>> private_re, private_im;
  std::vector<std::vector<int>> common_re, common_im;
  std::vector<int> private_rate;
  std::vector<int> common_rate;  // per owner, or per-user share under kSharedSingle
  std::vector<int> private_gamma;
  Eigen::MatrixXi common_gamma;  // (owner i, decoder k)
  int mse_epigraph = -1;
  int power_epigraph = -1;

  // Complex precoder entries + rates + SINR auxiliaries.
  int core_variable_count = 0;
  int complex_precoder_entries = 0;
  int rate_variables = 0;
  int gamma_variables = 0;

  // Channels enter the program divided by sigma so the noise term is 1.
  double channel_scale = 1.0;
};

struct Subproblem {
  conic::ConicProgram program;
  SubproblemLayout layout;
};

// exp((ln 2) r / tau) <= 1 + gamma as the exponential-cone membership
// (ln2 * r / tau, 1, 1 + gamma).
conic::ConeBlock encode_rate_log(const conic::AffineExpr& rate, const conic::AffineExpr& gamma, double tau_mhz);

// Affine Re / Im parts of h^H w over the variables of one precoder.
std::pair<conic::AffineExpr, conic::AffineExpr> inner_product_rows(const Eigen::VectorXcd& h,
                                                                   const std::vector<int>& re,
                                                                   const std::vector<int>& im);

// g^p(w, gamma) <= 0 for user k as a rotated second-order cone:
//   |u|^2 sum_j |h^H w_j|^2 <= 2 Re{u h^H w_k} - gamma - |u|^2 sigma^2.
// `u_scaled` is u * sigma and `h_scaled` the channel divided by sigma.
conic::ConeBlock encode_qt_private(const SubproblemLayout& layout, int k, std::complex<double> u_scaled,
                                   const ChannelState& h_scaled, const RsmaStructure& s);
conic::ConeBlock encode_qt_common(const SubproblemLayout& layout, int i, int k, std::complex<double> u_scaled,
                                  const ChannelState& h_scaled, const RsmaStructure& s);

// Assembles the convex program for fixed auxiliaries: epigraph objective,
// fronthaul rows, per-BS power cones, rate-log cones and QT rows.
// Throws std::invalid_argument on dimension mismatch.
Subproblem build_subproblem(const ChannelState& h, const RsmaStructure& s, const AuxVariables& u,
                            const SystemConfig& config, double noise_w);

struct SubproblemPoint {
  PrecoderSet w;
  RateAllocation r;
  SinrAuxiliaries gamma;
};

Eigen::VectorXd encode_point(const Subproblem& sub, const SubproblemPoint& point, const SystemConfig& config);
SubproblemPoint decode_point(const SubproblemLayout& layout, const Eigen::VectorXd& x);

// Treated as zero when |u| * sigma falls below this.
inline constexpr double kFrozenAuxThreshold = 1e-12;

}  // namespace rsma
