#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace rsma {

// Quadratic-transform auxiliaries in physical units: u_k^p per user and
// u_{i,k}^c at (owner i, decoder k). Entries for pairs with i not in I_k stay 0.
struct AuxVariables {
  std::vector<std::complex<double>> u_private;
  Eigen::MatrixXcd u_common;

  static AuxVariables zeros(int num_users) {
    return {std::vector<std::complex<double>>(static_cast<std::size_t>(num_users)),
            Eigen::MatrixXcd::Zero(num_users, num_users)};
  }
};

// SINR auxiliaries gamma_k^p and gamma_{i,k}^c (same indexing as AuxVariables).
struct SinrAuxiliaries {
  std::vector<double> private_sinr;
  Eigen::MatrixXd common_sinr;

  static SinrAuxiliaries zeros(int num_users) {
    return {std::vector<double>(static_cast<std::size_t>(num_users), 0.0),
            Eigen::MatrixXd::Zero(num_users, num_users)};
  }
};

}  // namespace rsma
