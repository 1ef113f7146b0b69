#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "rsma/conic_program.hpp"

namespace rsma::conic {

struct SolverSettings {
  double feasibility_tol = 1e-8;
  // Stop once the barrier duality-gap bound nu / t falls below
  // relative_gap * max(1, |objective|).
  double relative_gap = 1e-8;
  // Gap accepted (status optimal, reduced_accuracy set) when Newton stalls.
  double acceptable_gap = 1e-6;
  int max_iterations = 500;  // total Newton steps, both phases
  double barrier_growth = 8.0;

  void validate() const;
};

enum class SolverStatus { kOptimal, kInfeasible, kNumericalFailure };

std::string to_string(SolverStatus s);

struct SolverResult {
  SolverStatus status = SolverStatus::kNumericalFailure;
  Eigen::VectorXd x;  // best strictly feasible iterate when one was found
  double objective = 0.0;
  double gap_bound = 0.0;
  int newton_steps = 0;
  int phase1_steps = 0;
  bool reduced_accuracy = false;
};

// Path-following log-barrier method with a phase-I feasibility search.
// `start` is an optional initial guess; it need not be feasible.
SolverResult solve(const ConicProgram& program, const SolverSettings& settings,
                   const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace rsma::conic
