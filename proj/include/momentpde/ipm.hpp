#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "momentpde/conic.hpp"

namespace momentpde {

struct SolverOptions {
  double tol_gap = 1e-8;   // relative duality gap
  double tol_feas = 1e-8;  // equality and cone-coupling residuals
  double tol_psd = 1e-9;   // allowed eigenvalue slack on returned blocks
  int max_iter = 200;
  int psd_total_cap = 500;  // sum of block orders
  bool use_corrector = true;
  bool verbose = false;
  // Called once per iteration with (iter, primal, dual, feasibility).
  std::function<void(int, double, double, double)> trace;
};

enum class SolveStatus {
  optimal,
  near_optimal,
  infeasible_certificate,
  unbounded,
  numerical_failure,
};

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // relative duality gap at the returned iterate
  double max_equality_residual = 0.0;
  double min_block_eigenvalue = 0.0;
  double certificate_norm = 0.0;  // for infeasibility certificates
  int iterations = 0;
  int dropped_rows = 0;
  double wall_seconds = 0.0;
  std::string message;

  bool usable() const {
    return status == SolveStatus::optimal || status == SolveStatus::near_optimal;
  }
};

struct SolveResult {
  Eigen::VectorXd s;  // primal point (moment variables)
  Eigen::VectorXd y;  // equality multipliers
  SolveReport report;
};

/// Primal-dual path-following interior-point solve of the LMI-form problem
/// (Nesterov-Todd scaling, Mehrotra predictor-corrector, dense Schur
/// complement). Deterministic: identical inputs give identical iterates.
SolveResult solve(const ConicProblem& problem, const SolverOptions& opts = {});

}  // namespace momentpde
