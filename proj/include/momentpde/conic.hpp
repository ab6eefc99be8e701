#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace momentpde {

/// One equality row of A s = b, with an audit tag naming the generating
/// constraint family and test monomial.
struct SparseRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  double rhs = 0.0;
  std::string tag;
};

/// One PSD block of the cone: a linear map s -> symmetric matrix given by
/// per-variable sparse symmetric coefficient matrices.
struct ConicBlock {
  struct Entry {
    int r, c;     // r <= c
    double coef;
  };
  int size = 0;
  std::string name;
  std::vector<int> vars;                     // global column indices
  std::vector<std::vector<Entry>> entries;   // parallel to vars
  std::vector<Entry> constant;               // subtracted affine part

  /// Assemble the block matrix sum_i s_i F_i - C0 at a point s.
  Eigen::MatrixXd at(const Eigen::VectorXd& s) const;
  /// Linear part only (for directions): sum_i v_i F_i.
  Eigen::MatrixXd linear_at(const Eigen::VectorXd& v) const;
};

/// Linear conic problem in LMI form:
///   minimize  c' s   subject to  A s = b,  M_j(s) PSD for every block j,
/// with s free. Maximization is handled by the callers negating c.
struct ConicProblem {
  int nvars = 0;
  std::vector<SparseRow> rows;
  Eigen::VectorXd c;
  std::vector<ConicBlock> blocks;
  std::vector<std::string> var_names;  // optional labels for audit output

  int total_psd_dim() const;
};

struct ResidualReport {
  double max_equality_residual = 0.0;
  double min_block_eigenvalue = 0.0;
  double objective = 0.0;
  int worst_row = -1;
  std::string worst_row_tag;
};

/// Equality residuals, per-block minimum eigenvalue and objective at s.
ResidualReport check_solution(const ConicProblem& p, const Eigen::VectorXd& s);

/// Row presolve: exact-duplicate removal followed by a numerical rank
/// filter (modified Gram-Schmidt). Returns the indices of kept rows;
/// `inconsistent` is set when a dependent row's right-hand side disagrees
/// with the kept rows beyond tolerance.
std::vector<int> presolve_rows(const std::vector<SparseRow>& rows, int nvars,
                               double tol, bool* inconsistent);

}  // namespace momentpde
