#include "momentpde/conic.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

namespace momentpde {

Eigen::MatrixXd ConicBlock::linear_at(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t l = 0; l < vars.size(); ++l) {
    const double x = v[vars[l]];
    if (x == 0.0) continue;
    for (const Entry& e : entries[l]) {
      M(e.r, e.c) += e.coef * x;
      if (e.r != e.c) M(e.c, e.r) += e.coef * x;
    }
  }
  return M;
}

Eigen::MatrixXd ConicBlock::at(const Eigen::VectorXd& s) const {
  Eigen::MatrixXd M = linear_at(s);
  for (const Entry& e : constant) {
    M(e.r, e.c) -= e.coef;
    if (e.r != e.c) M(e.c, e.r) -= e.coef;
  }
  return M;
}

int ConicProblem::total_psd_dim() const {
  int t = 0;
  for (const auto& b : blocks) t += b.size;
  return t;
}

ResidualReport check_solution(const ConicProblem& p, const Eigen::VectorXd& s) {
  ResidualReport rep;
  rep.objective = p.c.size() == s.size() ? p.c.dot(s) : 0.0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    double v = -p.rows[i].rhs;
    for (const auto& [col, coef] : p.rows[i].terms) v += coef * s[col];
    if (std::abs(v) > rep.max_equality_residual) {
      rep.max_equality_residual = std::abs(v);
      rep.worst_row = static_cast<int>(i);
      rep.worst_row_tag = p.rows[i].tag;
    }
  }
  rep.min_block_eigenvalue = p.blocks.empty() ? 0.0 : 1e300;
  for (const auto& b : p.blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.at(s));
    rep.min_block_eigenvalue =
        std::min(rep.min_block_eigenvalue, eig.eigenvalues().minCoeff());
  }
  return rep;
}

std::vector<int> presolve_rows(const std::vector<SparseRow>& rows, int nvars,
                               double tol, bool* inconsistent) {
  if (inconsistent) *inconsistent = false;

  // Pass 1: drop exact duplicates (bitwise-identical coefficient patterns).
  std::vector<int> candidates;
  {
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string key;
      key.reserve(rows[i].terms.size() * 12 + 8);
      for (const auto& [col, coef] : rows[i].terms) {
        key.append(reinterpret_cast<const char*>(&col), sizeof(col));
        key.append(reinterpret_cast<const char*>(&coef), sizeof(coef));
      }
      key.append(reinterpret_cast<const char*>(&rows[i].rhs), sizeof(double));
      if (seen.emplace(std::move(key), static_cast<int>(i)).second)
        candidates.push_back(static_cast<int>(i));
    }
  }

  // Pass 2: modified Gram-Schmidt rank filter with one re-orthogonalization.
  std::vector<int> kept;
  std::vector<Eigen::VectorXd> basis;       // orthonormal row space basis
  std::vector<double> basis_rhs;            // rhs expressed in the basis
  Eigen::VectorXd v(nvars);
  for (int idx : candidates) {
    v.setZero();
    for (const auto& [col, coef] : rows[idx].terms) v[col] += coef;
    const double orig_norm = v.norm();
    if (orig_norm == 0.0) {
      if (std::abs(rows[idx].rhs) > tol && inconsistent) *inconsistent = true;
      continue;
    }
    double rhs = rows[idx].rhs;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const double proj = basis[k].dot(v);
        v.noalias() -= proj * basis[k];
        rhs -= proj * basis_rhs[k];
      }
    }
    const double res_norm = v.norm();
    if (res_norm <= tol * std::max(1.0, orig_norm)) {
      // Dependent row: verify its rhs is implied by the kept rows.
      if (std::abs(rhs) > 1e3 * tol * std::max(1.0, std::abs(rows[idx].rhs)) &&
          inconsistent)
        *inconsistent = true;
      continue;
    }
    v /= res_norm;
    rhs /= res_norm;
    basis.push_back(v);
    basis_rhs.push_back(rhs);
    kept.push_back(idx);
  }
  return kept;
}

}  // namespace momentpde
