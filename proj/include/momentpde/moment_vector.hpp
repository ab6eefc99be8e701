#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "momentpde/polynomial.hpp"

namespace momentpde {

/// Graded-lex monomial basis of a space up to degree d (optionally with
/// per-block degree caps), with O(1) lookup from multi-index to position.
/// Built once per (space, d, caps) and shared.
class MonomialTable {
 public:
  MonomialTable(SpacePtr space, int d, std::map<std::string, int> block_caps = {});

  const SpacePtr& space() const { return space_; }
  int d() const { return d_; }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const std::map<std::string, int>& block_caps() const { return caps_; }

  /// Position of a multi-index in the basis, or -1 when it is outside the
  /// truncation (degree too high or a block cap exceeded).
  int index(const MultiIndex& a) const;

 private:
  SpacePtr space_;
  int d_;
  std::map<std::string, int> caps_;
  std::vector<MultiIndex> basis_;
  std::unordered_map<MultiIndex, int, MultiIndexHash> lookup_;
};

using TablePtr = std::shared_ptr<const MonomialTable>;

/// Truncated moment sequence: one real value per basis monomial of the
/// table, in graded-lex order.
struct MomentVector {
  TablePtr table;
  Eigen::VectorXd values;

  MomentVector() = default;
  MomentVector(TablePtr t) : table(std::move(t)) {
    values = Eigen::VectorXd::Zero(table->size());
  }

  double operator()(const MultiIndex& a) const {
    int i = table->index(a);
    if (i < 0) throw std::out_of_range("moment outside truncation");
    return values[i];
  }
  double mass() const { return values.size() > 0 ? values[0] : 0.0; }
};

/// Riesz functional l_s(p) = sum_a c_a s_a.
double riesz(const MomentVector& s, const Polynomial& p);

/// Coefficient vector c with l_s(p) = c' s over the table's basis,
/// zero-padded; throws if p has a monomial outside the truncation.
Eigen::VectorXd riesz_coeffs(const Polynomial& p, const MonomialTable& table);

/// Moment matrix M_d(s) with entries s_{a+b} over the monomial basis of
/// degree d/2 (d even). Exactly symmetric by construction.
Eigen::MatrixXd moment_matrix(const MomentVector& s, int d);

/// Localizing matrix M_d(g, s) with entries sum_c g_c s_{a+b+c} over the
/// basis of degree floor((d - deg g)/2).
Eigen::MatrixXd localizing_matrix(const MomentVector& s, const Polynomial& g,
                                  int d);

/// Row basis used by moment_matrix / localizing_matrix, honoring the
/// moment table's block caps so that every referenced moment exists.
std::vector<MultiIndex> matrix_row_basis(const MonomialTable& table, int d,
                                         int g_degree,
                                         const std::map<std::string, int>& g_block_degrees);

/// Marginal of a moment sequence onto a space with a subset of the
/// variables: keeps moments of monomials not involving dropped variables.
MomentVector marginal(const MomentVector& s, const TablePtr& target);

/// Moments of the Lebesgue measure on a box, truncated per the table
/// (the table's space must be the box's x-space).
MomentVector box_lebesgue_moments(const std::vector<double>& lo,
                                  const std::vector<double>& hi,
                                  const TablePtr& table);

}  // namespace momentpde
