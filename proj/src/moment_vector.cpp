#include "momentpde/moment_vector.hpp"

#include <stdexcept>

#include "momentpde/geometry.hpp"

namespace momentpde {

MonomialTable::MonomialTable(SpacePtr space, int d,
                             std::map<std::string, int> block_caps)
    : space_(std::move(space)), d_(d), caps_(std::move(block_caps)) {
  basis_ = mono_basis_capped(*space_, d_, caps_);
  lookup_.reserve(basis_.size() * 2);
  for (std::size_t i = 0; i < basis_.size(); ++i)
    lookup_[basis_[i]] = static_cast<int>(i);
}

int MonomialTable::index(const MultiIndex& a) const {
  auto it = lookup_.find(a);
  return it == lookup_.end() ? -1 : it->second;
}

double riesz(const MomentVector& s, const Polynomial& p) {
  double v = 0.0;
  for (const auto& [a, c] : p.terms()) {
    int i = s.table->index(a);
    if (i < 0)
      throw std::out_of_range("riesz: polynomial degree exceeds the truncation");
    v += c * s.values[i];
  }
  return v;
}

Eigen::VectorXd riesz_coeffs(const Polynomial& p, const MonomialTable& table) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(table.size());
  for (const auto& [a, coef] : p.terms()) {
    int i = table.index(a);
    if (i < 0)
      throw std::out_of_range("riesz_coeffs: polynomial degree exceeds the truncation");
    c[i] += coef;
  }
  return c;
}

std::vector<MultiIndex> matrix_row_basis(
    const MonomialTable& table, int d, int g_degree,
    const std::map<std::string, int>& g_block_degrees) {
  const int half = (d - g_degree) / 2;
  std::map<std::string, int> caps;
  for (const auto& [bname, cap] : table.block_caps()) {
    auto it = g_block_degrees.find(bname);
    const int gdeg = it == g_block_degrees.end() ? 0 : it->second;
    caps[bname] = (cap - gdeg) / 2;
  }
  return mono_basis_capped(*table.space(), half, caps);
}

namespace {

Eigen::MatrixXd weighted_moment_matrix(const MomentVector& s,
                                       const Polynomial& g, int d) {
  std::map<std::string, int> g_block_degrees;
  for (const auto& b : s.table->space()->blocks())
    g_block_degrees[b.name] = g.degree_in_block(b.name);
  const auto rows = matrix_row_basis(*s.table, d, g.degree(), g_block_degrees);
  const int k = static_cast<int>(rows.size());
  Eigen::MatrixXd M(k, k);
  MultiIndex sum(s.table->space()->dim());
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      double v = 0.0;
      for (const auto& [c, coef] : g.terms()) {
        for (std::size_t t = 0; t < sum.size(); ++t)
          sum[t] = static_cast<std::uint8_t>(rows[i][t] + rows[j][t] + c[t]);
        int idx = s.table->index(sum);
        if (idx < 0)
          throw std::out_of_range("localizing matrix references a moment "
                                  "outside the truncation");
        v += coef * s.values[idx];
      }
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

}  // namespace

Eigen::MatrixXd moment_matrix(const MomentVector& s, int d) {
  if (d % 2 != 0) throw std::invalid_argument("moment_matrix: d must be even");
  return weighted_moment_matrix(
      s, Polynomial::constant(s.table->space(), 1.0), d);
}

Eigen::MatrixXd localizing_matrix(const MomentVector& s, const Polynomial& g,
                                  int d) {
  if (g.degree() > d)
    throw std::invalid_argument("localizing_matrix: deg g exceeds d");
  return weighted_moment_matrix(s, g, d);
}

MomentVector marginal(const MomentVector& s, const TablePtr& target) {
  MomentVector out(target);
  const auto& src_space = *s.table->space();
  const auto& dst_space = *target->space();
  // Map each target variable to its source position.
  std::vector<int> src_of(dst_space.dim());
  for (int v = 0; v < dst_space.dim(); ++v) {
    int sv = src_space.find_var(dst_space.var_name(v));
    if (sv < 0)
      throw std::invalid_argument("marginal: target variable " +
                                  dst_space.var_name(v) +
                                  " absent from the source space");
    src_of[v] = sv;
  }
  MultiIndex lifted(src_space.dim(), 0);
  for (int i = 0; i < target->size(); ++i) {
    const MultiIndex& a = target->basis()[i];
    std::fill(lifted.begin(), lifted.end(), 0);
    for (int v = 0; v < dst_space.dim(); ++v) lifted[src_of[v]] = a[v];
    int idx = s.table->index(lifted);
    if (idx < 0)
      throw std::out_of_range("marginal: moment outside the source truncation");
    out.values[i] = s.values[idx];
  }
  return out;
}

MomentVector box_lebesgue_moments(const std::vector<double>& lo,
                                  const std::vector<double>& hi,
                                  const TablePtr& table) {
  MomentVector out(table);
  for (int i = 0; i < table->size(); ++i)
    out.values[i] = lebesgue_moment(lo, hi, table->basis()[i]);
  return out;
}

}  // namespace momentpde
