#include "momentpde/extract.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace momentpde {

ControllerPolynomial extract(const MomentVector& s_mu, const MomentVector& s_nu,
                             int d, int density_degree, double cutoff_scale) {
  if (!s_mu.table->space()->same_as(*s_nu.table->space()))
    throw std::invalid_argument("extract: moment vectors live on different spaces");
  if (d % 2 != 0) throw std::invalid_argument("extract: d must be even");
  const int deg = density_degree < 0 ? d / 2 : density_degree;
  if (deg < 0 || deg > d / 2)
    throw std::invalid_argument("extract: density degree must lie in [0, d/2]");

  const auto& space = s_mu.table->space();
  const auto basis = mono_basis(*space, deg);
  const int k = static_cast<int>(basis.size());

  Eigen::MatrixXd M(k, k);
  MultiIndex sum(space->dim());
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      for (std::size_t t = 0; t < sum.size(); ++t)
        sum[t] = static_cast<std::uint8_t>(basis[i][t] + basis[j][t]);
      const int idx = s_mu.table->index(sum);
      if (idx < 0)
        throw std::invalid_argument("extract: moment matrix exceeds the truncation");
      M(i, j) = M(j, i) = s_mu.values[idx];
    }
  }
  Eigen::VectorXd rhs(k);
  for (int i = 0; i < k; ++i) {
    const int idx = s_nu.table->index(basis[i]);
    if (idx < 0)
      throw std::invalid_argument("extract: control moments exceed the truncation");
    rhs[i] = s_nu.values[idx];
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (lmax <= 0.0)
    throw std::invalid_argument("extract: the occupation moments are all zero");
  const double cutoff = cutoff_scale * lmax;
  double lmin_used = lmax;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    const double lam = eig.eigenvalues()[i];
    if (lam <= cutoff) continue;
    lmin_used = std::min(lmin_used, lam);
    coef.noalias() +=
        (eig.eigenvectors().col(i).dot(rhs) / lam) * eig.eigenvectors().col(i);
  }

  ControllerPolynomial out;
  out.degree = deg;
  out.source = "mu";
  out.residual = (M * coef - rhs).norm();
  out.cond_estimate = lmax / lmin_used;
  out.kappa = Polynomial(space);
  for (int i = 0; i < k; ++i)
    if (coef[i] != 0.0) out.kappa.add_term(basis[i], coef[i]);
  return out;
}

double SaturatedController::eval(const std::vector<double>& point) const {
  const double v = kappa.eval(point);
  return std::min(hi, std::max(lo, v));
}

SaturatedController saturate(const ControllerPolynomial& k, double lo, double hi) {
  return SaturatedController{k.kappa, lo, hi};
}

}  // namespace momentpde
