#pragma once

#include <functional>
#include <string>

#include "momentpde/moment_vector.hpp"

namespace momentpde {

/// Polynomial feedback law recovered from solved moments by matching the
/// control-measure moments against the occupation-measure moment matrix.
struct ControllerPolynomial {
  Polynomial kappa;  // over the (x, y) space of the matched moments
  int degree = 0;
  std::string source;      // measure the density was matched against
  double residual = 0.0;   // l2 residual of the matching system
  double cond_estimate = 0.0;  // spectrum spread of the moment matrix

  double eval(const std::vector<double>& point) const { return kappa.eval(point); }
};

/// Solve M(s_mu) c = s_nu (truncated to the matching basis) for the density
/// coefficients, exactly when the moment matrix is invertible and in the
/// least-squares sense otherwise (eigenvalue-truncated pseudoinverse with
/// cutoff 1e-9 * lambda_max). Both moment vectors live on the same (x, y)
/// space; d is the relaxation degree and the density degree defaults to d/2.
/// cutoff_scale is the eigenvalue truncation threshold relative to the top
/// eigenvalue; the default matches exact moment input, while moments from an
/// iterative solve warrant a threshold near the solve accuracy.
ControllerPolynomial extract(const MomentVector& s_mu, const MomentVector& s_nu,
                             int d, int density_degree = -1,
                             double cutoff_scale = 1e-9);

/// Pointwise clamp of a feedback law to the declared input box. Applied at
/// simulation time only; reported coefficients stay unclamped.
struct SaturatedController {
  Polynomial kappa;
  double lo = 0.0, hi = 1.0;
  double eval(const std::vector<double>& point) const;
};

SaturatedController saturate(const ControllerPolynomial& k, double lo, double hi);

}  // namespace momentpde
