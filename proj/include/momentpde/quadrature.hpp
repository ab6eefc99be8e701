#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "momentpde/moment_vector.hpp"

namespace momentpde {

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

using ScalarField = std::function<double(const std::vector<double>&)>;

struct QuadratureOptions {
  int initial_nodes = 8;
  int max_nodes = 256;
  double tol = 1e-10;  // node-doubling convergence threshold
};

/// Moments of the measure obtained by lifting the Lebesgue (or surface)
/// measure on a box through x -> (x, f_1(x), f_2(x), ...).
///
/// The box may have degenerate coordinates (lo == hi), in which case the
/// integration runs over the non-degenerate ones; this covers box faces.
/// Every variable of the table's space must either be one of `x_names`
/// (mapped to the corresponding box coordinate) or have an entry in
/// `fields`. An optional scalar `weight` multiplies the integrand, which is
/// how control measures (density u) are produced.
///
/// The node count doubles until the moments move by less than opts.tol;
/// throws on non-convergence.
MomentVector graph_moments(const TablePtr& table, const std::vector<double>& lo,
                           const std::vector<double>& hi,
                           const std::vector<std::string>& x_names,
                           const std::map<std::string, ScalarField>& fields,
                           const ScalarField& weight = nullptr,
                           const QuadratureOptions& opts = {});

/// Adaptive 1-D Gauss-Legendre with node doubling, for cross-checks.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const QuadratureOptions& opts = {});

}  // namespace momentpde
