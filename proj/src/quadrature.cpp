#include "momentpde/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace momentpde {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = 2.0 * half / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

namespace {

Eigen::VectorXd tensor_moments(const MonomialTable& table,
                               const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               const std::vector<int>& coord_of_var,
                               const std::vector<const ScalarField*>& field_of_var,
                               const ScalarField& weight, int q) {
  const int n = static_cast<int>(lo.size());
  std::vector<int> free_dims;
  for (int j = 0; j < n; ++j)
    if (lo[j] != hi[j]) free_dims.push_back(j);
  const int nf = static_cast<int>(free_dims.size());

  std::vector<std::vector<double>> nodes(nf), wts(nf);
  for (int k = 0; k < nf; ++k)
    gauss_legendre(q, lo[free_dims[k]], hi[free_dims[k]], nodes[k], wts[k]);

  const int dim = table.space()->dim();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(table.size());
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) x[j] = lo[j];
  std::vector<double> point(dim);

  std::vector<int> idx(nf, 0);
  long total = 1;
  for (int k = 0; k < nf; ++k) total *= q;
  for (long t = 0; t < total; ++t) {
    long rem = t;
    double w = 1.0;
    for (int k = 0; k < nf; ++k) {
      int i = static_cast<int>(rem % q);
      rem /= q;
      x[free_dims[k]] = nodes[k][i];
      w *= wts[k][i];
    }
    for (int v = 0; v < dim; ++v)
      point[v] = coord_of_var[v] >= 0 ? x[coord_of_var[v]]
                                      : (*field_of_var[v])(x);
    if (weight) w *= weight(x);
    for (int i = 0; i < table.size(); ++i) {
      const MultiIndex& a = table.basis()[i];
      double m = w;
      for (int v = 0; v < dim; ++v)
        for (int e = 0; e < a[v]; ++e) m *= point[v];
      acc[i] += m;
    }
  }
  return acc;
}

}  // namespace

MomentVector graph_moments(const TablePtr& table, const std::vector<double>& lo,
                           const std::vector<double>& hi,
                           const std::vector<std::string>& x_names,
                           const std::map<std::string, ScalarField>& fields,
                           const ScalarField& weight,
                           const QuadratureOptions& opts) {
  const auto& space = *table->space();
  const int dim = space.dim();
  std::vector<int> coord_of_var(dim, -1);
  std::vector<const ScalarField*> field_of_var(dim, nullptr);
  for (int v = 0; v < dim; ++v) {
    const std::string& name = space.var_name(v);
    bool found = false;
    for (std::size_t j = 0; j < x_names.size(); ++j) {
      if (x_names[j] == name) {
        coord_of_var[v] = static_cast<int>(j);
        found = true;
        break;
      }
    }
    if (found) continue;
    auto it = fields.find(name);
    if (it == fields.end())
      throw std::invalid_argument("graph_moments: no field for variable " + name);
    field_of_var[v] = &it->second;
  }

  MomentVector out(table);
  Eigen::VectorXd prev;
  for (int q = opts.initial_nodes; q <= opts.max_nodes; q *= 2) {
    Eigen::VectorXd cur = tensor_moments(*table, lo, hi, coord_of_var,
                                         field_of_var, weight, q);
    if (prev.size() > 0) {
      double diff = (cur - prev).cwiseAbs().maxCoeff();
      double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
      if (diff <= opts.tol * scale) {
        out.values = cur;
        return out;
      }
    }
    prev = cur;
  }
  throw std::runtime_error("graph_moments: quadrature did not converge");
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const QuadratureOptions& opts) {
  double prev = 0.0;
  bool have_prev = false;
  for (int q = opts.initial_nodes; q <= opts.max_nodes; q *= 2) {
    std::vector<double> x, w;
    gauss_legendre(q, a, b, x, w);
    double v = 0.0;
    for (int i = 0; i < q; ++i) v += w[i] * f(x[i]);
    if (have_prev && std::abs(v - prev) <= opts.tol * std::max(1.0, std::abs(v)))
      return v;
    prev = v;
    have_prev = true;
  }
  throw std::runtime_error("integrate_1d: quadrature did not converge");
}

}  // namespace momentpde
