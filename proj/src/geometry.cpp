#include "momentpde/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace momentpde {

void SurfaceMomentTable::set(int piece, const MultiIndex& alpha, double value) {
  values_[{piece, alpha}] = value;
}

std::optional<double> SurfaceMomentTable::get(int piece,
                                              const MultiIndex& alpha) const {
  auto it = values_.find({piece, alpha});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

SurfaceMomentTable SurfaceMomentTable::load(const std::string& path, int x_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open surface moment table: " + path);
  SurfaceMomentTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int piece;
    if (!(ls >> piece))
      throw std::runtime_error("surface moment table line " + std::to_string(lineno) +
                               ": expected piece index");
    MultiIndex alpha(x_dim, 0);
    for (int i = 0; i < x_dim; ++i) {
      int e;
      if (!(ls >> e) || e < 0)
        throw std::runtime_error("surface moment table line " + std::to_string(lineno) +
                                 ": expected " + std::to_string(x_dim) + " exponents");
      alpha[i] = static_cast<std::uint8_t>(e);
    }
    double v;
    if (!(ls >> v))
      throw std::runtime_error("surface moment table line " + std::to_string(lineno) +
                               ": expected a value");
    table.set(piece, alpha, v);
  }
  return table;
}

const BoundaryPiece* DomainGeometry::find_piece(const std::string& name) const {
  for (const auto& p : pieces)
    if (p.name == name) return &p;
  return nullptr;
}

DomainGeometry box_domain(const std::vector<double>& lo,
                          const std::vector<double>& hi) {
  const int n = static_cast<int>(lo.size());
  if (static_cast<int>(hi.size()) != n || n == 0)
    throw std::invalid_argument("box_domain: lo/hi dimension mismatch");
  for (int j = 0; j < n; ++j)
    if (!(lo[j] < hi[j]))
      throw std::invalid_argument("box_domain: degenerate box in coordinate " +
                                  std::to_string(j + 1));

  DomainGeometry geom;
  std::vector<std::string> xnames;
  for (int j = 0; j < n; ++j) xnames.push_back("x" + std::to_string(j + 1));
  geom.x_space = VariableSpace::create({{"x", xnames}});
  geom.is_box = true;
  geom.lo = lo;
  geom.hi = hi;

  for (int j = 0; j < n; ++j) {
    // (x_j - lo_j)(hi_j - x_j) >= 0
    Polynomial xj = Polynomial::variable(geom.x_space, j);
    Polynomial g = poly_mul(xj - Polynomial::constant(geom.x_space, lo[j]),
                            Polynomial::constant(geom.x_space, hi[j]) - xj);
    geom.omega.inequalities.push_back(std::move(g));
  }

  int index = 0;
  for (int j = 0; j < n; ++j) {
    for (int side = 0; side < 2; ++side) {
      BoundaryPiece piece;
      piece.index = index++;
      piece.name = "x" + std::to_string(j + 1) + (side == 0 ? "=lo" : "=hi");
      piece.fixed_coord = j;
      piece.fixed_value = side == 0 ? lo[j] : hi[j];
      piece.orientation = side == 0 ? -1 : +1;
      piece.is_normal_unit = true;
      Polynomial xj = Polynomial::variable(geom.x_space, j);
      // h = -(x_j - lo_j) on the lo face, x_j - hi_j on the hi face, so that
      // grad h is the outward unit normal.
      piece.h = (xj - Polynomial::constant(geom.x_space, piece.fixed_value)) *
                static_cast<double>(piece.orientation);
      for (int m = 0; m < n; ++m)
        piece.normal_gradient.push_back(Polynomial::constant(
            geom.x_space, m == j ? static_cast<double>(piece.orientation) : 0.0));
      for (int m = 0; m < n; ++m) {
        if (m == j) continue;
        Polynomial xm = Polynomial::variable(geom.x_space, m);
        piece.inequalities.push_back(
            poly_mul(xm - Polynomial::constant(geom.x_space, lo[m]),
                     Polynomial::constant(geom.x_space, hi[m]) - xm));
      }
      geom.pieces.push_back(std::move(piece));
    }
  }
  return geom;
}

double lebesgue_moment(const std::vector<double>& lo,
                       const std::vector<double>& hi, const MultiIndex& alpha) {
  if (alpha.size() != lo.size())
    throw std::invalid_argument("lebesgue_moment: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const int k = alpha[j] + 1;
    v *= (std::pow(hi[j], k) - std::pow(lo[j], k)) / k;
  }
  return v;
}

double lebesgue_moment(const DomainGeometry& geom, const MultiIndex& alpha) {
  if (!geom.is_box)
    throw std::runtime_error("lebesgue moments are only available for box domains");
  return lebesgue_moment(geom.lo, geom.hi, alpha);
}

double surface_moment(const DomainGeometry& geom, const BoundaryPiece& piece,
                      const MultiIndex& alpha) {
  if (piece.fixed_coord >= 0) {
    const int j = piece.fixed_coord;
    double v = std::pow(piece.fixed_value, static_cast<int>(alpha[j]));
    for (std::size_t m = 0; m < alpha.size(); ++m) {
      if (static_cast<int>(m) == j) continue;
      const int k = alpha[m] + 1;
      v *= (std::pow(geom.hi[m], k) - std::pow(geom.lo[m], k)) / k;
    }
    return v;
  }
  auto v = geom.sigma_table.get(piece.index, alpha);
  if (!v)
    throw std::runtime_error(
        "missing surface moment for piece " + std::to_string(piece.index) +
        "; non-box pieces require a surface moment table");
  return *v;
}

double surface_integral(const DomainGeometry& geom, const BoundaryPiece& piece,
                        const Polynomial& p) {
  double v = 0.0;
  for (const auto& [a, c] : p.terms()) v += c * surface_moment(geom, piece, a);
  return v;
}

double lebesgue_integral(const DomainGeometry& geom, const Polynomial& p) {
  double v = 0.0;
  for (const auto& [a, c] : p.terms()) v += c * lebesgue_moment(geom, a);
  return v;
}

}  // namespace momentpde
