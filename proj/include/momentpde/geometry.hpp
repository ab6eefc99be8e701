#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "momentpde/polynomial.hpp"

namespace momentpde {

/// Basic semialgebraic set {g_i >= 0} over some variable space. The
/// polynomials are interpreted over whatever space the consumer uses; an
/// optional redundant ball constraint records Archimedean closure.
struct SemialgebraicSet {
  std::vector<Polynomial> inequalities;
  std::optional<double> ball_radius;
};

/// One smooth piece of the domain boundary. For axis-aligned boxes the piece
/// is a face with a constant unit normal; general pieces carry a defining
/// polynomial h (h = 0 on the piece) and the gradient field used in place of
/// the unit normal when that is not polynomial.
struct BoundaryPiece {
  int index = 0;
  std::string name;
  Polynomial h;                             // over the x-space, zero on the piece
  std::vector<Polynomial> normal_gradient;  // components of grad h (outward)
  std::vector<Polynomial> inequalities;     // g^{d,i}_j >= 0 over the x-space
  bool is_normal_unit = false;

  // Box-face fast path; fixed_coord < 0 for general pieces.
  int fixed_coord = -1;
  double fixed_value = 0.0;
  int orientation = 0;  // outward normal sign along fixed_coord
};

/// Moments of the surface measure on non-box pieces, supplied by the user as
/// a plain-text table: lines `piece_index alpha... value`.
class SurfaceMomentTable {
 public:
  void set(int piece, const MultiIndex& alpha, double value);
  std::optional<double> get(int piece, const MultiIndex& alpha) const;
  bool empty() const { return values_.empty(); }

  static SurfaceMomentTable load(const std::string& path, int x_dim);

 private:
  std::map<std::pair<int, MultiIndex>, double> values_;
};

struct DomainGeometry {
  SpacePtr x_space;  // block "x" only
  SemialgebraicSet omega;
  std::vector<BoundaryPiece> pieces;

  bool is_box = false;
  std::vector<double> lo, hi;  // set when is_box

  SurfaceMomentTable sigma_table;  // required for non-box geometries

  int dim() const { return x_space ? x_space->dim() : 0; }
  const BoundaryPiece* find_piece(const std::string& name) const;
};

/// Axis-aligned box with 2n faces as boundary pieces, ordered
/// (x1=lo, x1=hi, x2=lo, x2=hi, ...). Face normals are the constant unit
/// vectors -e_j / +e_j.
DomainGeometry box_domain(const std::vector<double>& lo,
                          const std::vector<double>& hi);

/// Integral of x^alpha over the box.
double lebesgue_moment(const std::vector<double>& lo,
                       const std::vector<double>& hi, const MultiIndex& alpha);
double lebesgue_moment(const DomainGeometry& geom, const MultiIndex& alpha);

/// Integral of x^alpha over one boundary piece with respect to the surface
/// measure (analytic for box faces, table lookup otherwise).
double surface_moment(const DomainGeometry& geom, const BoundaryPiece& piece,
                      const MultiIndex& alpha);

/// Integral of an x-polynomial over a piece.
double surface_integral(const DomainGeometry& geom, const BoundaryPiece& piece,
                        const Polynomial& p);

/// Integral of an x-polynomial against Lebesgue measure on the box.
double lebesgue_integral(const DomainGeometry& geom, const Polynomial& p);

}  // namespace momentpde
