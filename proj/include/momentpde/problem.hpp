#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "momentpde/geometry.hpp"
#include "momentpde/polynomial.hpp"

namespace momentpde {

class ProblemError : public std::runtime_error {
 public:
  explicit ProblemError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bounds on a variable block; absent bounds mean the block is unconstrained
/// (no localizing constraints, convergence guarantees do not apply).
struct BlockBounds {
  bool bounded = false;
  std::vector<double> lo, hi;  // per component when bounded
};

enum class BcType { free_piece, general, dirichlet, periodic };

/// Controls attached to either the volume PDE or one boundary piece.
struct ControlDecl {
  int count = 0;
  std::vector<std::pair<double, double>> bounds;  // physical input box
  std::vector<std::vector<Polynomial>> C;         // rows x channels, in (x,y)
  std::vector<Polynomial> L_u;                    // objective weight per channel
};

struct BoundaryConditionDecl {
  BcType type = BcType::free_piece;
  std::vector<Polynomial> general;       // G components, in (x,y,kept z)
  std::vector<Polynomial> dirichlet;     // one per unknown, in x
  std::string periodic_partner;          // target piece name
  std::vector<Polynomial> periodic_map;  // n components in x; empty = translation
  ControlDecl controls;                  // boundary controls (may be empty)
};

/// One eliminated derivative z_{k,j} expressed through the remaining
/// variables: z_{k,j} = expr(x, y, kept z) + sum_c coeff_c(x, y) * u_c.
struct Substitution {
  int k = 0, j = 0;  // 1-based unknown and direction indices
  Polynomial expr;
  std::vector<Polynomial> control_coeffs;
};

/// A PDE analysis or control instance in physical coordinates, as read from
/// a problem file. All polynomials are over the spaces built by the loader:
/// full_space = (x, y, kept z) and xy_space = (x, y); controls enter as the
/// u block of ext_space.
struct PDEProblem {
  std::string name;
  DomainGeometry geometry;  // physical box
  int n_y = 1;

  SpacePtr full_space;  // x + y + kept z
  SpacePtr xy_space;    // x + y
  std::vector<std::string> kept_z;  // names in block order

  std::vector<Polynomial> F;  // remaining PDE rows, in full_space
  // B_{i,j} matrices (1-based x-index pairs, i <= j): n_F x n_y entries in (x,y).
  std::map<std::pair<int, int>, std::vector<std::vector<Polynomial>>> B;

  std::map<std::string, BoundaryConditionDecl> boundary;  // by piece name

  ControlDecl controls;  // distributed controls

  enum class Sense { both, inf_only, sup_only, minimize };
  Sense sense = Sense::both;
  Polynomial L;                                  // in full_space
  std::map<std::string, Polynomial> L_boundary;  // per piece, in full_space

  BlockBounds y_bounds;
  BlockBounds z_bounds;  // over kept z components, block order

  std::vector<Substitution> substitutions;
  int default_d = 4;
  int d_tilde = -1;  // -1: no cap on z moment degree

  bool has_controls() const;
  int x_dim() const { return geometry.dim(); }
  std::string z_name(int k, int j) const;
};

/// Parse a problem file (JSON). Unknown keys are rejected. Throws
/// ProblemError with a field path on malformed input.
PDEProblem load_problem(const std::string& path);
PDEProblem parse_problem_text(const std::string& text);

/// The same problem mapped affinely onto the unit box, with the objective
/// carrying the volume or surface Jacobians and the control inputs mapped
/// onto [0,1] channels. Bounds and reported values stay in physical units;
/// the maps below convert back.
struct ScaledProblem {
  PDEProblem unit;              // geometry is the unit box
  std::vector<double> x_lo, x_width;
  std::vector<double> u_lo, u_width;  // distributed channels
  std::map<std::string, std::vector<double>> bc_u_lo, bc_u_width;
  double volume_jacobian = 1.0;
  std::vector<double> face_jacobian;  // per piece index

  /// Physical point -> unit coordinates.
  std::vector<double> to_unit(const std::vector<double>& x_phys) const;
};

ScaledProblem scale_to_unit(const PDEProblem& physical);

}  // namespace momentpde
