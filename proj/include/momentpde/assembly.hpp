#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "momentpde/conic.hpp"
#include "momentpde/moment_vector.hpp"
#include "momentpde/problem.hpp"

namespace momentpde {

class AssemblyError : public std::runtime_error {
 public:
  explicit AssemblyError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class MeasureRole { occupation, boundary, control, slack, boundary_control, boundary_slack };

/// One measure of the relaxation with its truncated moment layout. Boundary
/// measures live on the face: the fixed coordinate is substituted out, and
/// the derivative block is kept only where boundary data references it.
struct MeasureInfo {
  MeasureRole role;
  std::string name;
  int piece = -1;    // piece index for boundary roles
  int channel = -1;  // control channel for control roles
  SpacePtr space;
  TablePtr table;
  int offset = 0;
  std::vector<Polynomial> support;  // g >= 0 over `space`

  int count() const { return table->size(); }
};

/// The finite-dimensional relaxation of one problem instance at degree d:
/// equality rows A s = b over the concatenated moment vectors, the
/// objective c, and the PSD block structure (moment and localizing
/// matrices per measure).
struct AssembledSDP {
  ScaledProblem scaled;
  int d = 0;
  int d_tilde = 0;
  std::vector<MeasureInfo> measures;
  std::vector<SparseRow> rows;
  Eigen::VectorXd c;
  int nvars = 0;

  const MeasureInfo& measure(const std::string& name) const;
  const MeasureInfo* find_measure(const std::string& name) const;
  MomentVector slice(const Eigen::VectorXd& s, const MeasureInfo& m) const;
  int column(const MeasureInfo& m, const MultiIndex& a) const;

  /// PSD cone realization: one moment matrix per measure plus localizing
  /// matrices for every support inequality.
  ConicProblem to_conic() const;
};

class Assembler {
 public:
  /// Builds the measure layout for the scaled problem at relaxation degree d
  /// (even) and z-degree cap d_tilde (-1 for none).
  Assembler(const ScaledProblem& scaled, int d, int d_tilde = -1);

  /// Largest admissible test-function degree for a constraint family, i.e.
  /// the largest k such that every integrand generated by a degree-k test
  /// monomial stays within the truncation.
  int test_degree_stokes(int m) const;
  int test_degree_interior(int row) const;
  int test_degree_boundary(const std::string& piece) const;

  std::vector<SparseRow> stokes_rows() const;
  std::vector<SparseRow> interior_rows() const;
  std::vector<SparseRow> boundary_rows() const;
  std::vector<SparseRow> marginal_rows() const;
  std::vector<SparseRow> slack_rows() const;
  Eigen::VectorXd objective() const;

  AssembledSDP build() const;

  const std::vector<MeasureInfo>& measures() const { return measures_; }

 private:
  struct SplitPoly;  // mu-part plus per-channel control couplings

  SplitPoly split_controls(const Polynomial& ext, const std::string& where) const;
  Polynomial z_value(int k, int j) const;  // kept variable or substitution, over ext space
  Polynomial piece_restrict(const Polynomial& p, const MeasureInfo& m) const;
  bool emit(std::map<int, double>& row, const MeasureInfo& m,
            const Polynomial& p, double sign) const;
  std::optional<SparseRow> finish_row(std::map<int, double>& terms, double rhs,
                                      std::string tag) const;
  // Row builders shared by the family emitters and test_degree_* probes:
  // `fits` reports whether every integrand stayed within the truncations.
  std::optional<SparseRow> stokes_row(int m, const MultiIndex& phi_a, bool& fits) const;
  std::optional<SparseRow> interior_row(int r, const MultiIndex& phi_a, bool& fits) const;

  const ScaledProblem& scaled_;
  const PDEProblem& prob_;
  int d_, dtilde_;
  SpacePtr ext_space_;  // x + y + kept z + u
  std::vector<MeasureInfo> measures_;
  int mu_index_ = 0;
  std::vector<int> piece_measure_;    // piece index -> measure index
  std::vector<int> nu_measure_;       // channel -> measure index
  std::vector<int> nuhat_measure_;
  std::map<std::pair<int, int>, int> bc_nu_measure_;     // (piece, channel)
  std::map<std::pair<int, int>, int> bc_nuhat_measure_;
};

/// Full pipeline: scale to the unit box, lay out measures, generate and
/// deduplicate all constraint families, and attach the objective.
AssembledSDP build_sdp(const PDEProblem& physical, int d, int d_tilde = -1);

/// Moments of the graph family of a known candidate solution (y given as
/// polynomials over physical x), arranged like a solver vector for
/// feasibility checks: A s - b residuals certify Theorem-1 membership.
Eigen::VectorXd graph_solution_vector(const AssembledSDP& sdp,
                                      const std::vector<Polynomial>& y_phys,
                                      const std::vector<Polynomial>* u_phys = nullptr);

}  // namespace momentpde
