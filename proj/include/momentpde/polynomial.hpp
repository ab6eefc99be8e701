#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace momentpde {

/// Exponent vector; one entry per variable of a VariableSpace.
using MultiIndex = std::vector<std::uint8_t>;

int total_degree(const MultiIndex& a);

/// Graded lexicographic order: lower total degree first; within a degree the
/// earlier variable's higher power comes first, so for two variables the
/// basis reads 1, x1, x2, x1^2, x1*x2, x2^2, x1^3, ...
bool grlex_less(const MultiIndex& a, const MultiIndex& b);

struct GrlexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return grlex_less(a, b);
  }
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const;
};

/// Exact binomial coefficient (n choose k), valid for results < 2^63.
std::int64_t binomial(int n, int k);

class VariableSpace;
using SpacePtr = std::shared_ptr<const VariableSpace>;

/// Ordered named blocks of scalar variables (e.g. x:n, y:n_y, z:kept, u:n_u).
/// Immutable after creation; shared across polynomials and moment vectors.
class VariableSpace {
 public:
  struct Block {
    std::string name;
    int offset = 0;
    int size = 0;
  };

  /// Each entry is (block name, variable names). Block names and variable
  /// names must be unique across the space.
  static SpacePtr create(
      std::vector<std::pair<std::string, std::vector<std::string>>> blocks);

  int dim() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& var_names() const { return names_; }
  const std::string& var_name(int v) const { return names_.at(v); }
  int find_var(const std::string& name) const;    // -1 if absent
  const Block* find_block(const std::string& name) const;  // nullptr if absent
  const std::vector<Block>& blocks() const { return blocks_; }

  bool in_block(int v, const std::string& block) const;
  bool same_as(const VariableSpace& other) const;

 private:
  std::vector<Block> blocks_;
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

/// All multi-indices of total degree <= d in graded-lex order.
/// Length is binomial(dim + d, d).
std::vector<MultiIndex> mono_basis(int dim, int d);
std::vector<MultiIndex> mono_basis(const VariableSpace& space, int d);

/// Variant with a per-block total-degree cap (block name -> max degree),
/// used for the z-degree-bounded hierarchy.
std::vector<MultiIndex> mono_basis_capped(
    const VariableSpace& space, int d,
    const std::map<std::string, int>& block_caps);

/// Sparse multivariate polynomial with real coefficients over a shared
/// VariableSpace. Terms are kept in graded-lex order and zero coefficients
/// are never stored. Value semantics; safe to share across threads.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GrlexLess>;

  Polynomial() = default;
  explicit Polynomial(SpacePtr space) : space_(std::move(space)) {}

  static Polynomial zero(SpacePtr space) { return Polynomial(std::move(space)); }
  static Polynomial constant(SpacePtr space, double c);
  static Polynomial variable(SpacePtr space, int v);
  static Polynomial monomial(SpacePtr space, const MultiIndex& a, double c);

  const SpacePtr& space() const { return space_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // 0 for the zero polynomial
  int degree_in_block(const std::string& block) const;
  int degree_in_var(int v) const;
  bool depends_on(int v) const;
  bool depends_on_block(const std::string& block) const;

  double coefficient(const MultiIndex& a) const;
  void set_coefficient(const MultiIndex& a, double c);
  void add_term(const MultiIndex& a, double c);

  Polynomial& operator+=(const Polynomial& q);
  Polynomial& operator-=(const Polynomial& q);
  Polynomial& operator*=(double c);

  friend Polynomial operator+(Polynomial p, const Polynomial& q) { p += q; return p; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { p -= q; return p; }
  friend Polynomial operator*(Polynomial p, double c) { p *= c; return p; }
  friend Polynomial operator*(double c, Polynomial p) { p *= c; return p; }
  friend Polynomial operator-(Polynomial p) { p *= -1.0; return p; }

  bool same_terms(const Polynomial& q, double tol = 0.0) const;

  double eval(const std::vector<double>& point) const;
  std::string to_string() const;

 private:
  SpacePtr space_;
  TermMap terms_;
};

Polynomial poly_mul(const Polynomial& p, const Polynomial& q);
Polynomial poly_pow(const Polynomial& p, int k);

/// Formal partial derivative with respect to variable v.
Polynomial poly_diff(const Polynomial& p, int v);

/// Substitute every variable of p by a polynomial over `target`. Variables
/// without an explicit image map to the variable of the same name in the
/// target space (error if it does not exist there and p depends on it).
Polynomial poly_substitute(const Polynomial& p, const SpacePtr& target,
                           const std::map<int, Polynomial>& images);

/// Name-preserving change of space (identity substitution).
Polynomial poly_reinterpret(const Polynomial& p, const SpacePtr& target);

/// Per-variable affine change of variables v -> a_v + b_v * v.
Polynomial poly_affine_substitute(const Polynomial& p,
                                  const std::vector<double>& shift,
                                  const std::vector<double>& scale);

/// Parse the problem-file polynomial syntax: terms like 3*x1^2*y1*z1_2 with
/// +, -, *, ^, parentheses; whitespace-insensitive. Throws ParseError with a
/// character position on malformed input or unknown variables.
Polynomial parse_polynomial(const std::string& text, const SpacePtr& space);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos);
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

}  // namespace momentpde
