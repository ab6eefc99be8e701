#include <doctest.h>

#include <cmath>
#include <random>

#include "momentpde/polynomial.hpp"

using namespace momentpde;

namespace {

SpacePtr make_xy_space() {
  return VariableSpace::create({{"x", {"x1", "x2"}}, {"y", {"y1"}}});
}

// Small deterministic generator for random sparse polynomials.
Polynomial random_poly(const SpacePtr& space, int max_deg, std::mt19937& rng) {
  std::uniform_int_distribution<int> nterms(1, 6);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> expo(0, max_deg);
  Polynomial p(space);
  int k = nterms(rng);
  for (int t = 0; t < k; ++t) {
    MultiIndex a(space->dim(), 0);
    int budget = max_deg;
    for (int v = 0; v < space->dim() && budget > 0; ++v) {
      int e = expo(rng) % (budget + 1);
      a[v] = static_cast<std::uint8_t>(e);
      budget -= e;
    }
    p.add_term(a, coef(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("mono_basis matches the graded-lex listing for n=2, d=3") {
  auto basis = mono_basis(2, 3);
  REQUIRE(basis.size() == 10);
  std::vector<MultiIndex> want = {
      {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
      {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(basis[i] == want[i]);
}

TEST_CASE("mono_basis length is binomial(dim+d, d)") {
  for (int dim = 1; dim <= 6; ++dim)
    for (int d = 0; d <= 10; ++d)
      CHECK(static_cast<std::int64_t>(mono_basis(dim, d).size()) ==
            binomial(dim + d, d));
}

TEST_CASE("mono_basis degenerate cases") {
  CHECK(mono_basis(3, 0).size() == 1);
  CHECK(mono_basis(4, 4).size() == 70);
}

TEST_CASE("graded-lex is a total order with degree blocks in order") {
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> expo(0, 4);
  for (int t = 0; t < 500; ++t) {
    MultiIndex a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = static_cast<std::uint8_t>(expo(rng));
      b[i] = static_cast<std::uint8_t>(expo(rng));
    }
    int cmp = grlex_less(a, b) ? -1 : (grlex_less(b, a) ? 1 : 0);
    if (a == b)
      CHECK(cmp == 0);
    else
      CHECK(cmp != 0);
    if (total_degree(a) < total_degree(b)) CHECK(cmp == -1);
  }
}

TEST_CASE("polynomial ring identities") {
  auto space = make_xy_space();
  std::mt19937 rng(777);
  for (int t = 0; t < 50; ++t) {
    Polynomial p = random_poly(space, 4, rng);
    Polynomial q = random_poly(space, 4, rng);
    Polynomial r = random_poly(space, 4, rng);
    Polynomial lhs = poly_mul(p + q, r);
    Polynomial rhs = poly_mul(p, r) + poly_mul(q, r);
    CHECK(lhs.same_terms(rhs, 1e-12));
    // Product rule for every variable.
    for (int v = 0; v < space->dim(); ++v) {
      Polynomial d1 = poly_diff(poly_mul(p, q), v);
      Polynomial d2 = poly_mul(poly_diff(p, v), q) + poly_mul(p, poly_diff(q, v));
      CHECK(d1.same_terms(d2, 1e-12));
    }
  }
}

TEST_CASE("poly_mul examples") {
  auto space = make_xy_space();
  Polynomial x1 = parse_polynomial("x1", space);
  Polynomial one = Polynomial::constant(space, 1.0);
  Polynomial prod = poly_mul(x1 + one, x1 - one);
  CHECK(prod.same_terms(parse_polynomial("x1^2 - 1", space)));
  CHECK(poly_mul(x1, Polynomial::zero(space)).is_zero());
  CHECK(prod.degree() == 2);
}

TEST_CASE("poly_mul closes over mixed blocks") {
  auto space = VariableSpace::create(
      {{"x", {"x1"}}, {"y", {"y1"}}, {"z", {"z1_2"}}});
  Polynomial p = parse_polynomial("y1*z1_2", space);
  Polynomial q = parse_polynomial("y1", space);
  CHECK(poly_mul(p, q).same_terms(parse_polynomial("y1^2*z1_2", space)));
}

TEST_CASE("poly_diff examples") {
  auto space = make_xy_space();
  CHECK(poly_diff(parse_polynomial("x1^2*x2", space), 0)
            .same_terms(parse_polynomial("2*x1*x2", space)));
  CHECK(poly_diff(Polynomial::constant(space, 5.0), 0).is_zero());
  auto yz = VariableSpace::create({{"y", {"y1"}}, {"z", {"z1_1"}}});
  CHECK(poly_diff(parse_polynomial("y1^3*z1_1", yz), 0)
            .same_terms(parse_polynomial("3*y1^2*z1_1", yz)));
}

TEST_CASE("affine substitution") {
  auto space = make_xy_space();
  Polynomial p = parse_polynomial("x1", space);
  CHECK(poly_affine_substitute(p, {0, 0, 0}, {5, 1, 1})
            .same_terms(parse_polynomial("5*x1", space)));
  Polynomial q = parse_polynomial("x1^2", space);
  // x1 -> a + b*x1 with a=2, b=3: (2+3x1)^2 = 4 + 12 x1 + 9 x1^2
  CHECK(poly_affine_substitute(q, {2, 0, 0}, {3, 1, 1})
            .same_terms(parse_polynomial("4 + 12*x1 + 9*x1^2", space), 1e-12));
  Polynomial r = parse_polynomial("x1^2*y1 - x2", space);
  CHECK(poly_affine_substitute(r, {0, 0, 0}, {1, 1, 1}).same_terms(r));
  CHECK(poly_affine_substitute(q, {2, 0, 0}, {3, 1, 1}).degree() == q.degree());
}

TEST_CASE("evaluation") {
  auto space = make_xy_space();
  CHECK(parse_polynomial("x1*x2", space).eval({2, 3, 0}) == doctest::Approx(6.0));
  CHECK(Polynomial::zero(space).eval({1, 2, 3}) == 0.0);
  // The initial profile used in the transport experiments.
  Polynomial y0 = parse_polynomial("10*(x2*(1-x2))^2", space);
  CHECK(y0.eval({0.0, 0.5, 0.0}) == doctest::Approx(0.625).epsilon(1e-14));
}

TEST_CASE("eval is multiplicative") {
  auto space = make_xy_space();
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    Polynomial p = random_poly(space, 3, rng);
    Polynomial q = random_poly(space, 3, rng);
    std::vector<double> x = {pt(rng), pt(rng), pt(rng)};
    double lhs = poly_mul(p, q).eval(x);
    double rhs = p.eval(x) * q.eval(x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("parser handles the problem-file syntax") {
  auto space = VariableSpace::create(
      {{"x", {"x1", "x2"}}, {"y", {"y1"}}, {"z", {"z1_1", "z1_2"}}, {"u", {"u1"}}});
  Polynomial p = parse_polynomial("3*x1^2*y1*z1_2", space);
  CHECK(p.degree() == 4);
  CHECK(p.terms().size() == 1);
  Polynomial q = parse_polynomial("  - y1 * z1_2\t+ 2.5e-1 * u1 ", space);
  CHECK(q.coefficient(MultiIndex{0, 0, 0, 0, 0, 1}) == doctest::Approx(0.25));
  // Round trip through printing.
  Polynomial r = parse_polynomial("x1^2 - 2*x2*y1 + 0.5", space);
  CHECK(parse_polynomial(r.to_string(), space).same_terms(r, 1e-15));
}

TEST_CASE("parser rejects malformed input") {
  auto space = make_xy_space();
  CHECK_THROWS_AS(parse_polynomial("x3 + 1", space), ParseError);
  CHECK_THROWS_AS(parse_polynomial("x1 +", space), ParseError);
  CHECK_THROWS_AS(parse_polynomial("x1 / x2", space), ParseError);
  CHECK_THROWS_AS(parse_polynomial("(x1", space), ParseError);
  CHECK_THROWS_AS(parse_polynomial("x1^-2", space), ParseError);
}

TEST_CASE("variable space bookkeeping") {
  auto space = VariableSpace::create(
      {{"x", {"x1", "x2"}}, {"y", {"y1"}}, {"z", {"z1_1", "z1_2"}}});
  CHECK(space->dim() == 5);
  CHECK(space->find_var("z1_2") == 4);
  CHECK(space->find_var("nope") == -1);
  CHECK(space->find_block("z")->size == 2);
  CHECK(space->in_block(2, "y"));
  CHECK_THROWS(VariableSpace::create({{"x", {"x1", "x1"}}}));
}
