#include <doctest.h>

#include <random>

#include "momentpde/extract.hpp"
#include "momentpde/geometry.hpp"

using namespace momentpde;

namespace {

// Analytic moments of u * Lebesgue on the unit box in (x, y) space.
MomentVector density_moments(const MomentVector& base, const Polynomial& u) {
  MomentVector out(base.table);
  for (int i = 0; i < base.table->size(); ++i) {
    Polynomial mono =
        Polynomial::monomial(base.table->space(), base.table->basis()[i], 1.0);
    Polynomial prod = poly_mul(mono, u);
    double v = 0.0;
    for (const auto& [a, c] : prod.terms())
      v += c * lebesgue_moment(std::vector<double>(a.size(), 0.0),
                               std::vector<double>(a.size(), 1.0), a);
    out.values[i] = v;
  }
  return out;
}

TablePtr xy_table(int d) {
  auto space = VariableSpace::create({{"x", {"x1", "x2"}}, {"y", {"y1"}}});
  return std::make_shared<MonomialTable>(space, d);
}

}  // namespace

TEST_CASE("unit and zero densities recover exactly") {
  auto table = xy_table(6);
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);

  ControllerPolynomial one = extract(mu, mu, 6);
  Polynomial constant_one = Polynomial::constant(table->space(), 1.0);
  CHECK(one.kappa.same_terms(constant_one, 1e-9));
  CHECK(one.residual <= 1e-10);

  MomentVector zero(table);
  ControllerPolynomial z = extract(mu, zero, 6);
  CHECK(z.kappa.is_zero());
}

TEST_CASE("synthetic polynomial density recovers to 1e-8") {
  auto table = xy_table(6);
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);
  Polynomial u = parse_polynomial("x1 + y1 - x1*y1", table->space());
  MomentVector nu = density_moments(mu, u);
  ControllerPolynomial k = extract(mu, nu, 6);
  Polynomial diff = k.kappa - u;
  for (const auto& [a, c] : diff.terms()) CHECK(std::abs(c) <= 1e-8);
  CHECK(k.residual <= 1e-10);
}

TEST_CASE("random degree-3 densities recover against analytic box moments") {
  auto table = xy_table(6);
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial u(table->space());
    for (const auto& a : mono_basis(*table->space(), 3))
      u.add_term(a, coef(rng));
    MomentVector nu = density_moments(mu, u);
    ControllerPolynomial k = extract(mu, nu, 6);
    Polynomial diff = k.kappa - u;
    double worst = 0.0;
    for (const auto& [a, c] : diff.terms()) worst = std::max(worst, std::abs(c));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("extraction is invariant to joint positive scaling") {
  auto table = xy_table(4);
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);
  Polynomial u = parse_polynomial("0.5 + 0.25*x2", table->space());
  MomentVector nu = density_moments(mu, u);
  ControllerPolynomial a = extract(mu, nu, 4);
  MomentVector mu2 = mu, nu2 = nu;
  mu2.values *= 7.5;
  nu2.values *= 7.5;
  ControllerPolynomial b = extract(mu2, nu2, 4);
  CHECK(a.kappa.same_terms(b.kappa, 1e-10));
}

TEST_CASE("degree cap truncates the matching basis") {
  auto table = xy_table(6);
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);
  Polynomial u = parse_polynomial("0.3 + 0.1*x1", table->space());
  MomentVector nu = density_moments(mu, u);
  ControllerPolynomial k = extract(mu, nu, 6, 1);
  CHECK(k.kappa.degree() <= 1);
  CHECK(k.residual <= 1e-10);
}

TEST_CASE("saturation clamps only at evaluation time") {
  auto table = xy_table(4);
  ControllerPolynomial k;
  k.kappa = parse_polynomial("2", table->space());
  SaturatedController sat = saturate(k, 0.0, 1.0);
  CHECK(sat.eval({0.3, 0.5, 0.0}) == 1.0);
  k.kappa = parse_polynomial("y1", table->space());
  sat = saturate(k, -1.0, 1.0);
  CHECK(sat.eval({0, 0, 0.5}) == doctest::Approx(0.5));
  CHECK(sat.eval({0, 0, 1.7}) == 1.0);
  CHECK(sat.eval({0, 0, -3.0}) == -1.0);
}

TEST_CASE("degenerate inputs are rejected") {
  auto table = xy_table(4);
  MomentVector zero(table);
  CHECK_THROWS(extract(zero, zero, 4));
  MomentVector mu = box_lebesgue_moments({0, 0, 0}, {1, 1, 1}, table);
  CHECK_THROWS(extract(mu, mu, 3));  // odd degree
}
