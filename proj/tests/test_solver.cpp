#include <doctest.h>

#include <cmath>

#include "momentpde/ipm.hpp"
#include "momentpde/sdpa.hpp"
#include "sdp_fixtures.hpp"

using namespace momentpde;

TEST_CASE("Schur-complement toy optimum") {
  ConicProblem p = fixtures::schur_instance(0.5, 1.0);
  SolveResult res = solve(p);
  CHECK(res.report.status == SolveStatus::optimal);
  CHECK(res.report.primal_objective == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(res.s[0] == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("single nonnegative scalar") {
  ConicProblem p;
  p.nvars = 1;
  p.c = Eigen::VectorXd::Ones(1);
  ConicBlock b;
  b.size = 1;
  b.vars = {0};
  b.entries = {{{0, 0, 1.0}}};
  p.blocks.push_back(b);
  SolveResult res = solve(p);
  CHECK(res.report.status == SolveStatus::optimal);
  CHECK(std::abs(res.report.primal_objective) < 1e-7);
}

TEST_CASE("analytic library subset solves to 1e-7") {
  auto cases = fixtures::analytic_library(12);
  for (const auto& cse : cases) {
    SolveResult res = solve(cse.problem);
    CHECK(res.report.status == SolveStatus::optimal);
    CHECK(res.report.primal_objective ==
          doctest::Approx(cse.optimum).epsilon(0).scale(1).epsilon(1e-7));
    CHECK(std::abs(res.report.primal_objective - cse.optimum) < 1e-7);
    CHECK(res.report.gap <= 1e-8);
  }
}

TEST_CASE("weak duality holds at feasible iterates") {
  auto cases = fixtures::analytic_library(6);
  for (const auto& cse : cases) {
    SolverOptions opts;
    opts.trace = [](int, double pobj, double dobj, double feas) {
      if (feas <= 1e-8)
        CHECK(pobj - dobj >= -1e-9 * (1.0 + std::abs(pobj) + std::abs(dobj)));
    };
    solve(cse.problem, opts);
  }
}

TEST_CASE("solver is deterministic") {
  ConicProblem p = fixtures::schur_instance(0.37, 1.21);
  SolveResult a = solve(p);
  SolveResult b = solve(p);
  CHECK(a.report.iterations == b.report.iterations);
  CHECK(a.s == b.s);
  CHECK(a.report.primal_objective == b.report.primal_objective);
}

TEST_CASE("check_solution reports residuals") {
  ConicProblem p = fixtures::schur_instance(0.5, 1.0);
  SolveResult res = solve(p);
  ResidualReport ok = check_solution(p, res.s);
  CHECK(ok.max_equality_residual <= 1e-7);
  CHECK(ok.min_block_eigenvalue >= -1e-9);

  Eigen::VectorXd bad = res.s;
  bad[1] += 1e-3;
  ResidualReport pert = check_solution(p, bad);
  CHECK(pert.max_equality_residual >= 0.999e-3);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  ResidualReport z = check_solution(p, zero);
  CHECK(z.max_equality_residual == doctest::Approx(1.0));  // ||b||_inf
}

TEST_CASE("presolve removes duplicates and dependent rows") {
  std::vector<SparseRow> rows;
  rows.push_back({{{0, 1.0}, {1, 2.0}}, 3.0, "a"});
  rows.push_back({{{0, 1.0}, {1, 2.0}}, 3.0, "a-dup"});
  rows.push_back({{{0, 2.0}, {1, 4.0}}, 6.0, "2a"});
  rows.push_back({{{0, 1.0}}, 1.0, "b"});
  bool inconsistent = false;
  auto kept = presolve_rows(rows, 2, 1e-11, &inconsistent);
  CHECK(kept.size() == 2);
  CHECK(!inconsistent);

  rows.push_back({{{0, 2.0}, {1, 4.0}}, 5.0, "conflict"});
  kept = presolve_rows(rows, 2, 1e-11, &inconsistent);
  CHECK(inconsistent);
}

TEST_CASE("infeasible equality rows are detected") {
  // s >= 0 (1x1) with s = -1 has no solution.
  ConicProblem p;
  p.nvars = 1;
  p.c = Eigen::VectorXd::Zero(1);
  ConicBlock b;
  b.size = 1;
  b.vars = {0};
  b.entries = {{{0, 0, 1.0}}};
  p.blocks.push_back(b);
  p.rows.push_back({{{0, 1.0}}, -1.0, "pin"});
  SolveResult res = solve(p);
  CHECK(res.report.status != SolveStatus::optimal);
}

TEST_CASE("sdpa export golden fixture and round trip") {
  ConicProblem p = fixtures::schur_instance(0.5, 1.0);
  std::string text = export_sdpa(p);
  const char* golden =
      "* produced by momentpde (SDPA sparse format)\n"
      "*eqrows 2\n"
      "3\n"
      "3\n"
      "2 -2 -2\n"
      "1 0 0\n"
      "0 2 1 1 0.5\n"
      "0 3 1 1 -0.5\n"
      "0 2 2 2 1\n"
      "0 3 2 2 -1\n"
      "1 1 1 1 1\n"
      "2 1 1 2 1\n"
      "2 2 1 1 1\n"
      "2 3 1 1 -1\n"
      "3 1 2 2 1\n"
      "3 2 2 2 1\n"
      "3 3 2 2 -1\n";
  CHECK(text == golden);
  CHECK(export_sdpa(p) == text);  // byte-stable across calls

  ConicProblem q = import_sdpa(text);
  CHECK(q.nvars == p.nvars);
  REQUIRE(q.rows.size() == p.rows.size());
  CHECK(q.rows[0].rhs == p.rows[0].rhs);
  REQUIRE(q.blocks.size() == p.blocks.size());
  CHECK(q.blocks[0].size == 2);

  SolveResult a = solve(p);
  SolveResult b = solve(q);
  CHECK(a.report.primal_objective ==
        doctest::Approx(b.report.primal_objective).epsilon(1e-9));
}

TEST_CASE("sdpa export of an empty problem is header-only") {
  ConicProblem p;
  p.nvars = 0;
  p.c = Eigen::VectorXd();
  std::string text = export_sdpa(p);
  CHECK(text ==
        "* produced by momentpde (SDPA sparse format)\n0\n0\n\n\n");
}
