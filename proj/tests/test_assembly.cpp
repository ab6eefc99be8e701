#include <doctest.h>

#include <fstream>
#include <sstream>

#include "momentpde/assembly.hpp"
#include "momentpde/ipm.hpp"

using namespace momentpde;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) {
  return slurp(std::string(PROBLEM_DIR) + "/" + name);
}

// A constant-profile variant of the periodic transport-style instance.
std::string const_burgers_json(double c, double T) {
  std::ostringstream os;
  os << R"({
    "name": "burgers-const",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [)" << T << R"(, 1.0]}},
    "unknowns": 1,
    "pde": {"F": []},
    "boundary": [
      {"piece": "x1=lo", "condition": "dirichlet", "values": [")" << c << R"("]},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "periodic", "partner": "x2=hi"}
    ],
    "objective": {"sense": "both", "L": "y1^2"},
    "reductions": [{"z": "z1_1", "expr": "-y1*z1_2"}],
    "relaxation": {"d": 4}
  })";
  return os.str();
}

double max_row_residual(const AssembledSDP& sdp, const Eigen::VectorXd& s,
                        const std::string& family_prefix = "") {
  double worst = 0.0;
  for (const auto& row : sdp.rows) {
    if (!family_prefix.empty() && row.tag.rfind(family_prefix, 0) != 0) continue;
    double v = -row.rhs;
    for (const auto& [col, coef] : row.terms) v += coef * s[col];
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace

TEST_CASE("problem loading builds the reduced spaces") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  CHECK(p.n_y == 1);
  CHECK(p.kept_z == std::vector<std::string>{"z1_2"});
  CHECK(p.full_space->dim() == 4);
  CHECK(p.substitutions.size() == 1);
  CHECK(p.substitutions[0].k == 1);
  CHECK(p.substitutions[0].j == 1);
  CHECK(!p.has_controls());
}

TEST_CASE("problem parser rejects malformed input") {
  CHECK_THROWS_AS(parse_problem_text("{"), ProblemError);
  CHECK_THROWS_AS(parse_problem_text(R"({"domain": {"box": {"lo": [0], "hi": [1]}},
    "unknows": 1, "boundary": [], "objective": {}})"),
                  ProblemError);  // unknown key
  // Empty control box is rejected at parse time.
  std::string bad = fixture("burgers_control.json");
  auto pos = bad.find("[-1.0, 1.0]");
  bad.replace(pos, 11, "[1.0, 1.0]");
  CHECK_THROWS_AS(parse_problem_text(bad), ProblemError);
  // A piece without any condition is an error.
  CHECK_THROWS_AS(parse_problem_text(R"({
    "domain": {"box": {"lo": [0,0], "hi": [1,1]}},
    "unknowns": 1,
    "boundary": [{"piece": "x1=lo", "condition": "free"}],
    "objective": {"L": "y1^2"}
  })"),
                  ProblemError);
}

TEST_CASE("scaling maps the instance onto the unit box") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  ScaledProblem sp = scale_to_unit(p);
  CHECK(sp.volume_jacobian == doctest::Approx(5.0));
  CHECK(sp.x_width[0] == doctest::Approx(5.0));
  // Substitution becomes z1_1 = -5 y z1_2 after the time rescale.
  REQUIRE(sp.unit.substitutions.size() == 1);
  Polynomial expect = parse_polynomial("-5*y1*z1_2", p.full_space);
  CHECK(sp.unit.substitutions[0].expr.same_terms(expect, 1e-12));
  // Objective picks up the volume Jacobian.
  CHECK(sp.unit.L.same_terms(parse_polynomial("5*y1^2", p.full_space), 1e-12));
  // Periodic map defaults to the unit translation.
  const auto& bc = sp.unit.boundary.at("x2=lo");
  REQUIRE(bc.periodic_map.size() == 2);
  CHECK(bc.periodic_map[1].same_terms(
      parse_polynomial("x2 + 1", p.geometry.x_space), 1e-12));
}

TEST_CASE("scaling maps control channels onto [0,1]") {
  PDEProblem p = parse_problem_text(fixture("burgers_control.json"));
  ScaledProblem sp = scale_to_unit(p);
  CHECK(sp.u_lo[0] == doctest::Approx(-1.0));
  CHECK(sp.u_width[0] == doctest::Approx(2.0));
  // z1_1 = -3 y z1_2 - 3 + 6 u after time and input rescaling.
  const Substitution& sub = sp.unit.substitutions[0];
  CHECK(sub.expr.same_terms(parse_polynomial("-3*y1*z1_2 - 3", p.full_space), 1e-12));
  REQUIRE(sub.control_coeffs.size() == 1);
  CHECK(sub.control_coeffs[0].same_terms(parse_polynomial("6", p.xy_space), 1e-12));
  CHECK(sp.unit.L.same_terms(parse_polynomial("3*y1^2", p.full_space), 1e-12));
}

TEST_CASE("test degrees per constraint family") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  ScaledProblem sp = scale_to_unit(p);
  Assembler assembler(sp, 4);
  // The reduced time-direction family inflates degree by one through y*z,
  // the space direction by zero.
  CHECK(assembler.test_degree_stokes(1) == 3);
  CHECK(assembler.test_degree_stokes(2) == 4);
  CHECK(assembler.test_degree_boundary("x1=lo") == 4);
  CHECK(assembler.test_degree_boundary("x2=lo") == 4);

  // A PDE row that is linear in every variable admits degree d-1 tests.
  PDEProblem tp = parse_problem_text(fixture("transport.json"));
  ScaledProblem tsp = scale_to_unit(tp);
  Assembler tasm(tsp, 4);
  CHECK(tasm.test_degree_interior(0) == 3);
}

TEST_CASE("build_sdp matches the expected block sizes") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  for (int d : {4, 6}) {
    AssembledSDP sdp = build_sdp(p, d);
    ConicProblem cp = sdp.to_conic();
    int largest = 0;
    for (const auto& b : cp.blocks) largest = std::max(largest, b.size);
    CHECK(largest == (d == 4 ? 15 : 35));
    // Column partition audit: every column belongs to exactly one measure.
    int total = 0;
    for (const auto& m : sdp.measures) total += m.count();
    CHECK(total == sdp.nvars);
    for (const auto& row : sdp.rows) {
      CHECK(!row.tag.empty());
      for (const auto& [col, coef] : row.terms) {
        CHECK(col >= 0);
        CHECK(col < sdp.nvars);
      }
    }
  }
}

TEST_CASE("constant profiles satisfy every constraint row") {
  PDEProblem p = parse_problem_text(const_burgers_json(0.3, 5.0));
  for (int d : {4, 6}) {
    AssembledSDP sdp = build_sdp(p, d);
    std::vector<Polynomial> y = {
        Polynomial::constant(p.geometry.x_space, 0.3)};
    Eigen::VectorXd s = graph_solution_vector(sdp, y);
    CHECK(max_row_residual(sdp, s) <= 1e-8);
    // Putinar side: all blocks PSD at the graph moments.
    ConicProblem cp = sdp.to_conic();
    ResidualReport rep = check_solution(cp, s);
    CHECK(rep.min_block_eigenvalue >= -1e-9);
    // Mass identities: the occupation measure carries vol(unit box).
    const MeasureInfo& mu = sdp.measure("mu");
    CHECK(s[mu.offset] == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& m : sdp.measures)
      if (m.role == MeasureRole::boundary)
        CHECK(s[m.offset] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("polynomial transport solutions satisfy the unreduced rows") {
  PDEProblem p = parse_problem_text(fixture("transport.json"));
  for (int d : {4, 6}) {
    AssembledSDP sdp = build_sdp(p, d);
    // y = (x2 - x1)^2 solves dy/dx1 + dy/dx2 = 0 with y(0, x2) = x2^2.
    std::vector<Polynomial> y = {
        parse_polynomial("(x2 - x1)^2", p.geometry.x_space)};
    Eigen::VectorXd s = graph_solution_vector(sdp, y);
    CHECK(max_row_residual(sdp, s) <= 1e-8);
    ResidualReport rep = check_solution(sdp.to_conic(), s);
    CHECK(rep.min_block_eigenvalue >= -1e-9);
  }
}

TEST_CASE("a non-solution shows residuals on interior rows only") {
  PDEProblem p = parse_problem_text(R"({
    "name": "transport-free",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}},
    "unknowns": 1,
    "pde": {"F": ["z1_1 + z1_2"]},
    "boundary": [
      {"piece": "x1=lo", "condition": "free"},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "free"},
      {"piece": "x2=hi", "condition": "free"}
    ],
    "objective": {"sense": "both", "L": "y1^2"},
    "relaxation": {"d": 4}
  })");
  AssembledSDP sdp = build_sdp(p, 4);
  // y = x2 satisfies the Stokes identities for any smooth profile but not
  // the PDE row (dy/dx1 + dy/dx2 = 1 != 0).
  std::vector<Polynomial> y = {parse_polynomial("x2", p.geometry.x_space)};
  Eigen::VectorXd s = graph_solution_vector(sdp, y);
  CHECK(max_row_residual(sdp, s, "stokes") <= 1e-9);
  CHECK(max_row_residual(sdp, s, "marginal") <= 1e-9);
  CHECK(max_row_residual(sdp, s, "interior") >= 0.5);
}

TEST_CASE("second-order terms transfer through integration by parts") {
  // Heat equation dy/dx1 = d2y/dx2^2 as F = z1_1 with B_{2,2} = -1.
  PDEProblem p = parse_problem_text(R"({
    "name": "heat",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}},
    "unknowns": 1,
    "pde": {"F": ["z1_1"], "B": [{"row": 1, "i": 2, "j": 2, "coeffs": ["-1"]}]},
    "boundary": [
      {"piece": "x1=lo", "condition": "dirichlet", "values": ["x2^2"]},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "free"},
      {"piece": "x2=hi", "condition": "free"}
    ],
    "objective": {"sense": "both", "L": "y1^2"},
    "relaxation": {"d": 4}
  })");
  AssembledSDP sdp = build_sdp(p, 4);
  // Smooth exact solution y = x2^2 + 2 x1.
  std::vector<Polynomial> y = {
      parse_polynomial("x2^2 + 2*x1", p.geometry.x_space)};
  Eigen::VectorXd s = graph_solution_vector(sdp, y);
  CHECK(max_row_residual(sdp, s) <= 1e-8);
  // Boundary measures carry the derivative block when B is present.
  for (const auto& m : sdp.measures)
    if (m.role == MeasureRole::boundary)
      CHECK(m.space->find_block("z") != nullptr);
}

TEST_CASE("marginal and Dirichlet right-hand sides") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  ScaledProblem sp = scale_to_unit(p);
  Assembler assembler(sp, 4);

  // Mass of each boundary measure is pinned to the unit face length.
  bool found_mass = false;
  for (const auto& row : assembler.marginal_rows()) {
    if (row.tag == "marginal[x1=lo] psi=1") {
      REQUIRE(row.terms.size() == 1);
      CHECK(row.terms[0].second == 1.0);
      CHECK(row.rhs == doctest::Approx(1.0));
      found_mass = true;
    }
  }
  CHECK(found_mass);

  // Dirichlet row for phi = y1: integral of the initial profile, 1/3.
  bool found_dirichlet = false;
  for (const auto& row : assembler.boundary_rows()) {
    if (row.tag == "dirichlet[x1=lo] phi=y1") {
      CHECK(row.rhs == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      found_dirichlet = true;
    }
  }
  CHECK(found_dirichlet);
}

TEST_CASE("periodic maps must preserve the surface measure") {
  std::string text = fixture("burgers_energy.json");
  auto pos = text.find("\"partner\": \"x2=hi\"");
  REQUIRE(pos != std::string::npos);
  std::string bad = text;
  bad.replace(pos, 18, "\"partner\": \"x2=hi\", \"map\": [\"x1^2\", \"x2+1\"]");
  PDEProblem p = parse_problem_text(bad);
  CHECK_THROWS_AS(build_sdp(p, 4), AssemblyError);
}

TEST_CASE("slack rows are consistent with constant-control graph moments") {
  PDEProblem p = parse_problem_text(fixture("burgers_control.json"));
  AssembledSDP sdp = build_sdp(p, 4);

  // u = 1 everywhere: the control measure equals the (x,y) marginal and the
  // slack measure vanishes.
  {
    std::vector<Polynomial> y = {
        Polynomial::constant(p.geometry.x_space, 0.25)};
    std::vector<Polynomial> u = {Polynomial::constant(p.geometry.x_space, 1.0)};
    Eigen::VectorXd s = graph_solution_vector(sdp, y, &u);
    CHECK(max_row_residual(sdp, s, "slack") <= 1e-9);
    const MeasureInfo& nuhat = sdp.measure("nuhat1");
    CHECK(sdp.slice(s, nuhat).values.cwiseAbs().maxCoeff() <= 1e-10);
  }
  // u = 0 (the physical midpoint of [-1, 1] is u_unit = 1/2).
  {
    std::vector<Polynomial> y = {
        Polynomial::constant(p.geometry.x_space, 0.25)};
    std::vector<Polynomial> u = {Polynomial::constant(p.geometry.x_space, 0.0)};
    Eigen::VectorXd s = graph_solution_vector(sdp, y, &u);
    const MeasureInfo& nu = sdp.measure("nu1");
    const MeasureInfo& nuhat = sdp.measure("nuhat1");
    Eigen::VectorXd diff =
        sdp.slice(s, nu).values - sdp.slice(s, nuhat).values;
    CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(max_row_residual(sdp, s, "slack") <= 1e-9);
  }
}

TEST_CASE("controlled profiles satisfy the coupled rows") {
  // y = 0.2 x1 with u = 0.2 solves dy/dx1 + y dy/dx2 = u from y(0,.) = 0,
  // so every family including the control coupling must hold.
  std::string text = fixture("burgers_control.json");
  auto pos = text.find("10*(x2*(1-x2))^2");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 16, "0");
  PDEProblem p = parse_problem_text(text);
  AssembledSDP sdp = build_sdp(p, 6);
  std::vector<Polynomial> y = {
      parse_polynomial("0.2*x1", p.geometry.x_space)};
  std::vector<Polynomial> u = {
      Polynomial::constant(p.geometry.x_space, 0.2)};
  Eigen::VectorXd s = graph_solution_vector(sdp, y, &u);
  CHECK(max_row_residual(sdp, s) <= 1e-8);
}

TEST_CASE("dimension bookkeeping for staged variable elimination") {
  // The generic first-order embedding of a 4-unknown, 4-coordinate system
  // carries 4 + 4 + 16 variables; eliminating the three linearly entering
  // temporal derivatives and then the pressure block shrinks the count.
  std::vector<std::string> x, y, z_full, z_red, z_min;
  for (int j = 1; j <= 4; ++j) x.push_back("x" + std::to_string(j));
  for (int k = 1; k <= 4; ++k) y.push_back("y" + std::to_string(k));
  for (int k = 1; k <= 4; ++k)
    for (int j = 1; j <= 4; ++j) {
      std::string name = "z" + std::to_string(k) + "_" + std::to_string(j);
      z_full.push_back(name);
      if (!(j == 1 && k <= 3)) z_red.push_back(name);
      if (!(j == 1 && k <= 3) && k != 4) z_min.push_back(name);
    }
  auto full = VariableSpace::create({{"x", x}, {"y", y}, {"z", z_full}});
  auto red = VariableSpace::create({{"x", x}, {"y", y}, {"z", z_red}});
  auto min = VariableSpace::create({{"x", x}, {"y", y}, {"z", z_min}});
  CHECK(full->dim() == 24);
  CHECK(red->dim() == 21);
  CHECK(min->dim() == 17);
}

TEST_CASE("z-degree cap restricts moments and blocks") {
  PDEProblem p = parse_problem_text(fixture("burgers_energy.json"));
  AssembledSDP capped = build_sdp(p, 4, 2);
  AssembledSDP full = build_sdp(p, 4);
  CHECK(capped.nvars < full.nvars);
  const MeasureInfo& mu = capped.measure("mu");
  for (const auto& a : mu.table->basis()) {
    const auto* zb = mu.space->find_block("z");
    int zdeg = 0;
    for (int i = 0; i < zb->size; ++i) zdeg += a[zb->offset + i];
    CHECK(zdeg <= 2);
  }
}

TEST_CASE("general boundary conditions involving derivatives") {
  // Steady transport F = z1_1 with a no-flux condition z1_2 = 0 on the top
  // face; y = x2^2 (3 - 2 x2) has zero slope there and solves the PDE.
  PDEProblem p = parse_problem_text(R"json({
    "name": "no-flux",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}},
    "unknowns": 1,
    "pde": {"F": ["z1_1"]},
    "boundary": [
      {"piece": "x1=lo", "condition": "dirichlet", "values": ["x2^2*(3 - 2*x2)"]},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "free"},
      {"piece": "x2=hi", "condition": "general", "G": ["z1_2"]}
    ],
    "objective": {"sense": "both", "L": "y1^2"}
  })json");
  AssembledSDP sdp = build_sdp(p, 4);
  // The constrained face must carry the derivative block.
  const MeasureInfo& top = sdp.measure("mu_x2=hi");
  CHECK(top.space->find_block("z") != nullptr);
  bool found_general = false;
  for (const auto& row : sdp.rows)
    if (row.tag.rfind("boundary[x2=hi]", 0) == 0) found_general = true;
  CHECK(found_general);

  std::vector<Polynomial> y = {
      parse_polynomial("x2^2*(3 - 2*x2)", p.geometry.x_space)};
  Eigen::VectorXd s = graph_solution_vector(sdp, y);
  CHECK(max_row_residual(sdp, s) <= 1e-8);
  ResidualReport rep = check_solution(sdp.to_conic(), s);
  CHECK(rep.min_block_eigenvalue >= -1e-9);
}

TEST_CASE("boundary control channels assemble and solve") {
  // Flux control on the top face: z1_2 = u_b with u_b in [0, 1] and a zero
  // objective; the relaxation is feasible with optimal value zero.
  PDEProblem p = parse_problem_text(R"json({
    "name": "flux-control",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}},
    "unknowns": 1,
    "pde": {"F": ["z1_1"]},
    "boundary": [
      {"piece": "x1=lo", "condition": "dirichlet", "values": ["0.2"]},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "free"},
      {"piece": "x2=hi", "condition": "general", "G": ["z1_2"],
       "controls": {"count": 1, "bounds": [[0.0, 1.0]], "C": [["1"]]}}
    ],
    "objective": {"sense": "min", "L": "0"}
  })json");
  AssembledSDP sdp = build_sdp(p, 4);
  CHECK(sdp.find_measure("nu_x2=hi_1") != nullptr);
  CHECK(sdp.find_measure("nuhat_x2=hi_1") != nullptr);
  bool found_slack = false;
  for (const auto& row : sdp.rows)
    if (row.tag.rfind("slack[nu_x2=hi_1]", 0) == 0) found_slack = true;
  CHECK(found_slack);

  SolveResult res = solve(sdp.to_conic());
  CHECK(res.report.usable());
  CHECK(std::abs(res.report.primal_objective) <= 1e-6);
}

TEST_CASE("second-order transfer survives domain rescaling") {
  // Heat equation on a physical (non-unit) box; y = x2^2 + 2 x1 again.
  PDEProblem p = parse_problem_text(R"json({
    "name": "heat-rect",
    "domain": {"box": {"lo": [0.0, 0.0], "hi": [2.0, 3.0]}},
    "unknowns": 1,
    "pde": {"F": ["z1_1"], "B": [{"row": 1, "i": 2, "j": 2, "coeffs": ["-1"]}]},
    "boundary": [
      {"piece": "x1=lo", "condition": "dirichlet", "values": ["x2^2"]},
      {"piece": "x1=hi", "condition": "free"},
      {"piece": "x2=lo", "condition": "free"},
      {"piece": "x2=hi", "condition": "free"}
    ],
    "objective": {"sense": "both", "L": "y1^2"},
    "relaxation": {"d": 4}
  })json");
  AssembledSDP sdp = build_sdp(p, 4);
  std::vector<Polynomial> y = {
      parse_polynomial("x2^2 + 2*x1", p.geometry.x_space)};
  Eigen::VectorXd s = graph_solution_vector(sdp, y);
  CHECK(max_row_residual(sdp, s) <= 1e-8);
}
