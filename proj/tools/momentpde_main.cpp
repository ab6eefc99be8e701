// momentpde: bounds and feedback design for polynomial PDE problems via
// occupation-measure relaxations, plus a finite-difference validator.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>

#include "momentpde/assembly.hpp"
#include "momentpde/extract.hpp"
#include "momentpde/ipm.hpp"
#include "momentpde/sdpa.hpp"
#include "momentpde/simulate.hpp"

using namespace momentpde;
namespace fs = std::filesystem;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInvariant = 4;

struct CommonOpts {
  std::string problem_path;
  std::string out_dir = "out";
  int d = 0;  // 0: use the problem file default
  int d_tilde = -1;
  double tol_gap = 1e-8, tol_feas = 1e-8;
  int max_iter = 200;
  int psd_cap = 500;
  bool export_sdpa_flag = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

SolverOptions solver_options(const CommonOpts& c) {
  SolverOptions o;
  o.tol_gap = c.tol_gap;
  o.tol_feas = c.tol_feas;
  o.max_iter = c.max_iter;
  o.psd_total_cap = c.psd_cap;
  return o;
}

struct BoundResult {
  double value = 0.0;
  SolveReport report;
  Eigen::VectorXd s;
};

BoundResult solve_sense(const AssembledSDP& sdp, bool maximize,
                        const SolverOptions& opts) {
  ConicProblem cp = sdp.to_conic();
  if (maximize) cp.c = -cp.c;
  SolveResult res = solve(cp, opts);
  BoundResult out;
  out.report = res.report;
  out.value = maximize ? -res.report.primal_objective : res.report.primal_objective;
  out.s = std::move(res.s);
  return out;
}

void write_moment_csvs(const AssembledSDP& sdp, const Eigen::VectorXd& s,
                       const fs::path& dir, const std::string& prefix) {
  for (const auto& m : sdp.measures) {
    std::ofstream out(dir / (prefix + "moments_" + m.name + ".csv"));
    for (int v = 0; v < m.space->dim(); ++v)
      out << "alpha_" << m.space->var_name(v) << ",";
    out << "value\n";
    MomentVector mv = sdp.slice(s, m);
    for (int i = 0; i < m.table->size(); ++i) {
      for (auto e : m.table->basis()[i]) out << static_cast<int>(e) << ",";
      out << fmt(mv.values[i]) << "\n";
    }
  }
}

/// Mass identities implied by the marginal rows, asserted on solver output.
bool check_mass_identities(const AssembledSDP& sdp, const Eigen::VectorXd& s,
                           std::string* detail) {
  const double tol = 1e-5;
  for (const auto& m : sdp.measures) {
    if (m.role == MeasureRole::occupation) {
      if (std::abs(s[m.offset] - 1.0) > tol) {
        *detail = "mass of mu is " + fmt(s[m.offset]) + ", expected 1 (unit box)";
        return false;
      }
    }
    if (m.role == MeasureRole::boundary) {
      if (std::abs(s[m.offset] - 1.0) > tol) {
        *detail = "mass of " + m.name + " is " + fmt(s[m.offset]) +
                  ", expected the unit face area 1";
        return false;
      }
    }
  }
  return true;
}

std::string bound_line(const char* which, const BoundResult& r) {
  std::string line = std::string(which) + " " + fmt(r.value) + "  [" +
                     to_string(r.report.status) + ", iters " +
                     std::to_string(r.report.iterations) + ", gap " +
                     fmt(r.report.gap) + ", eq-residual " +
                     fmt(r.report.max_equality_residual) + "]";
  if (r.report.status != SolveStatus::optimal) line += "  (unverified)";
  return line;
}

void note_unbounded_blocks(const PDEProblem& p, std::ofstream& rep) {
  if (!p.y_bounds.bounded || (!p.kept_z.empty() && !p.z_bounds.bounded))
    rep << "note: Y or Z is unbounded; the hierarchy's convergence guarantees "
           "do not apply, bounds remain valid\n";
}

int run_analyze(const CommonOpts& c, bool write_report = true) {
  PDEProblem p = load_problem(c.problem_path);
  const int d = c.d > 0 ? c.d : p.default_d;
  if (p.has_controls()) {
    std::fprintf(stderr, "analyze: problem declares controls; use `control`\n");
    return kExitParse;
  }
  AssembledSDP sdp = build_sdp(p, d, c.d_tilde);
  SolverOptions opts = solver_options(c);

  const bool want_inf = p.sense != PDEProblem::Sense::sup_only;
  const bool want_sup = p.sense != PDEProblem::Sense::inf_only;
  BoundResult lo, hi;
  if (want_inf) lo = solve_sense(sdp, false, opts);
  if (want_sup) hi = solve_sense(sdp, true, opts);

  fs::create_directories(c.out_dir);
  if (c.export_sdpa_flag)
    write_sdpa_file((fs::path(c.out_dir) / (p.name + "_d" + std::to_string(d) + ".dat-s")).string(),
                    sdp.to_conic());

  std::ofstream rep(fs::path(c.out_dir) / "report.txt");
  rep << "problem: " << p.name << "\nrelaxation degree d = " << d
      << ", z-degree cap = " << sdp.d_tilde << "\n";
  rep << "measures: " << sdp.measures.size() << ", moment variables: " << sdp.nvars
      << ", equality rows: " << sdp.rows.size() << "\n";
  note_unbounded_blocks(p, rep);
  if (want_inf) rep << bound_line("lower bound:", lo) << "\n";
  if (want_sup) rep << bound_line("upper bound:", hi) << "\n";
  rep << "timing: lower " << (want_inf ? fmt(lo.report.wall_seconds) : "-")
      << " s, upper " << (want_sup ? fmt(hi.report.wall_seconds) : "-") << " s\n";

  std::ofstream csv(fs::path(c.out_dir) / "bounds.csv");
  csv << "d,sense,bound,status,iterations,gap,eq_residual,min_block_eig\n";
  auto csv_row = [&](const char* sense, const BoundResult& r) {
    csv << d << "," << sense << "," << fmt(r.value) << ","
        << to_string(r.report.status) << "," << r.report.iterations << ","
        << fmt(r.report.gap) << "," << fmt(r.report.max_equality_residual) << ","
        << fmt(r.report.min_block_eigenvalue) << "\n";
  };
  if (want_inf) csv_row("inf", lo);
  if (want_sup) csv_row("sup", hi);

  if (want_inf) write_moment_csvs(sdp, lo.s, c.out_dir, "inf_");
  if (want_sup) write_moment_csvs(sdp, hi.s, c.out_dir, "sup_");

  bool solver_ok = true;
  if (want_inf && !lo.report.usable()) solver_ok = false;
  if (want_sup && !hi.report.usable()) solver_ok = false;
  if (!solver_ok) {
    std::fprintf(stderr, "solver did not reach a usable status\n");
    return kExitSolver;
  }
  std::string detail;
  if (want_inf && !check_mass_identities(sdp, lo.s, &detail)) {
    std::fprintf(stderr, "invariant violation: %s\n", detail.c_str());
    return kExitInvariant;
  }
  if (write_report) {
    std::printf("%s d=%d\n", p.name.c_str(), d);
    if (want_inf) std::printf("  %s\n", bound_line("lower bound:", lo).c_str());
    if (want_sup) std::printf("  %s\n", bound_line("upper bound:", hi).c_str());
  }
  return 0;
}

Polynomial unit_kappa_to_physical(const Polynomial& kappa_unit,
                                  const ScaledProblem& scaled, double u_lo,
                                  double u_width) {
  // x_unit = (x - lo) / w, applied per coordinate; then affine output map.
  const auto& space = kappa_unit.space();
  std::map<int, Polynomial> images;
  for (std::size_t j = 0; j < scaled.x_lo.size(); ++j) {
    int v = space->find_var("x" + std::to_string(j + 1));
    if (v < 0) continue;
    Polynomial img = Polynomial::variable(space, v) * (1.0 / scaled.x_width[j]);
    img += Polynomial::constant(space, -scaled.x_lo[j] / scaled.x_width[j]);
    images.emplace(v, std::move(img));
  }
  Polynomial phys = poly_substitute(kappa_unit, space, images);
  phys *= u_width;
  phys += Polynomial::constant(space, u_lo);
  return phys;
}

int run_control(const CommonOpts& c, int kappa_degree, double kappa_cutoff) {
  PDEProblem p = load_problem(c.problem_path);
  const int d = c.d > 0 ? c.d : p.default_d;
  if (!p.has_controls()) {
    std::fprintf(stderr, "control: problem declares no controls; use `analyze`\n");
    return kExitParse;
  }
  AssembledSDP sdp = build_sdp(p, d, c.d_tilde);
  SolverOptions opts = solver_options(c);
  BoundResult res = solve_sense(sdp, false, opts);

  fs::create_directories(c.out_dir);
  if (c.export_sdpa_flag)
    write_sdpa_file((fs::path(c.out_dir) / (p.name + "_d" + std::to_string(d) + ".dat-s")).string(),
                    sdp.to_conic());

  std::ofstream rep(fs::path(c.out_dir) / "report.txt");
  rep << "problem: " << p.name << "\nrelaxation degree d = " << d << "\n";
  note_unbounded_blocks(p, rep);
  rep << bound_line("cost lower bound p_d:", res) << "\n";

  if (!res.report.usable()) {
    std::fprintf(stderr, "solver did not reach a usable status\n");
    return kExitSolver;
  }

  // Moment matching for every distributed channel. Moments carry the solve
  // accuracy, so the spectral cutoff tracks the achieved gap unless pinned.
  const double cutoff =
      kappa_cutoff >= 0
          ? kappa_cutoff
          : std::max(1e-9, std::min(1e-3, 10.0 * res.report.gap));
  const MeasureInfo& mu = sdp.measure("mu");
  auto xy_table = std::make_shared<MonomialTable>(p.xy_space, d);
  MomentVector mu_xy = marginal(sdp.slice(res.s, mu), xy_table);

  nlohmann::json ctrl_json;
  ctrl_json["problem"] = p.name;
  ctrl_json["d"] = d;
  ctrl_json["p_d"] = res.value;
  ctrl_json["channels"] = nlohmann::json::array();
  for (int ch = 0; ch < p.controls.count; ++ch) {
    const MeasureInfo& nu = sdp.measure("nu" + std::to_string(ch + 1));
    MomentVector nu_mv = sdp.slice(res.s, nu);
    ControllerPolynomial kappa =
        extract(mu_xy, nu_mv, d, kappa_degree > 0 ? kappa_degree : -1, cutoff);
    Polynomial phys = unit_kappa_to_physical(
        kappa.kappa, sdp.scaled, sdp.scaled.u_lo[ch], sdp.scaled.u_width[ch]);

    rep << "channel " << (ch + 1) << ": degree " << kappa.degree
        << ", matching residual " << fmt(kappa.residual)
        << ", moment-matrix spread " << fmt(kappa.cond_estimate) << "\n";
    rep << "  kappa_" << (ch + 1) << "(x, y) = " << phys.to_string() << "\n";

    std::ofstream txt(fs::path(c.out_dir) / ("controller_" + std::to_string(ch + 1) + ".txt"));
    txt << phys.to_string() << "\n";
    std::ofstream ccsv(fs::path(c.out_dir) / ("controller_" + std::to_string(ch + 1) + ".csv"));
    for (int v = 0; v < phys.space()->dim(); ++v)
      ccsv << "alpha_" << phys.space()->var_name(v) << ",";
    ccsv << "coefficient\n";
    for (const auto& [a, coef] : phys.terms()) {
      for (auto e : a) ccsv << static_cast<int>(e) << ",";
      ccsv << fmt(coef) << "\n";
    }

    nlohmann::json cj;
    cj["kappa"] = phys.to_string();
    cj["u_min"] = p.controls.bounds[ch].first;
    cj["u_max"] = p.controls.bounds[ch].second;
    cj["degree"] = kappa.degree;
    cj["residual"] = kappa.residual;
    ctrl_json["channels"].push_back(cj);
  }
  // Boundary channels, matched against the face measures.
  for (const auto& [name, bc] : p.boundary) {
    for (int ch = 0; ch < bc.controls.count; ++ch) {
      const MeasureInfo& face = sdp.measure("mu_" + name);
      const MeasureInfo& nub =
          sdp.measure("nu_" + name + "_" + std::to_string(ch + 1));
      auto face_xy_names = nub.space;  // (free x, y)
      auto face_table = std::make_shared<MonomialTable>(face_xy_names, d);
      MomentVector face_xy = marginal(sdp.slice(res.s, face), face_table);
      ControllerPolynomial kb = extract(face_xy, sdp.slice(res.s, nub), d,
                                        kappa_degree > 0 ? kappa_degree : -1, cutoff);
      Polynomial phys = unit_kappa_to_physical(
          kb.kappa, sdp.scaled, sdp.scaled.bc_u_lo.at(name)[ch],
          sdp.scaled.bc_u_width.at(name)[ch]);
      rep << "boundary channel " << name << "/" << (ch + 1) << ": degree "
          << kb.degree << ", residual " << fmt(kb.residual) << "\n";
      rep << "  kappa_" << name << "_" << (ch + 1) << " = " << phys.to_string() << "\n";
    }
  }

  std::ofstream cj(fs::path(c.out_dir) / "controller.json");
  cj << ctrl_json.dump(2) << "\n";

  std::ofstream csv(fs::path(c.out_dir) / "bounds.csv");
  csv << "d,sense,bound,status,iterations,gap,eq_residual,min_block_eig\n";
  csv << d << ",min," << fmt(res.value) << "," << to_string(res.report.status)
      << "," << res.report.iterations << "," << fmt(res.report.gap) << ","
      << fmt(res.report.max_equality_residual) << ","
      << fmt(res.report.min_block_eigenvalue) << "\n";
  write_moment_csvs(sdp, res.s, c.out_dir, "min_");

  std::string detail;
  if (!check_mass_identities(sdp, res.s, &detail)) {
    std::fprintf(stderr, "invariant violation: %s\n", detail.c_str());
    return kExitInvariant;
  }
  std::printf("%s d=%d\n  %s\n", p.name.c_str(), d,
              bound_line("cost lower bound p_d:", res).c_str());
  return 0;
}

int run_simulate(const CommonOpts& c, const std::string& controller_path,
                 int nx, double dt) {
  PDEProblem p = load_problem(c.problem_path);
  if (p.x_dim() != 2 || p.n_y != 1) {
    std::fprintf(stderr, "simulate: needs one time and one space coordinate "
                         "with a scalar unknown\n");
    return kExitParse;
  }
  const BoundaryConditionDecl* init = nullptr;
  for (const auto& [name, bc] : p.boundary)
    if (name == "x1=lo" && bc.type == BcType::dirichlet) init = &bc;
  if (init == nullptr) {
    std::fprintf(stderr, "simulate: the x1=lo piece must carry the initial "
                         "profile as a Dirichlet condition\n");
    return kExitParse;
  }
  Polynomial y0_poly = init->dirichlet[0];

  Feedback fb = nullptr;
  if (!controller_path.empty()) {
    std::ifstream in(controller_path);
    if (!in) {
      std::fprintf(stderr, "simulate: cannot open controller file\n");
      return kExitParse;
    }
    nlohmann::json cj = nlohmann::json::parse(in);
    const auto& ch = cj.at("channels").at(0);
    auto space = VariableSpace::create(
        {{"x", {"x1", "x2"}}, {"y", {"y1"}}});
    Polynomial kappa = parse_polynomial(ch.at("kappa").get<std::string>(), space);
    const double lo = ch.at("u_min").get<double>(), hi = ch.at("u_max").get<double>();
    fb = [kappa, lo, hi](double t, double x, double y) {
      const double v = kappa.eval({t, x, y});
      return std::min(hi, std::max(lo, v));
    };
  }

  SimOptions so;
  so.nx = nx;
  so.dt = dt;
  GridSolution sol = simulate(
      [&](double x) { return y0_poly.eval({0.0, x}); }, fb, p.geometry.lo[0],
      p.geometry.hi[0], p.geometry.lo[1], p.geometry.hi[1], so);

  fs::create_directories(c.out_dir);
  std::ofstream traj(fs::path(c.out_dir) / "trajectory.csv");
  traj << "t,x,y,u\n";
  for (std::size_t t = 0; t < sol.times.size(); ++t)
    for (int i = 0; i < sol.nx; ++i)
      traj << fmt(sol.times[t]) << "," << fmt(sol.cell_center(i)) << ","
           << fmt(sol.y[t][i]) << "," << fmt(sol.u[t][i]) << "\n";

  const double J = functional_eval(sol, p.L);
  const int last = static_cast<int>(sol.y.size()) - 1;
  std::ofstream sum(fs::path(c.out_dir) / "summary.csv");
  sum << "quantity,value\n";
  sum << "objective," << fmt(J) << "\n";
  sum << "initial_energy," << fmt(sol.space_integral_pow(0, 2)) << "\n";
  sum << "final_energy," << fmt(sol.space_integral_pow(last, 2)) << "\n";
  sum << "dt_halvings," << sol.dt_halvings << "\n";
  std::printf("objective %.9g, final energy %.6g (initial %.6g), steps %zu\n", J,
              sol.space_integral_pow(last, 2), sol.space_integral_pow(0, 2),
              sol.times.size() - 1);
  return 0;
}

int run_certify(const CommonOpts& c, const std::vector<std::string>& y_exprs,
                const std::vector<std::string>& u_exprs) {
  PDEProblem p = load_problem(c.problem_path);
  const int d = c.d > 0 ? c.d : p.default_d;
  if (static_cast<int>(y_exprs.size()) != p.n_y) {
    std::fprintf(stderr, "certify: expected %d --solution expressions\n", p.n_y);
    return kExitParse;
  }
  AssembledSDP sdp = build_sdp(p, d, c.d_tilde);
  std::vector<Polynomial> y;
  for (const auto& e : y_exprs) y.push_back(parse_polynomial(e, p.geometry.x_space));
  std::vector<Polynomial> u;
  for (const auto& e : u_exprs) u.push_back(parse_polynomial(e, p.geometry.x_space));

  Eigen::VectorXd s =
      graph_solution_vector(sdp, y, u.empty() ? nullptr : &u);

  // Per-family residuals.
  std::map<std::string, double> family_worst;
  double worst = 0.0;
  for (const auto& row : sdp.rows) {
    double v = -row.rhs;
    for (const auto& [col, coef] : row.terms) v += coef * s[col];
    std::string family = row.tag.substr(0, row.tag.find(' '));
    family_worst[family] = std::max(family_worst[family], std::abs(v));
    worst = std::max(worst, std::abs(v));
  }
  ResidualReport block_rep = check_solution(sdp.to_conic(), s);

  fs::create_directories(c.out_dir);
  std::ofstream rep(fs::path(c.out_dir) / "certify.txt");
  rep << "problem: " << p.name << ", d = " << d << "\n";
  rep << "max |A s - b| = " << fmt(worst) << "\n";
  for (const auto& [family, v] : family_worst)
    rep << "  " << family << ": " << fmt(v) << "\n";
  rep << "min block eigenvalue = " << fmt(block_rep.min_block_eigenvalue) << "\n";

  std::printf("max residual %.3e; min block eigenvalue %.3e\n", worst,
              block_rep.min_block_eigenvalue);
  for (const auto& [family, v] : family_worst)
    std::printf("  %-28s %.3e\n", family.c_str(), v);
  return 0;
}

int run_sweep(const CommonOpts& c, const std::string& d_list) {
  PDEProblem p = load_problem(c.problem_path);
  std::vector<int> ds;
  {
    std::stringstream ss(d_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) ds.push_back(std::stoi(tok));
  }
  if (ds.empty()) {
    std::fprintf(stderr, "sweep: empty degree list\n");
    return kExitParse;
  }
  const bool controlled = p.has_controls();

  struct SweepRow {
    int d;
    bool ok = false;
    double lower = 0, upper = 0;
    std::string lo_status = "-", hi_status = "-";
    double parse_s = 0, solve_s = 0;
    std::string error;
  };
  SolverOptions opts = solver_options(c);

  auto run_one = [&](int d) {
    SweepRow row;
    row.d = d;
    try {
      auto t0 = std::chrono::steady_clock::now();
      AssembledSDP sdp = build_sdp(p, d, c.d_tilde);
      row.parse_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0).count();
      BoundResult lo = solve_sense(sdp, false, opts);
      row.lower = lo.value;
      row.lo_status = to_string(lo.report.status);
      row.solve_s = lo.report.wall_seconds;
      if (!controlled) {
        BoundResult hi = solve_sense(sdp, true, opts);
        row.upper = hi.value;
        row.hi_status = to_string(hi.report.status);
        row.solve_s += hi.report.wall_seconds;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  // Independent relaxations solve as parallel jobs.
  std::vector<std::future<SweepRow>> jobs;
  for (int d : ds)
    jobs.push_back(std::async(std::launch::async, run_one, d));
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  fs::create_directories(c.out_dir);
  std::ofstream csv(fs::path(c.out_dir) / "sweep.csv");
  csv << "d,lower,lower_status,upper,upper_status,assemble_seconds,solve_seconds\n";
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.ok) {
      csv << r.d << ",failed: " << r.error << ",,,,\n";
      continue;
    }
    csv << r.d << "," << fmt(r.lower) << "," << r.lo_status << ","
        << (controlled ? "" : fmt(r.upper)) << "," << r.hi_status << ","
        << fmt(r.parse_s) << "," << fmt(r.solve_s) << "\n";
    if (i > 0 && rows[i - 1].ok) {
      if (r.lower < rows[i - 1].lower - 1e-6) monotone = false;
      if (!controlled && r.upper > rows[i - 1].upper + 1e-6) monotone = false;
    }
  }
  std::ofstream rep(fs::path(c.out_dir) / "report.txt");
  rep << "problem: " << p.name << "\n";
  rep << "hierarchy: lower bounds nondecreasing, upper nonincreasing: "
      << (monotone ? "confirmed" : "VIOLATED") << "\n";
  for (const auto& r : rows) {
    if (!r.ok) {
      rep << "d=" << r.d << ": failed (" << r.error << ")\n";
      continue;
    }
    rep << "d=" << r.d << ": lower " << fmt(r.lower) << " (" << r.lo_status << ")";
    if (!controlled) rep << ", upper " << fmt(r.upper) << " (" << r.hi_status << ")";
    rep << ", assemble " << fmt(r.parse_s) << " s, solve " << fmt(r.solve_s) << " s\n";
  }
  std::printf("sweep of %s over %zu degrees: monotonicity %s\n", p.name.c_str(),
              rows.size(), monotone ? "confirmed" : "VIOLATED");
  for (const auto& r : rows) {
    if (!r.ok) continue;
    if (controlled)
      std::printf("  d=%d  lower %.9g\n", r.d, r.lower);
    else
      std::printf("  d=%d  lower %.9g  upper %.9g\n", r.d, r.lower, r.upper);
  }
  return monotone ? 0 : kExitInvariant;
}

int run_export(const CommonOpts& c) {
  PDEProblem p = load_problem(c.problem_path);
  const int d = c.d > 0 ? c.d : p.default_d;
  AssembledSDP sdp = build_sdp(p, d, c.d_tilde);
  fs::create_directories(c.out_dir);
  const std::string path =
      (fs::path(c.out_dir) / (p.name + "_d" + std::to_string(d) + ".dat-s")).string();
  write_sdpa_file(path, sdp.to_conic());
  std::printf("wrote %s (%d variables, %zu rows, %zu blocks)\n", path.c_str(),
              sdp.nvars, sdp.rows.size(), sdp.to_conic().blocks.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"momentpde: occupation-measure bounds and feedback design for "
               "polynomial PDE problems"};
  app.require_subcommand(1);

  CommonOpts copts;
  std::string controller_path, d_list;
  std::vector<std::string> y_exprs, u_exprs;
  int nx = 100, kappa_degree = -1;
  double dt = 0.01, kappa_cutoff = -1.0;

  auto add_common = [&](CLI::App* sub, bool needs_d = true) {
    sub->add_option("--problem", copts.problem_path, "problem file (JSON)")
        ->required();
    if (needs_d) sub->add_option("--d", copts.d, "relaxation degree (even)");
    sub->add_option("--d-tilde", copts.d_tilde, "z-degree cap");
    sub->add_option("--out", copts.out_dir, "output directory");
    sub->add_option("--tol-gap", copts.tol_gap, "relative duality gap tolerance");
    sub->add_option("--tol-feas", copts.tol_feas, "feasibility tolerance");
    sub->add_option("--max-iter", copts.max_iter, "iteration cap");
    sub->add_option("--psd-cap", copts.psd_cap, "total PSD dimension cap");
    sub->add_flag("--export-sdpa", copts.export_sdpa_flag,
                  "also write the SDPA sparse file");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "bound a functional of the PDE");
  add_common(analyze);
  CLI::App* control = app.add_subcommand("control", "design a feedback law");
  add_common(control);
  control->add_option("--kappa-degree", kappa_degree,
                      "density degree for moment matching (default d/2)");
  control->add_option("--kappa-cutoff", kappa_cutoff,
                      "spectral cutoff for the matching system (default: "
                      "tracks the solve accuracy)");
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "finite-difference run");
  add_common(simulate_cmd, false);
  simulate_cmd->add_option("--controller", controller_path, "controller.json");
  simulate_cmd->add_option("--nx", nx, "grid points");
  simulate_cmd->add_option("--dt", dt, "time step");
  CLI::App* certify = app.add_subcommand("certify", "residuals of a candidate solution");
  add_common(certify);
  certify->add_option("--solution", y_exprs, "y_k(x) expressions")->required();
  certify->add_option("--control", u_exprs, "u_k(x) expressions");
  CLI::App* sweep = app.add_subcommand("sweep", "hierarchy over several degrees");
  add_common(sweep, false);
  sweep->add_option("--sweep", d_list, "comma-separated degrees")->required();
  CLI::App* exp = app.add_subcommand("export-sdpa", "write SDPA sparse format");
  add_common(exp);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return run_analyze(copts);
    if (app.got_subcommand(control)) return run_control(copts, kappa_degree, kappa_cutoff);
    if (app.got_subcommand(simulate_cmd))
      return run_simulate(copts, controller_path, nx, dt);
    if (app.got_subcommand(certify)) return run_certify(copts, y_exprs, u_exprs);
    if (app.got_subcommand(sweep)) return run_sweep(copts, d_list);
    if (app.got_subcommand(exp)) return run_export(copts);
  } catch (const ProblemError& e) {
    std::fprintf(stderr, "problem error: %s\n", e.what());
    return kExitParse;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const AssemblyError& e) {
    std::fprintf(stderr, "assembly error: %s\n", e.what());
    return kExitParse;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return 0;
}
