#include "momentpde/problem.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace momentpde {

using nlohmann::json;

bool PDEProblem::has_controls() const {
  if (controls.count > 0) return true;
  for (const auto& [name, bc] : boundary)
    if (bc.controls.count > 0) return true;
  return false;
}

std::string PDEProblem::z_name(int k, int j) const {
  return "z" + std::to_string(k) + "_" + std::to_string(j);
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ProblemError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ProblemError(where + ": unknown key '" + key + "'");
}

Polynomial parse_or_throw(const json& j, const SpacePtr& space,
                          const std::string& where) {
  if (!j.is_string()) throw ProblemError(where + ": expected a polynomial string");
  try {
    return parse_polynomial(j.get<std::string>(), space);
  } catch (const ParseError& e) {
    throw ProblemError(where + ": " + e.what());
  }
}

std::pair<int, int> parse_z_name(const std::string& name, int n_y, int n,
                                 const std::string& where) {
  int k = 0, j = 0;
  if (name.size() >= 4 && name[0] == 'z') {
    auto us = name.find('_');
    if (us != std::string::npos) {
      try {
        k = std::stoi(name.substr(1, us - 1));
        j = std::stoi(name.substr(us + 1));
      } catch (...) {
        k = 0;
      }
    }
  }
  if (k < 1 || k > n_y || j < 1 || j > n)
    throw ProblemError(where + ": '" + name +
                       "' is not a derivative variable of this problem");
  return {k, j};
}

ControlDecl parse_controls(const json& j, int rows, const SpacePtr& xy_space,
                           const std::string& where) {
  check_keys(j, {"count", "bounds", "C", "L_u"}, where);
  ControlDecl ctl;
  ctl.count = j.value("count", 0);
  if (ctl.count < 0) throw ProblemError(where + ": count must be nonnegative");
  if (ctl.count == 0) return ctl;

  if (!j.contains("bounds"))
    throw ProblemError(where + ": bounds are required for controls");
  for (const auto& b : j.at("bounds")) {
    if (!b.is_array() || b.size() != 2)
      throw ProblemError(where + ": each bound must be [lo, hi]");
    double lo = b[0].get<double>(), hi = b[1].get<double>();
    if (!(lo < hi))
      throw ProblemError(where + ": empty input box [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
    ctl.bounds.push_back({lo, hi});
  }
  if (static_cast<int>(ctl.bounds.size()) != ctl.count)
    throw ProblemError(where + ": expected one bound pair per channel");

  if (j.contains("C")) {
    for (std::size_t r = 0; r < j.at("C").size(); ++r) {
      std::vector<Polynomial> row;
      for (std::size_t c = 0; c < j.at("C")[r].size(); ++c)
        row.push_back(parse_or_throw(j.at("C")[r][c], xy_space,
                                     where + ".C[" + std::to_string(r) + "]"));
      if (static_cast<int>(row.size()) != ctl.count)
        throw ProblemError(where + ".C: expected one column per channel");
      ctl.C.push_back(std::move(row));
    }
    if (static_cast<int>(ctl.C.size()) != rows)
      throw ProblemError(where + ".C: expected one row per equation (" +
                         std::to_string(rows) + ")");
  } else if (rows > 0) {
    throw ProblemError(where + ": C matrix required when the equation list is "
                       "nonempty");
  }
  if (j.contains("L_u")) {
    for (const auto& e : j.at("L_u"))
      ctl.L_u.push_back(parse_or_throw(e, xy_space, where + ".L_u"));
    if (static_cast<int>(ctl.L_u.size()) != ctl.count)
      throw ProblemError(where + ".L_u: expected one entry per channel");
  } else {
    for (int c = 0; c < ctl.count; ++c)
      ctl.L_u.push_back(Polynomial::zero(xy_space));
  }
  return ctl;
}

BlockBounds parse_bounds(const json& j, int count, const std::string& where) {
  BlockBounds b;
  if (j.is_string()) {
    if (j.get<std::string>() != "unbounded")
      throw ProblemError(where + ": expected \"unbounded\" or {lo, hi}");
    return b;
  }
  check_keys(j, {"lo", "hi"}, where);
  b.bounded = true;
  auto expand = [&](const json& v) {
    std::vector<double> out;
    if (v.is_number()) out.assign(count, v.get<double>());
    else
      for (const auto& e : v) out.push_back(e.get<double>());
    if (static_cast<int>(out.size()) != count)
      throw ProblemError(where + ": expected " + std::to_string(count) +
                         " bound entries");
    return out;
  };
  b.lo = expand(j.at("lo"));
  b.hi = expand(j.at("hi"));
  for (int i = 0; i < count; ++i)
    if (!(b.lo[i] < b.hi[i])) throw ProblemError(where + ": empty bound box");
  return b;
}

}  // namespace

PDEProblem parse_problem_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ProblemError(std::string("problem file is not valid JSON: ") + e.what());
  }
  check_keys(root,
             {"name", "domain", "unknowns", "pde", "boundary", "controls",
              "objective", "bounds", "reductions", "relaxation"},
             "problem");

  PDEProblem p;
  p.name = root.value("name", "problem");

  // Domain.
  if (!root.contains("domain")) throw ProblemError("domain is required");
  check_keys(root.at("domain"), {"box"}, "domain");
  check_keys(root.at("domain").at("box"), {"lo", "hi"}, "domain.box");
  std::vector<double> lo = root.at("domain").at("box").at("lo").get<std::vector<double>>();
  std::vector<double> hi = root.at("domain").at("box").at("hi").get<std::vector<double>>();
  try {
    p.geometry = box_domain(lo, hi);
  } catch (const std::exception& e) {
    throw ProblemError(std::string("domain.box: ") + e.what());
  }
  const int n = p.geometry.dim();

  p.n_y = root.value("unknowns", 1);
  if (p.n_y < 1) throw ProblemError("unknowns: must be at least 1");

  // Reductions come first: they determine the kept z block.
  std::set<std::pair<int, int>> eliminated;
  if (root.contains("reductions")) {
    for (const auto& r : root.at("reductions")) {
      check_keys(r, {"z", "expr", "control_coeffs"}, "reductions[]");
      auto [k, j] = parse_z_name(r.at("z").get<std::string>(), p.n_y, n,
                                 "reductions[].z");
      if (!eliminated.insert({k, j}).second)
        throw ProblemError("reductions: z" + std::to_string(k) + "_" +
                           std::to_string(j) + " eliminated twice");
    }
  }

  // Spaces.
  std::vector<std::string> xnames, ynames, znames;
  for (int j = 1; j <= n; ++j) xnames.push_back("x" + std::to_string(j));
  for (int k = 1; k <= p.n_y; ++k) ynames.push_back("y" + std::to_string(k));
  for (int k = 1; k <= p.n_y; ++k)
    for (int j = 1; j <= n; ++j)
      if (!eliminated.count({k, j})) znames.push_back(p.z_name(k, j));
  p.kept_z = znames;
  p.full_space = VariableSpace::create({{"x", xnames}, {"y", ynames}, {"z", znames}});
  p.xy_space = VariableSpace::create({{"x", xnames}, {"y", ynames}});

  // PDE rows.
  int n_F = 0;
  if (root.contains("pde")) {
    check_keys(root.at("pde"), {"F", "B"}, "pde");
    if (root.at("pde").contains("F"))
      for (const auto& f : root.at("pde").at("F"))
        p.F.push_back(parse_or_throw(f, p.full_space, "pde.F"));
    n_F = static_cast<int>(p.F.size());
    if (root.at("pde").contains("B")) {
      for (const auto& bj : root.at("pde").at("B")) {
        check_keys(bj, {"row", "i", "j", "coeffs"}, "pde.B[]");
        int row = bj.at("row").get<int>();
        int bi = bj.at("i").get<int>(), bjj = bj.at("j").get<int>();
        if (row < 1 || row > n_F)
          throw ProblemError("pde.B: row index out of range");
        if (bi < 1 || bi > n || bjj < 1 || bjj > n || bi > bjj)
          throw ProblemError("pde.B: (i, j) must satisfy 1 <= i <= j <= n");
        auto& mat = p.B[{bi, bjj}];
        if (mat.empty())
          mat.assign(n_F, std::vector<Polynomial>(p.n_y, Polynomial::zero(p.xy_space)));
        const auto& coeffs = bj.at("coeffs");
        if (static_cast<int>(coeffs.size()) != p.n_y)
          throw ProblemError("pde.B: expected one coefficient per unknown");
        for (int k = 0; k < p.n_y; ++k)
          mat[row - 1][k] = parse_or_throw(coeffs[k], p.xy_space, "pde.B.coeffs");
      }
    }
  }

  // Substitution expressions (need the final spaces).
  if (root.contains("reductions")) {
    for (const auto& r : root.at("reductions")) {
      Substitution sub;
      std::tie(sub.k, sub.j) =
          parse_z_name(r.at("z").get<std::string>(), p.n_y, n, "reductions[].z");
      sub.expr = parse_or_throw(r.at("expr"), p.full_space, "reductions[].expr");
      if (r.contains("control_coeffs"))
        for (const auto& cc : r.at("control_coeffs"))
          sub.control_coeffs.push_back(
              parse_or_throw(cc, p.xy_space, "reductions[].control_coeffs"));
      p.substitutions.push_back(std::move(sub));
    }
  }

  // Distributed controls.
  if (root.contains("controls"))
    p.controls = parse_controls(root.at("controls"), n_F, p.xy_space, "controls");
  for (const auto& sub : p.substitutions)
    if (!sub.control_coeffs.empty() &&
        static_cast<int>(sub.control_coeffs.size()) != p.controls.count)
      throw ProblemError("reductions[].control_coeffs: expected one entry per "
                         "distributed control channel");

  // Boundary conditions.
  if (!root.contains("boundary")) throw ProblemError("boundary is required");
  std::set<std::string> covered;
  for (const auto& bj : root.at("boundary")) {
    check_keys(bj, {"piece", "condition", "values", "G", "partner", "map", "controls"},
               "boundary[]");
    std::string piece = bj.at("piece").get<std::string>();
    const BoundaryPiece* bp = p.geometry.find_piece(piece);
    if (bp == nullptr) throw ProblemError("boundary: unknown piece '" + piece + "'");
    if (covered.count(piece))
      throw ProblemError("boundary: piece '" + piece + "' has two conditions");

    BoundaryConditionDecl bc;
    std::string cond = bj.at("condition").get<std::string>();
    if (cond == "free") {
      bc.type = BcType::free_piece;
    } else if (cond == "dirichlet") {
      bc.type = BcType::dirichlet;
      for (const auto& v : bj.at("values"))
        bc.dirichlet.push_back(
            parse_or_throw(v, p.geometry.x_space, "boundary[].values"));
      if (static_cast<int>(bc.dirichlet.size()) != p.n_y)
        throw ProblemError("boundary[" + piece +
                           "]: expected one value per unknown");
    } else if (cond == "general") {
      bc.type = BcType::general;
      for (const auto& g : bj.at("G"))
        bc.general.push_back(parse_or_throw(g, p.full_space, "boundary[].G"));
      if (bj.contains("controls"))
        bc.controls = parse_controls(bj.at("controls"),
                                     static_cast<int>(bc.general.size()),
                                     p.xy_space, "boundary[" + piece + "].controls");
    } else if (cond == "periodic") {
      bc.type = BcType::periodic;
      bc.periodic_partner = bj.at("partner").get<std::string>();
      const BoundaryPiece* partner = p.geometry.find_piece(bc.periodic_partner);
      if (partner == nullptr)
        throw ProblemError("boundary: unknown partner piece '" +
                           bc.periodic_partner + "'");
      if (covered.count(bc.periodic_partner))
        throw ProblemError("boundary: periodic partner '" + bc.periodic_partner +
                           "' already has a condition");
      if (bj.contains("map"))
        for (const auto& mpart : bj.at("map"))
          bc.periodic_map.push_back(
              parse_or_throw(mpart, p.geometry.x_space, "boundary[].map"));
      if (!bc.periodic_map.empty() &&
          static_cast<int>(bc.periodic_map.size()) != n)
        throw ProblemError("boundary[].map: expected n components");
      covered.insert(bc.periodic_partner);
    } else {
      throw ProblemError("boundary: unknown condition '" + cond + "'");
    }
    covered.insert(piece);
    p.boundary[piece] = std::move(bc);
  }
  for (const auto& piece : p.geometry.pieces)
    if (!covered.count(piece.name))
      throw ProblemError("boundary: piece '" + piece.name +
                         "' has no condition (declare it free explicitly)");

  // Objective.
  if (!root.contains("objective")) throw ProblemError("objective is required");
  check_keys(root.at("objective"), {"sense", "L", "L_boundary"}, "objective");
  std::string sense = root.at("objective").value("sense", "both");
  if (sense == "both") p.sense = PDEProblem::Sense::both;
  else if (sense == "inf") p.sense = PDEProblem::Sense::inf_only;
  else if (sense == "sup") p.sense = PDEProblem::Sense::sup_only;
  else if (sense == "min") p.sense = PDEProblem::Sense::minimize;
  else throw ProblemError("objective.sense: unknown value '" + sense + "'");
  if (p.has_controls() && p.sense != PDEProblem::Sense::minimize)
    throw ProblemError("objective.sense: control problems must use \"min\"");
  p.L = root.at("objective").contains("L")
            ? parse_or_throw(root.at("objective").at("L"), p.full_space, "objective.L")
            : Polynomial::zero(p.full_space);
  if (root.at("objective").contains("L_boundary")) {
    for (const auto& [piece, poly] : root.at("objective").at("L_boundary").items()) {
      if (p.geometry.find_piece(piece) == nullptr)
        throw ProblemError("objective.L_boundary: unknown piece '" + piece + "'");
      p.L_boundary[piece] =
          parse_or_throw(poly, p.full_space, "objective.L_boundary");
    }
  }

  // Bounds on y and z.
  if (root.contains("bounds")) {
    check_keys(root.at("bounds"), {"y", "z"}, "bounds");
    if (root.at("bounds").contains("y"))
      p.y_bounds = parse_bounds(root.at("bounds").at("y"), p.n_y, "bounds.y");
    if (root.at("bounds").contains("z"))
      p.z_bounds = parse_bounds(root.at("bounds").at("z"),
                                static_cast<int>(p.kept_z.size()), "bounds.z");
  }

  // Relaxation defaults.
  if (root.contains("relaxation")) {
    check_keys(root.at("relaxation"), {"d", "d_tilde"}, "relaxation");
    p.default_d = root.at("relaxation").value("d", 4);
    if (root.at("relaxation").contains("d_tilde") &&
        !root.at("relaxation").at("d_tilde").is_null())
      p.d_tilde = root.at("relaxation").at("d_tilde").get<int>();
  }

  // Substitution expressions may not reference eliminated components and the
  // remaining data must live in the kept block (the parser guarantees the
  // latter by construction of the spaces).
  return p;
}

PDEProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

namespace {

// x -> lo + w * x and z_{k,j} -> z_{k,j} / w_j on whatever subset of the
// blocks the polynomial's space carries.
Polynomial to_unit_vars(const Polynomial& poly, const PDEProblem& p,
                        const std::vector<double>& lo,
                        const std::vector<double>& w) {
  const auto& space = poly.space();
  std::map<int, Polynomial> images;
  const int n = p.x_dim();
  for (int j = 0; j < n; ++j) {
    int v = space->find_var("x" + std::to_string(j + 1));
    if (v >= 0)
      images.emplace(v, Polynomial::variable(space, v) * w[j] +
                            Polynomial::constant(space, lo[j]));
  }
  for (int k = 1; k <= p.n_y; ++k) {
    for (int j = 1; j <= n; ++j) {
      int v = space->find_var(p.z_name(k, j));
      if (v >= 0)
        images.emplace(v, Polynomial::variable(space, v) * (1.0 / w[j - 1]));
    }
  }
  return poly_substitute(poly, space, images);
}

}  // namespace

std::vector<double> ScaledProblem::to_unit(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = (x[j] - x_lo[j]) / x_width[j];
  return out;
}

ScaledProblem scale_to_unit(const PDEProblem& phys) {
  const int n = phys.x_dim();
  ScaledProblem sp;
  sp.x_lo = phys.geometry.lo;
  sp.x_width.resize(n);
  for (int j = 0; j < n; ++j)
    sp.x_width[j] = phys.geometry.hi[j] - phys.geometry.lo[j];

  sp.volume_jacobian = 1.0;
  for (int j = 0; j < n; ++j) sp.volume_jacobian *= sp.x_width[j];
  for (const auto& piece : phys.geometry.pieces) {
    double fj = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != piece.fixed_coord) fj *= sp.x_width[m];
    sp.face_jacobian.push_back(fj);
  }

  PDEProblem& u = sp.unit;
  u = phys;
  u.geometry = box_domain(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));

  auto tr = [&](const Polynomial& poly) {
    return to_unit_vars(poly, phys, sp.x_lo, sp.x_width);
  };

  // Control channel maps onto [0,1].
  for (int c = 0; c < phys.controls.count; ++c) {
    sp.u_lo.push_back(phys.controls.bounds[c].first);
    sp.u_width.push_back(phys.controls.bounds[c].second -
                         phys.controls.bounds[c].first);
  }

  // PDE rows: F = C u  becomes  F - C*u_lo = (C .* u_width) * u_unit.
  u.F.clear();
  for (std::size_t r = 0; r < phys.F.size(); ++r) {
    Polynomial fr = tr(phys.F[r]);
    for (int c = 0; c < phys.controls.count; ++c)
      fr -= poly_reinterpret(tr(phys.controls.C[r][c]), phys.full_space) * sp.u_lo[c];
    u.F.push_back(std::move(fr));
  }
  u.controls.C.clear();
  for (std::size_t r = 0; r < phys.F.size(); ++r) {
    std::vector<Polynomial> row;
    for (int c = 0; c < phys.controls.count; ++c)
      row.push_back(tr(phys.controls.C[r][c]) * sp.u_width[c]);
    if (phys.controls.count > 0) u.controls.C.push_back(std::move(row));
  }

  // Substitutions: z_{k,j} = expr + sum_c coeff_c u_c, with the eliminated
  // variable itself rescaling by w_j.
  u.substitutions.clear();
  for (const auto& sub : phys.substitutions) {
    Substitution us;
    us.k = sub.k;
    us.j = sub.j;
    const double wj = sp.x_width[sub.j - 1];
    us.expr = tr(sub.expr) * wj;
    for (int c = 0; c < phys.controls.count; ++c) {
      if (!sub.control_coeffs.empty()) {
        Polynomial cc = tr(sub.control_coeffs[c]);
        us.expr += poly_reinterpret(cc, phys.full_space) * (wj * sp.u_lo[c]);
        us.control_coeffs.push_back(cc * (wj * sp.u_width[c]));
      } else {
        us.control_coeffs.push_back(Polynomial::zero(phys.xy_space));
      }
    }
    u.substitutions.push_back(std::move(us));
  }

  // Second derivatives scale with both direction widths:
  // d2y/dx_i dx_j = (1/(w_i w_j)) d2y/dxi_i dxi_j.
  for (auto& [ij, mat] : u.B) {
    const double scale = 1.0 / (sp.x_width[ij.first - 1] * sp.x_width[ij.second - 1]);
    for (auto& row : mat)
      for (auto& e : row) e = tr(e) * scale;
  }

  // Boundary conditions.
  for (auto& [name, bc] : u.boundary) {
    const BoundaryConditionDecl& pbc = phys.boundary.at(name);
    const BoundaryPiece* piece = phys.geometry.find_piece(name);
    switch (bc.type) {
      case BcType::free_piece:
        break;
      case BcType::dirichlet:
        for (int k = 0; k < phys.n_y; ++k) bc.dirichlet[k] = tr(pbc.dirichlet[k]);
        break;
      case BcType::general: {
        std::vector<double> ulo, uw;
        for (int c = 0; c < pbc.controls.count; ++c) {
          ulo.push_back(pbc.controls.bounds[c].first);
          uw.push_back(pbc.controls.bounds[c].second - pbc.controls.bounds[c].first);
        }
        sp.bc_u_lo[name] = ulo;
        sp.bc_u_width[name] = uw;
        for (std::size_t r = 0; r < pbc.general.size(); ++r) {
          bc.general[r] = tr(pbc.general[r]);
          for (int c = 0; c < pbc.controls.count; ++c)
            bc.general[r] -=
                poly_reinterpret(tr(pbc.controls.C[r][c]), phys.full_space) * ulo[c];
        }
        for (std::size_t r = 0; r < pbc.general.size(); ++r)
          for (int c = 0; c < pbc.controls.count; ++c)
            bc.controls.C[r][c] = tr(pbc.controls.C[r][c]) * uw[c];
        for (int c = 0; c < pbc.controls.count; ++c)
          bc.controls.L_u[c] =
              tr(pbc.controls.L_u[c]) * (sp.face_jacobian[piece->index] * uw[c]);
        break;
      }
      case BcType::periodic: {
        const int nn = n;
        std::vector<Polynomial> map = pbc.periodic_map;
        if (map.empty()) {
          // Default translation from this lo face to the partner hi face.
          map.reserve(nn);
          for (int l = 0; l < nn; ++l)
            map.push_back(Polynomial::variable(phys.geometry.x_space, l));
          map[piece->fixed_coord] += Polynomial::constant(
              phys.geometry.x_space, sp.x_width[piece->fixed_coord] *
                                         (piece->orientation < 0 ? 1.0 : -1.0));
        }
        bc.periodic_map.clear();
        for (int l = 0; l < nn; ++l) {
          // Unit map: (h_l(lo + w x) - lo_l) / w_l.
          Polynomial hl = to_unit_vars(map[l], phys, sp.x_lo, sp.x_width);
          bc.periodic_map.push_back(
              (hl - Polynomial::constant(phys.geometry.x_space, sp.x_lo[l])) *
              (1.0 / sp.x_width[l]));
        }
        break;
      }
    }
  }

  // Objective.
  u.L = tr(phys.L) * sp.volume_jacobian;
  u.controls.L_u.clear();
  for (int c = 0; c < phys.controls.count; ++c) {
    Polynomial lu = tr(phys.controls.L_u[c]);
    u.L += poly_reinterpret(lu, phys.full_space) * (sp.volume_jacobian * sp.u_lo[c]);
    u.controls.L_u.push_back(lu * (sp.volume_jacobian * sp.u_width[c]));
  }
  for (auto& [name, lb] : u.L_boundary) {
    const BoundaryPiece* piece = phys.geometry.find_piece(name);
    lb = tr(lb) * sp.face_jacobian[piece->index];
  }
  // Constant-offset part of boundary control costs (u_lo * L_ui) lands on
  // the boundary measure itself.
  for (const auto& [name, bc] : phys.boundary) {
    const BoundaryPiece* piece = phys.geometry.find_piece(name);
    for (int c = 0; c < bc.controls.count; ++c) {
      Polynomial offset =
          tr(bc.controls.L_u[c]) *
          (sp.face_jacobian[piece->index] * bc.controls.bounds[c].first);
      auto it = u.L_boundary.find(name);
      if (it == u.L_boundary.end())
        u.L_boundary[name] = poly_reinterpret(offset, phys.full_space);
      else
        it->second += poly_reinterpret(offset, phys.full_space);
    }
  }

  // Control channels in unit form span [0,1].
  for (int c = 0; c < u.controls.count; ++c) u.controls.bounds[c] = {0.0, 1.0};
  for (auto& [name, bc] : u.boundary)
    for (int c = 0; c < bc.controls.count; ++c) bc.controls.bounds[c] = {0.0, 1.0};

  // z bounds rescale by the width of their direction.
  if (phys.z_bounds.bounded) {
    for (std::size_t i = 0; i < phys.kept_z.size(); ++i) {
      const int j = parse_z_name(phys.kept_z[i], phys.n_y, n, "bounds.z").second;
      u.z_bounds.lo[i] = phys.z_bounds.lo[i] * sp.x_width[j - 1];
      u.z_bounds.hi[i] = phys.z_bounds.hi[i] * sp.x_width[j - 1];
    }
  }
  return sp;
}

}  // namespace momentpde
