#include "momentpde/assembly.hpp"

#include <algorithm>
#include <functional>
#include <cstring>
#include <set>
#include <sstream>

#include "momentpde/quadrature.hpp"

namespace momentpde {

namespace {

std::string mono_str(const VariableSpace& space, const MultiIndex& a) {
  if (total_degree(a) == 0) return "1";
  std::ostringstream os;
  bool first = true;
  for (std::size_t v = 0; v < a.size(); ++v) {
    if (a[v] == 0) continue;
    if (!first) os << "*";
    os << space.var_name(static_cast<int>(v));
    if (a[v] > 1) os << "^" << static_cast<int>(a[v]);
    first = false;
  }
  return os.str();
}

// (v - lo)(hi - v) >= 0 for one variable of a space.
Polynomial range_ineq(const SpacePtr& space, int v, double lo, double hi) {
  Polynomial var = Polynomial::variable(space, v);
  return poly_mul(var - Polynomial::constant(space, lo),
                  Polynomial::constant(space, hi) - var);
}

// Redundant ball constraint R^2 - sum (v - center)^2 over a block.
Polynomial block_ball(const SpacePtr& space, const VariableSpace::Block& blk,
                      const std::vector<double>& lo,
                      const std::vector<double>& hi) {
  double r2 = 0.0;
  Polynomial acc(space);
  for (int i = 0; i < blk.size; ++i) {
    const double c = 0.5 * (lo[i] + hi[i]);
    const double h = 0.5 * (hi[i] - lo[i]);
    r2 += h * h;
    Polynomial dev = Polynomial::variable(space, blk.offset + i) -
                     Polynomial::constant(space, c);
    acc -= poly_mul(dev, dev);
  }
  acc += Polynomial::constant(space, r2);
  return acc;
}

}  // namespace

const MeasureInfo& AssembledSDP::measure(const std::string& name) const {
  const MeasureInfo* m = find_measure(name);
  if (m == nullptr) throw AssemblyError("no measure named " + name);
  return *m;
}

const MeasureInfo* AssembledSDP::find_measure(const std::string& name) const {
  for (const auto& m : measures)
    if (m.name == name) return &m;
  return nullptr;
}

MomentVector AssembledSDP::slice(const Eigen::VectorXd& s,
                                 const MeasureInfo& m) const {
  MomentVector out(m.table);
  out.values = s.segment(m.offset, m.count());
  return out;
}

int AssembledSDP::column(const MeasureInfo& m, const MultiIndex& a) const {
  int i = m.table->index(a);
  return i < 0 ? -1 : m.offset + i;
}

ConicProblem AssembledSDP::to_conic() const {
  ConicProblem cp;
  cp.nvars = nvars;
  cp.rows = rows;
  cp.c = c;
  cp.var_names.reserve(nvars);
  for (const auto& m : measures)
    for (const auto& a : m.table->basis())
      cp.var_names.push_back(m.name + ":" + mono_str(*m.space, a));

  for (const auto& m : measures) {
    auto add_block = [&](const Polynomial& g, const std::string& label) {
      std::map<std::string, int> g_block_degrees;
      for (const auto& b : m.space->blocks())
        g_block_degrees[b.name] = g.degree_in_block(b.name);
      const auto basis = matrix_row_basis(*m.table, d, g.degree(), g_block_degrees);
      const int k = static_cast<int>(basis.size());
      if (k == 0) return;
      ConicBlock blk;
      blk.size = k;
      blk.name = label;
      std::map<int, std::vector<ConicBlock::Entry>> per_var;
      MultiIndex sum(m.space->dim());
      for (int r = 0; r < k; ++r) {
        for (int cc = r; cc < k; ++cc) {
          for (const auto& [gm, gcoef] : g.terms()) {
            for (std::size_t t = 0; t < sum.size(); ++t)
              sum[t] = static_cast<std::uint8_t>(basis[r][t] + basis[cc][t] + gm[t]);
            const int idx = m.table->index(sum);
            if (idx < 0)
              throw AssemblyError("localizing structure references a moment "
                                  "outside the truncation in " + label);
            per_var[m.offset + idx].push_back({r, cc, gcoef});
          }
        }
      }
      for (auto& [var, entries] : per_var) {
        blk.vars.push_back(var);
        blk.entries.push_back(std::move(entries));
      }
      cp.blocks.push_back(std::move(blk));
    };

    add_block(Polynomial::constant(m.space, 1.0), "M[" + m.name + "]");
    for (std::size_t i = 0; i < m.support.size(); ++i)
      add_block(m.support[i], "L[" + m.name + "][" + std::to_string(i) + "]");
  }
  return cp;
}

struct Assembler::SplitPoly {
  Polynomial mu_part;                // over the occupation space
  std::vector<Polynomial> nu_parts;  // per distributed channel, over (x,y)
  bool any_nu = false;
};

Assembler::Assembler(const ScaledProblem& scaled, int d, int d_tilde)
    : scaled_(scaled), prob_(scaled.unit), d_(d), dtilde_(d_tilde) {
  if (d_ < 2 || d_ % 2 != 0)
    throw AssemblyError("relaxation degree d must be even and at least 2");
  if (dtilde_ < 0) dtilde_ = d_;

  const int n = prob_.x_dim();

  // Extended algebra space, with a u block for the distributed channels.
  {
    std::vector<std::pair<std::string, std::vector<std::string>>> blocks;
    std::vector<std::string> xnames, ynames, unames;
    for (int j = 1; j <= n; ++j) xnames.push_back("x" + std::to_string(j));
    for (int k = 1; k <= prob_.n_y; ++k) ynames.push_back("y" + std::to_string(k));
    blocks.push_back({"x", xnames});
    blocks.push_back({"y", ynames});
    blocks.push_back({"z", prob_.kept_z});
    for (int c = 1; c <= prob_.controls.count; ++c)
      unames.push_back("u" + std::to_string(c));
    blocks.push_back({"u", unames});
    ext_space_ = VariableSpace::create(blocks);
  }

  // Data degrees must fit the truncation.
  auto check_deg = [&](const Polynomial& p, const std::string& what) {
    if (p.degree() > d_)
      throw AssemblyError(what + " has degree " + std::to_string(p.degree()) +
                          " above the relaxation degree " + std::to_string(d_));
  };
  for (const auto& f : prob_.F) check_deg(f, "a PDE row");
  check_deg(prob_.L, "the objective");

  // Which pieces carry the derivative block.
  std::vector<bool> piece_needs_z(prob_.geometry.pieces.size(), false);
  const bool has_B = !prob_.B.empty();
  for (const auto& piece : prob_.geometry.pieces) {
    bool need = has_B;
    auto it = prob_.boundary.find(piece.name);
    if (it != prob_.boundary.end())
      for (const auto& g : it->second.general)
        if (g.depends_on_block("z")) need = true;
    auto lb = prob_.L_boundary.find(piece.name);
    if (lb != prob_.L_boundary.end() && lb->second.depends_on_block("z"))
      need = true;
    piece_needs_z[piece.index] = need;
  }

  std::map<std::string, int> zcap;
  if (!prob_.kept_z.empty() && dtilde_ < d_) zcap["z"] = dtilde_;

  int running_offset = 0;
  auto push_measure = [&](MeasureInfo m) {
    m.offset = running_offset;
    running_offset += m.count();
    measures_.push_back(std::move(m));
    return static_cast<int>(measures_.size()) - 1;
  };

  // Occupation measure on (x, y, kept z).
  {
    MeasureInfo m;
    m.role = MeasureRole::occupation;
    m.name = "mu";
    m.space = prob_.full_space;
    m.table = std::make_shared<MonomialTable>(m.space, d_, zcap);
    for (int j = 0; j < n; ++j)
      m.support.push_back(range_ineq(m.space, j, 0.0, 1.0));
    if (prob_.y_bounds.bounded) {
      const auto* yb = m.space->find_block("y");
      for (int k = 0; k < prob_.n_y; ++k)
        m.support.push_back(range_ineq(m.space, yb->offset + k,
                                       prob_.y_bounds.lo[k], prob_.y_bounds.hi[k]));
      m.support.push_back(block_ball(m.space, *yb, prob_.y_bounds.lo, prob_.y_bounds.hi));
    }
    if (prob_.z_bounds.bounded && !prob_.kept_z.empty()) {
      const auto* zb = m.space->find_block("z");
      for (int k = 0; k < zb->size; ++k)
        m.support.push_back(range_ineq(m.space, zb->offset + k,
                                       prob_.z_bounds.lo[k], prob_.z_bounds.hi[k]));
      m.support.push_back(block_ball(m.space, *zb, prob_.z_bounds.lo, prob_.z_bounds.hi));
    }
    mu_index_ = push_measure(std::move(m));
  }

  // Boundary measures on (free x, y [, kept z]).
  piece_measure_.assign(prob_.geometry.pieces.size(), -1);
  for (const auto& piece : prob_.geometry.pieces) {
    std::vector<std::string> xfree;
    for (int j = 0; j < n; ++j)
      if (j != piece.fixed_coord) xfree.push_back("x" + std::to_string(j + 1));
    std::vector<std::string> ynames;
    for (int k = 1; k <= prob_.n_y; ++k) ynames.push_back("y" + std::to_string(k));
    std::vector<std::pair<std::string, std::vector<std::string>>> blocks = {
        {"x", xfree}, {"y", ynames}};
    if (piece_needs_z[piece.index]) blocks.push_back({"z", prob_.kept_z});

    MeasureInfo m;
    m.role = MeasureRole::boundary;
    m.name = "mu_" + piece.name;
    m.piece = piece.index;
    m.space = VariableSpace::create(blocks);
    m.table = std::make_shared<MonomialTable>(
        m.space, d_, piece_needs_z[piece.index] ? zcap : std::map<std::string, int>{});
    const auto* xb = m.space->find_block("x");
    for (int i = 0; i < xb->size; ++i)
      m.support.push_back(range_ineq(m.space, xb->offset + i, 0.0, 1.0));
    if (prob_.y_bounds.bounded) {
      const auto* yb = m.space->find_block("y");
      for (int k = 0; k < prob_.n_y; ++k)
        m.support.push_back(range_ineq(m.space, yb->offset + k,
                                       prob_.y_bounds.lo[k], prob_.y_bounds.hi[k]));
      m.support.push_back(block_ball(m.space, *yb, prob_.y_bounds.lo, prob_.y_bounds.hi));
    }
    if (piece_needs_z[piece.index] && prob_.z_bounds.bounded && !prob_.kept_z.empty()) {
      const auto* zb = m.space->find_block("z");
      for (int k = 0; k < zb->size; ++k)
        m.support.push_back(range_ineq(m.space, zb->offset + k,
                                       prob_.z_bounds.lo[k], prob_.z_bounds.hi[k]));
    }
    piece_measure_[piece.index] = push_measure(std::move(m));
  }

  // Control and slack measures on (x, y).
  auto xy_support = [&](MeasureInfo& m) {
    for (int j = 0; j < n; ++j)
      m.support.push_back(range_ineq(m.space, j, 0.0, 1.0));
    if (prob_.y_bounds.bounded) {
      const auto* yb = m.space->find_block("y");
      for (int k = 0; k < prob_.n_y; ++k)
        m.support.push_back(range_ineq(m.space, yb->offset + k,
                                       prob_.y_bounds.lo[k], prob_.y_bounds.hi[k]));
      m.support.push_back(block_ball(m.space, *yb, prob_.y_bounds.lo, prob_.y_bounds.hi));
    }
  };
  for (int c = 0; c < prob_.controls.count; ++c) {
    MeasureInfo m;
    m.role = MeasureRole::control;
    m.name = "nu" + std::to_string(c + 1);
    m.channel = c;
    m.space = prob_.xy_space;
    m.table = std::make_shared<MonomialTable>(m.space, d_);
    xy_support(m);
    nu_measure_.push_back(push_measure(std::move(m)));

    MeasureInfo mh;
    mh.role = MeasureRole::slack;
    mh.name = "nuhat" + std::to_string(c + 1);
    mh.channel = c;
    mh.space = prob_.xy_space;
    mh.table = std::make_shared<MonomialTable>(mh.space, d_);
    xy_support(mh);
    nuhat_measure_.push_back(push_measure(std::move(mh)));
  }

  // Boundary control channels.
  for (const auto& piece : prob_.geometry.pieces) {
    auto it = prob_.boundary.find(piece.name);
    if (it == prob_.boundary.end()) continue;
    for (int c = 0; c < it->second.controls.count; ++c) {
      std::vector<std::string> xfree, ynames;
      for (int j = 0; j < n; ++j)
        if (j != piece.fixed_coord) xfree.push_back("x" + std::to_string(j + 1));
      for (int k = 1; k <= prob_.n_y; ++k) ynames.push_back("y" + std::to_string(k));
      std::vector<std::pair<std::string, std::vector<std::string>>> blocks = {
          {"x", xfree}, {"y", ynames}};

      MeasureInfo m;
      m.role = MeasureRole::boundary_control;
      m.name = "nu_" + piece.name + "_" + std::to_string(c + 1);
      m.piece = piece.index;
      m.channel = c;
      m.space = VariableSpace::create(blocks);
      m.table = std::make_shared<MonomialTable>(m.space, d_);
      const auto* xb = m.space->find_block("x");
      for (int i = 0; i < xb->size; ++i)
        m.support.push_back(range_ineq(m.space, xb->offset + i, 0.0, 1.0));
      if (prob_.y_bounds.bounded) {
        const auto* yb = m.space->find_block("y");
        for (int k = 0; k < prob_.n_y; ++k)
          m.support.push_back(range_ineq(m.space, yb->offset + k,
                                         prob_.y_bounds.lo[k], prob_.y_bounds.hi[k]));
      }
      MeasureInfo mh = m;
      mh.role = MeasureRole::boundary_slack;
      mh.name = "nuhat_" + piece.name + "_" + std::to_string(c + 1);
      bc_nu_measure_[{piece.index, c}] = push_measure(std::move(m));
      bc_nuhat_measure_[{piece.index, c}] = push_measure(std::move(mh));
    }
  }
}

Polynomial Assembler::z_value(int k, int j) const {
  const std::string name = prob_.z_name(k, j);
  int v = ext_space_->find_var(name);
  if (v >= 0) return Polynomial::variable(ext_space_, v);
  for (const auto& sub : prob_.substitutions) {
    if (sub.k != k || sub.j != j) continue;
    Polynomial out = poly_reinterpret(sub.expr, ext_space_);
    for (std::size_t c = 0; c < sub.control_coeffs.size(); ++c) {
      if (sub.control_coeffs[c].is_zero()) continue;
      int uv = ext_space_->find_var("u" + std::to_string(c + 1));
      out += poly_mul(poly_reinterpret(sub.control_coeffs[c], ext_space_),
                      Polynomial::variable(ext_space_, uv));
    }
    return out;
  }
  throw AssemblyError("derivative z" + std::to_string(k) + "_" + std::to_string(j) +
                      " is neither kept nor given a substitution");
}

Assembler::SplitPoly Assembler::split_controls(const Polynomial& ext,
                                               const std::string& where) const {
  SplitPoly out;
  out.mu_part = Polynomial(prob_.full_space);
  out.nu_parts.assign(prob_.controls.count, Polynomial(prob_.xy_space));
  const auto* ub = ext_space_->find_block("u");
  const auto* zb = ext_space_->find_block("z");
  for (const auto& [a, coef] : ext.terms()) {
    int udeg = 0, uchan = -1;
    for (int i = 0; i < ub->size; ++i) {
      if (a[ub->offset + i] > 0) {
        udeg += a[ub->offset + i];
        uchan = i;
      }
    }
    if (udeg == 0) {
      MultiIndex b(prob_.full_space->dim());
      for (int v = 0; v < prob_.full_space->dim(); ++v) b[v] = a[v];
      out.mu_part.add_term(b, coef);
      continue;
    }
    if (udeg > 1)
      throw AssemblyError(where + ": control inputs enter nonlinearly, which the "
                          "measure formulation cannot express");
    for (int i = 0; i < zb->size; ++i)
      if (a[zb->offset + i] > 0)
        throw AssemblyError(where + ": a control input multiplies a derivative "
                            "variable; such couplings are not representable");
    MultiIndex b(prob_.xy_space->dim());
    for (int v = 0; v < prob_.xy_space->dim(); ++v) b[v] = a[v];
    out.nu_parts[uchan].add_term(b, coef);
    out.any_nu = true;
  }
  return out;
}

Polynomial Assembler::piece_restrict(const Polynomial& p,
                                     const MeasureInfo& m) const {
  const BoundaryPiece& piece = prob_.geometry.pieces[m.piece];
  std::map<int, Polynomial> images;
  int v = p.space()->find_var("x" + std::to_string(piece.fixed_coord + 1));
  if (v >= 0)
    images.emplace(v, Polynomial::constant(m.space, piece.fixed_value));
  try {
    return poly_substitute(p, m.space, images);
  } catch (const std::invalid_argument& e) {
    throw AssemblyError("restriction to piece " + piece.name + ": " + e.what());
  }
}

bool Assembler::emit(std::map<int, double>& row, const MeasureInfo& m,
                     const Polynomial& p, double sign) const {
  for (const auto& [a, coef] : p.terms()) {
    int i = m.table->index(a);
    if (i < 0) return false;
    row[m.offset + i] += sign * coef;
  }
  return true;
}

std::optional<SparseRow> Assembler::finish_row(std::map<int, double>& terms,
                                               double rhs, std::string tag) const {
  SparseRow row;
  for (const auto& [col, coef] : terms)
    if (coef != 0.0) row.terms.push_back({col, coef});
  if (row.terms.empty() && rhs == 0.0) return std::nullopt;
  row.rhs = rhs;
  row.tag = std::move(tag);
  return row;
}

std::optional<SparseRow> Assembler::stokes_row(int m, const MultiIndex& phi_a,
                                               bool& fits) const {
  fits = false;
  Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
  Polynomial integrand = poly_reinterpret(poly_diff(phi, m - 1), ext_space_);
  const auto* yb = prob_.xy_space->find_block("y");
  for (int k = 0; k < prob_.n_y; ++k) {
    Polynomial dphi = poly_diff(phi, yb->offset + k);
    if (dphi.is_zero()) continue;
    integrand += poly_mul(poly_reinterpret(dphi, ext_space_), z_value(k + 1, m));
  }
  SplitPoly split = split_controls(integrand, "stokes");

  std::map<int, double> row;
  bool ok = emit(row, measures_[mu_index_], split.mu_part, 1.0);
  for (int c = 0; ok && c < prob_.controls.count; ++c)
    if (!split.nu_parts[c].is_zero())
      ok = emit(row, measures_[nu_measure_[c]], split.nu_parts[c], 1.0);
  for (const auto& piece : prob_.geometry.pieces) {
    if (!ok) break;
    const Polynomial& normal_m = piece.normal_gradient[m - 1];
    if (normal_m.is_zero()) continue;
    const MeasureInfo& bm = measures_[piece_measure_[piece.index]];
    Polynomial q = poly_mul(phi, poly_reinterpret(normal_m, prob_.xy_space));
    ok = emit(row, bm, piece_restrict(q, bm), -1.0);
  }
  if (!ok) return std::nullopt;
  fits = true;
  return finish_row(row, 0.0,
                    "stokes[m=" + std::to_string(m) + "] phi=" +
                        mono_str(*prob_.xy_space, phi_a));
}

std::vector<SparseRow> Assembler::stokes_rows() const {
  std::vector<SparseRow> rows;
  const int n = prob_.x_dim();
  const auto phi_basis = mono_basis(*prob_.xy_space, d_);
  for (int m = 1; m <= n; ++m) {
    for (const auto& phi_a : phi_basis) {
      bool fits = false;
      auto row = stokes_row(m, phi_a, fits);
      if (row) rows.push_back(std::move(*row));
    }
  }
  return rows;
}

std::optional<SparseRow> Assembler::interior_row(int r_index,
                                                 const MultiIndex& phi_a,
                                                 bool& fits) const {
  fits = false;
  const auto* yb_xy = prob_.xy_space->find_block("y");
  const std::size_t r = static_cast<std::size_t>(r_index);
  Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
  Polynomial phi_ext = poly_reinterpret(phi, ext_space_);

  Polynomial integrand =
      poly_mul(phi_ext, poly_reinterpret(prob_.F[r], ext_space_));

  // Second-order terms, integrated by parts once.
  struct BoundaryTerm {
    int piece;
    Polynomial poly;  // over ext space before restriction
  };
  std::vector<BoundaryTerm> boundary_terms;
  for (const auto& [ij, mat] : prob_.B) {
    const int bi = ij.first, bj = ij.second;
    // sum_k B^{rk} z_{k,i}
    Polynomial Bz(ext_space_);
    for (int k = 0; k < prob_.n_y; ++k) {
      if (mat[r][k].is_zero()) continue;
      Bz += poly_mul(poly_reinterpret(mat[r][k], ext_space_), z_value(k + 1, bi));
    }
    if (Bz.is_zero()) continue;

    // T1: phi * [dB/dx_j + sum_l dB/dy_l z_{l,j}] z_{.,i}
    Polynomial T1(ext_space_);
    for (int k = 0; k < prob_.n_y; ++k) {
      if (mat[r][k].is_zero()) continue;
      Polynomial db = poly_diff(mat[r][k], bj - 1);
      Polynomial chain = poly_reinterpret(db, ext_space_);
      for (int l = 0; l < prob_.n_y; ++l) {
        Polynomial dby = poly_diff(mat[r][k], yb_xy->offset + l);
        if (dby.is_zero()) continue;
        chain += poly_mul(poly_reinterpret(dby, ext_space_), z_value(l + 1, bj));
      }
      T1 += poly_mul(chain, z_value(k + 1, bi));
    }
    T1 = poly_mul(phi_ext, T1);

    // T2: [dphi/dx_j + sum_l dphi/dy_l z_{l,j}] * sum_k B^{rk} z_{k,i}
    Polynomial dphi_chain = poly_reinterpret(poly_diff(phi, bj - 1), ext_space_);
    for (int l = 0; l < prob_.n_y; ++l) {
      Polynomial dphy = poly_diff(phi, yb_xy->offset + l);
      if (dphy.is_zero()) continue;
      dphi_chain += poly_mul(poly_reinterpret(dphy, ext_space_), z_value(l + 1, bj));
    }
    Polynomial T2 = poly_mul(dphi_chain, Bz);

    integrand -= T1;
    integrand -= T2;

    // T3: boundary transfer + phi B z_{.,i} eta_j.
    for (const auto& piece : prob_.geometry.pieces) {
      const Polynomial& normal_j = piece.normal_gradient[bj - 1];
      if (normal_j.is_zero()) continue;
      boundary_terms.push_back(
          {piece.index,
           poly_mul(poly_mul(phi_ext, Bz),
                    poly_reinterpret(normal_j, ext_space_))});
    }
  }

  SplitPoly split = split_controls(integrand, "interior");
  // Control coupling C u on the right-hand side.
  for (int c = 0; c < prob_.controls.count; ++c) {
    if (prob_.controls.C.empty() || prob_.controls.C[r][c].is_zero()) continue;
    split.nu_parts[c] -= poly_mul(phi, prob_.controls.C[r][c]);
    split.any_nu = true;
  }

  std::map<int, double> row;
  bool ok = emit(row, measures_[mu_index_], split.mu_part, 1.0);
  for (int c = 0; ok && c < prob_.controls.count; ++c)
    if (!split.nu_parts[c].is_zero())
      ok = emit(row, measures_[nu_measure_[c]], split.nu_parts[c], 1.0);
  for (const auto& bt : boundary_terms) {
    if (!ok) break;
    SplitPoly bsplit = split_controls(bt.poly, "interior boundary transfer");
    if (bsplit.any_nu)
      throw AssemblyError(
          "second-order boundary transfer couples to a control input; "
          "this combination is not representable");
    const MeasureInfo& bm = measures_[piece_measure_[bt.piece]];
    ok = emit(row, bm, piece_restrict(bsplit.mu_part, bm), 1.0);
  }
  if (!ok) return std::nullopt;
  fits = true;
  return finish_row(row, 0.0,
                    "interior[r=" + std::to_string(r + 1) + "] phi=" +
                        mono_str(*prob_.xy_space, phi_a));
}

std::vector<SparseRow> Assembler::interior_rows() const {
  std::vector<SparseRow> rows;
  const auto phi_basis = mono_basis(*prob_.xy_space, d_);
  for (std::size_t r = 0; r < prob_.F.size(); ++r) {
    for (const auto& phi_a : phi_basis) {
      bool fits = false;
      auto row = interior_row(static_cast<int>(r), phi_a, fits);
      if (row) rows.push_back(std::move(*row));
    }
  }
  return rows;
}

std::vector<SparseRow> Assembler::boundary_rows() const {
  std::vector<SparseRow> rows;
  const auto phi_basis = mono_basis(*prob_.xy_space, d_);
  const auto* yb = prob_.xy_space->find_block("y");

  for (const auto& piece : prob_.geometry.pieces) {
    auto it = prob_.boundary.find(piece.name);
    if (it == prob_.boundary.end()) continue;
    const BoundaryConditionDecl& bc = it->second;
    const MeasureInfo& bm = measures_[piece_measure_[piece.index]];

    if (bc.type == BcType::general) {
      for (std::size_t r = 0; r < bc.general.size(); ++r) {
        for (const auto& phi_a : phi_basis) {
          Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
          Polynomial p = poly_mul(poly_reinterpret(phi, prob_.full_space),
                                  bc.general[r]);
          std::map<int, double> row;
          bool ok = emit(row, bm, piece_restrict(p, bm), 1.0);
          for (int c = 0; ok && c < bc.controls.count; ++c) {
            if (bc.controls.C[r][c].is_zero()) continue;
            const MeasureInfo& nm =
                measures_[bc_nu_measure_.at({piece.index, c})];
            ok = emit(row, nm,
                      piece_restrict(poly_mul(phi, bc.controls.C[r][c]), nm), -1.0);
          }
          if (!ok) continue;
          auto finished = finish_row(
              row, 0.0,
              "boundary[" + piece.name + "][g=" + std::to_string(r + 1) +
                  "] phi=" + mono_str(*prob_.xy_space, phi_a));
          if (finished) rows.push_back(std::move(*finished));
        }
      }
    } else if (bc.type == BcType::dirichlet) {
      for (const auto& phi_a : phi_basis) {
        Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
        std::map<int, double> row;
        if (!emit(row, bm, piece_restrict(phi, bm), 1.0)) continue;
        // Right-hand side: substitute y = h(x) and integrate over the face.
        std::map<int, Polynomial> images;
        for (int k = 0; k < prob_.n_y; ++k)
          images.emplace(yb->offset + k,
                         poly_reinterpret(bc.dirichlet[k], prob_.geometry.x_space));
        Polynomial on_face =
            poly_substitute(phi, prob_.geometry.x_space, images);
        const double rhs = surface_integral(prob_.geometry, piece, on_face);
        auto finished = finish_row(row, rhs,
                                   "dirichlet[" + piece.name + "] phi=" +
                                       mono_str(*prob_.xy_space, phi_a));
        if (finished) rows.push_back(std::move(*finished));
      }
    } else if (bc.type == BcType::periodic) {
      const BoundaryPiece* target = prob_.geometry.find_piece(bc.periodic_partner);
      const MeasureInfo& tm = measures_[piece_measure_[target->index]];
      // The map must push the surface measure of this piece onto the target.
      {
        auto sigma_basis = mono_basis(*prob_.geometry.x_space, d_);
        for (const auto& a : sigma_basis) {
          Polynomial mono = Polynomial::monomial(prob_.geometry.x_space, a, 1.0);
          std::map<int, Polynomial> ximg;
          for (int l = 0; l < prob_.x_dim(); ++l)
            ximg.emplace(l, bc.periodic_map[l]);
          Polynomial pulled = poly_substitute(mono, prob_.geometry.x_space, ximg);
          const double lhs = surface_integral(prob_.geometry, *target, mono);
          const double rhs = surface_integral(prob_.geometry, piece, pulled);
          if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(lhs)))
            throw AssemblyError("periodic map between " + piece.name + " and " +
                                bc.periodic_partner +
                                " does not preserve the surface measure");
        }
      }
      for (const auto& phi_a : phi_basis) {
        Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
        std::map<int, Polynomial> ximg;
        for (int l = 0; l < prob_.x_dim(); ++l)
          ximg.emplace(l, poly_reinterpret(bc.periodic_map[l], prob_.xy_space));
        Polynomial composed = poly_substitute(phi, prob_.xy_space, ximg);
        std::map<int, double> row;
        bool ok = emit(row, tm, piece_restrict(phi, tm), 1.0) &&
                  emit(row, bm, piece_restrict(composed, bm), -1.0);
        if (!ok) continue;
        auto finished = finish_row(row, 0.0,
                                   "periodic[" + piece.name + "->" +
                                       bc.periodic_partner + "] phi=" +
                                       mono_str(*prob_.xy_space, phi_a));
        if (finished) rows.push_back(std::move(*finished));
      }
    }
  }
  return rows;
}

std::vector<SparseRow> Assembler::marginal_rows() const {
  std::vector<SparseRow> rows;
  const auto psi_basis = mono_basis(*prob_.geometry.x_space, d_);
  for (const auto& piece : prob_.geometry.pieces) {
    const MeasureInfo& bm = measures_[piece_measure_[piece.index]];
    for (const auto& a : psi_basis) {
      Polynomial psi = Polynomial::monomial(prob_.geometry.x_space, a, 1.0);
      std::map<int, double> row;
      if (!emit(row, bm, piece_restrict(psi, bm), 1.0)) continue;
      const double rhs = surface_moment(prob_.geometry, piece, a);
      auto finished = finish_row(row, rhs,
                                 "marginal[" + piece.name + "] psi=" +
                                     mono_str(*prob_.geometry.x_space, a));
      if (finished) rows.push_back(std::move(*finished));
    }
  }
  return rows;
}

std::vector<SparseRow> Assembler::slack_rows() const {
  std::vector<SparseRow> rows;
  const auto phi_basis = mono_basis(*prob_.xy_space, d_);
  for (int c = 0; c < prob_.controls.count; ++c) {
    for (const auto& phi_a : phi_basis) {
      Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
      std::map<int, double> row;
      bool ok = emit(row, measures_[nu_measure_[c]], phi, 1.0) &&
                emit(row, measures_[nuhat_measure_[c]], phi, 1.0) &&
                emit(row, measures_[mu_index_],
                     poly_reinterpret(phi, prob_.full_space), -1.0);
      if (!ok) continue;
      auto finished = finish_row(row, 0.0,
                                 "slack[u" + std::to_string(c + 1) + "] phi=" +
                                     mono_str(*prob_.xy_space, phi_a));
      if (finished) rows.push_back(std::move(*finished));
    }
  }
  for (const auto& [key, nu_idx] : bc_nu_measure_) {
    const auto& [piece_idx, c] = key;
    const MeasureInfo& nm = measures_[nu_idx];
    const MeasureInfo& nh = measures_[bc_nuhat_measure_.at(key)];
    const MeasureInfo& bm = measures_[piece_measure_[piece_idx]];
    for (const auto& phi_a : phi_basis) {
      Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
      std::map<int, double> row;
      bool ok = emit(row, nm, piece_restrict(phi, nm), 1.0) &&
                emit(row, nh, piece_restrict(phi, nh), 1.0) &&
                emit(row, bm, piece_restrict(phi, bm), -1.0);
      if (!ok) continue;
      auto finished = finish_row(
          row, 0.0,
          "slack[" + nm.name + "] phi=" + mono_str(*prob_.xy_space, phi_a));
      if (finished) rows.push_back(std::move(*finished));
    }
  }
  return rows;
}

Eigen::VectorXd Assembler::objective() const {
  int total = 0;
  for (const auto& m : measures_) total += m.count();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(total);
  auto add = [&](const MeasureInfo& m, const Polynomial& p) {
    for (const auto& [a, coef] : p.terms()) {
      int i = m.table->index(a);
      if (i < 0)
        throw AssemblyError("objective term " + mono_str(*p.space(), a) +
                            " exceeds the truncation of measure " + m.name);
      c[m.offset + i] += coef;
    }
  };
  add(measures_[mu_index_], prob_.L);
  for (const auto& [name, lb] : prob_.L_boundary) {
    const BoundaryPiece* piece = prob_.geometry.find_piece(name);
    const MeasureInfo& bm = measures_[piece_measure_[piece->index]];
    add(bm, piece_restrict(lb, bm));
  }
  for (int ch = 0; ch < prob_.controls.count; ++ch)
    if (!prob_.controls.L_u[ch].is_zero())
      add(measures_[nu_measure_[ch]], prob_.controls.L_u[ch]);
  for (const auto& [key, nu_idx] : bc_nu_measure_) {
    const auto& [piece_idx, ch] = key;
    const auto& bc = prob_.boundary.at(prob_.geometry.pieces[piece_idx].name);
    if (bc.controls.L_u[ch].is_zero()) continue;
    const MeasureInfo& nm = measures_[nu_idx];
    add(nm, piece_restrict(bc.controls.L_u[ch], nm));
  }
  return c;
}

namespace {

int family_test_degree(int d, const std::function<bool(const MultiIndex&)>& fits,
                       const SpacePtr& xy_space, const std::string& family) {
  for (int k = d; k >= 0; --k) {
    bool all_fit = true;
    for (const auto& a : mono_basis(*xy_space, k)) {
      if (total_degree(a) != k) continue;
      if (!fits(a)) {
        all_fit = false;
        break;
      }
    }
    if (all_fit) return k;
  }
  throw AssemblyError("relaxation degree too small for the " + family +
                      " family (no admissible test functions)");
}

}  // namespace

int Assembler::test_degree_stokes(int m) const {
  return family_test_degree(
      d_,
      [&](const MultiIndex& phi_a) {
        bool fits = false;
        stokes_row(m, phi_a, fits);
        return fits;
      },
      prob_.xy_space, "stokes[m=" + std::to_string(m) + "]");
}

int Assembler::test_degree_interior(int row_index) const {
  return family_test_degree(
      d_,
      [&](const MultiIndex& phi_a) {
        bool fits = false;
        interior_row(row_index, phi_a, fits);
        return fits;
      },
      prob_.xy_space, "interior[r=" + std::to_string(row_index + 1) + "]");
}

int Assembler::test_degree_boundary(const std::string& piece_name) const {
  const BoundaryPiece* piece = prob_.geometry.find_piece(piece_name);
  if (piece == nullptr) throw AssemblyError("unknown piece " + piece_name);
  const auto& bc = prob_.boundary.at(piece_name);
  const MeasureInfo& bm = measures_[piece_measure_[piece->index]];
  return family_test_degree(
      d_,
      [&](const MultiIndex& phi_a) {
        Polynomial phi = Polynomial::monomial(prob_.xy_space, phi_a, 1.0);
        std::map<int, double> row;
        if (bc.type == BcType::general) {
          for (const auto& g : bc.general) {
            Polynomial p = poly_mul(poly_reinterpret(phi, prob_.full_space), g);
            if (!emit(row, bm, piece_restrict(p, bm), 1.0)) return false;
          }
          return true;
        }
        if (bc.type == BcType::periodic) {
          std::map<int, Polynomial> ximg;
          for (int l = 0; l < prob_.x_dim(); ++l)
            ximg.emplace(l, poly_reinterpret(bc.periodic_map[l], prob_.xy_space));
          Polynomial composed = poly_substitute(phi, prob_.xy_space, ximg);
          return emit(row, bm, piece_restrict(composed, bm), 1.0);
        }
        return emit(row, bm, piece_restrict(phi, bm), 1.0);
      },
      prob_.xy_space, "boundary[" + piece_name + "]");
}

AssembledSDP Assembler::build() const {
  AssembledSDP out;
  out.scaled = scaled_;
  out.d = d_;
  out.d_tilde = dtilde_;
  out.measures = measures_;
  int total = 0;
  for (const auto& m : measures_) total += m.count();
  out.nvars = total;

  std::vector<SparseRow> all;
  auto append = [&all](std::vector<SparseRow> v) {
    for (auto& r : v) all.push_back(std::move(r));
  };
  append(stokes_rows());
  append(interior_rows());
  append(boundary_rows());
  append(marginal_rows());
  append(slack_rows());

  // Exact duplicate removal (bitwise over sorted terms and rhs).
  std::set<std::string> seen;
  for (auto& r : all) {
    std::string key;
    key.reserve(r.terms.size() * 12 + 8);
    for (const auto& [col, coef] : r.terms) {
      key.append(reinterpret_cast<const char*>(&col), sizeof(col));
      key.append(reinterpret_cast<const char*>(&coef), sizeof(coef));
    }
    key.append(reinterpret_cast<const char*>(&r.rhs), sizeof(double));
    if (seen.insert(std::move(key)).second) out.rows.push_back(std::move(r));
  }

  out.c = objective();
  return out;
}

AssembledSDP build_sdp(const PDEProblem& physical, int d, int d_tilde) {
  ScaledProblem scaled = scale_to_unit(physical);
  Assembler assembler(scaled, d, d_tilde);
  return assembler.build();
}

Eigen::VectorXd graph_solution_vector(const AssembledSDP& sdp,
                                      const std::vector<Polynomial>& y_phys,
                                      const std::vector<Polynomial>* u_phys) {
  const PDEProblem& prob = sdp.scaled.unit;
  const int n = prob.x_dim();
  if (static_cast<int>(y_phys.size()) != prob.n_y)
    throw AssemblyError("graph_solution_vector: expected one y polynomial per unknown");

  // Physical-solution fields evaluated at unit coordinates.
  std::vector<std::string> x_names;
  for (int j = 1; j <= n; ++j) x_names.push_back("x" + std::to_string(j));

  auto phys_point = [&](const std::vector<double>& xi) {
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j)
      x[j] = sdp.scaled.x_lo[j] + sdp.scaled.x_width[j] * xi[j];
    return x;
  };

  std::map<std::string, ScalarField> fields;
  for (int k = 0; k < prob.n_y; ++k) {
    Polynomial yk = y_phys[k];
    fields["y" + std::to_string(k + 1)] = [yk, phys_point](const std::vector<double>& xi) {
      return yk.eval(phys_point(xi));
    };
  }
  for (int k = 1; k <= prob.n_y; ++k) {
    for (int j = 1; j <= n; ++j) {
      const std::string name = prob.z_name(k, j);
      bool kept = false;
      for (const auto& zn : prob.kept_z) kept |= (zn == name);
      if (!kept) continue;
      Polynomial dz = poly_diff(y_phys[k - 1], j - 1);
      const double wj = sdp.scaled.x_width[j - 1];
      fields[name] = [dz, wj, phys_point](const std::vector<double>& xi) {
        return wj * dz.eval(phys_point(xi));
      };
    }
  }
  std::vector<ScalarField> u_unit(prob.controls.count);
  for (int c = 0; c < prob.controls.count; ++c) {
    if (u_phys == nullptr || static_cast<int>(u_phys->size()) <= c)
      throw AssemblyError("graph_solution_vector: control fields required");
    Polynomial uc = (*u_phys)[c];
    const double lo = sdp.scaled.u_lo[c], w = sdp.scaled.u_width[c];
    u_unit[c] = [uc, lo, w, phys_point](const std::vector<double>& xi) {
      return (uc.eval(phys_point(xi)) - lo) / w;
    };
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(sdp.nvars);
  for (const auto& m : sdp.measures) {
    std::vector<double> lo(n, 0.0), hi(n, 1.0);
    if (m.role == MeasureRole::boundary || m.role == MeasureRole::boundary_control ||
        m.role == MeasureRole::boundary_slack) {
      const BoundaryPiece& piece = sdp.scaled.unit.geometry.pieces[m.piece];
      lo[piece.fixed_coord] = hi[piece.fixed_coord] = piece.fixed_value;
    }
    ScalarField weight = nullptr;
    if (m.role == MeasureRole::control) weight = u_unit[m.channel];
    if (m.role == MeasureRole::slack) {
      ScalarField u = u_unit[m.channel];
      weight = [u](const std::vector<double>& xi) { return 1.0 - u(xi); };
    }
    if (m.role == MeasureRole::boundary_control || m.role == MeasureRole::boundary_slack)
      throw AssemblyError("graph_solution_vector: boundary controls not supported");
    MomentVector mv = graph_moments(m.table, lo, hi, x_names, fields, weight);
    s.segment(m.offset, m.count()) = mv.values;
  }
  return s;
}

}  // namespace momentpde
