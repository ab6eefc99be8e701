#include "momentpde/ipm.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace momentpde {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near-optimal";
    case SolveStatus::infeasible_certificate: return "infeasible-certificate";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BlockWork {
  MatrixXd X, Z;       // cone iterates
  MatrixXd W, V, G, Ginv;  // NT scaling, V = W^{-1}, W = G G'
  MatrixXd Rc;         // centrality right-hand side
  MatrixXd dX, dZ;
  MatrixXd Rx;         // M(s) - X
  MatrixXd Zinv;
};

// Symmetric eigendecomposition helpers.
void spectral(const MatrixXd& A, MatrixXd& Q, VectorXd& lam) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(A);
  Q = eig.eigenvectors();
  lam = eig.eigenvalues();
}

MatrixXd spectral_pow(const MatrixXd& A, double p, double floor_eig) {
  MatrixXd Q;
  VectorXd lam;
  spectral(A, Q, lam);
  VectorXd powed(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    powed[i] = std::pow(std::max(lam[i], floor_eig), p);
  return Q * powed.asDiagonal() * Q.transpose();
}

// Largest alpha with X + alpha*dX PSD, via the spectrum of L^{-1} dX L^{-T}.
double max_step(const MatrixXd& X, const MatrixXd& dX) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd L = llt.matrixL();
  MatrixXd K1 = L.triangularView<Eigen::Lower>().solve(dX);
  MatrixXd K1t = K1.transpose();
  MatrixXd K = L.triangularView<Eigen::Lower>().solve(K1t);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1e6;
  return -1.0 / lmin;
}

double block_inner(const MatrixXd& A, const MatrixXd& B) {
  return (A.array() * B.array()).sum();
}

}  // namespace

SolveResult solve(const ConicProblem& problem, const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  SolveResult out;
  SolveReport& rep = out.report;

  const int n = problem.nvars;
  if (problem.total_psd_dim() > opts.psd_total_cap)
    throw std::invalid_argument(
        "solve: total PSD dimension " + std::to_string(problem.total_psd_dim()) +
        " exceeds the cap " + std::to_string(opts.psd_total_cap));
  if (problem.blocks.empty())
    throw std::invalid_argument("solve: problem has no PSD blocks");

  // Presolve: duplicate and rank filtering of equality rows.
  bool inconsistent = false;
  std::vector<int> kept =
      presolve_rows(problem.rows, n, 1e-11, &inconsistent);
  rep.dropped_rows = static_cast<int>(problem.rows.size() - kept.size());
  if (inconsistent) rep.message = "presolve: dropped rows were inconsistent; ";

  const int m = static_cast<int>(kept.size());
  std::vector<const SparseRow*> A(m);
  VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    A[i] = &problem.rows[kept[i]];
    b[i] = A[i]->rhs;
  }

  const VectorXd& c = problem.c;
  const double bnorm = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
  const double cnorm = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;

  // Iterates: s free, X_j and Z_j strictly inside the cone.
  VectorXd s = VectorXd::Zero(n);
  VectorXd y = VectorXd::Zero(m);

  const double tau = std::max({1.0, bnorm, cnorm});
  std::vector<BlockWork> blk(problem.blocks.size());
  double sumdim = 0;
  for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
    const int k = problem.blocks[j].size;
    blk[j].X = MatrixXd::Identity(k, k) * tau;
    blk[j].Z = MatrixXd::Identity(k, k) * tau;
    sumdim += k;
  }

  auto apply_A = [&](const VectorXd& v) {
    VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (const auto& [col, coef] : A[i]->terms) acc += coef * v[col];
      r[i] = acc;
    }
    return r;
  };
  auto apply_At = [&](const VectorXd& w) {
    VectorXd r = VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
      for (const auto& [col, coef] : A[i]->terms) r[col] += coef * w[i];
    return r;
  };
  // The moment variables are free, so the equality manifold A s = b can be
  // enforced exactly by orthogonal projection after every update; the
  // interior-point iteration then only has to close the cone coupling.
  Eigen::LLT<Eigen::MatrixXd> AAt_llt;
  Eigen::MatrixXd At_dense;
  if (m > 0) {
    At_dense = Eigen::MatrixXd::Zero(n, m);
    for (int i = 0; i < m; ++i)
      for (const auto& [col, coef] : A[i]->terms) At_dense(col, i) += coef;
    Eigen::MatrixXd AAt = At_dense.transpose() * At_dense;
    AAt.diagonal().array() += 1e-14 * AAt.diagonal().cwiseAbs().maxCoeff();
    AAt_llt.compute(AAt);
    if (AAt_llt.info() != Eigen::Success)
      throw std::runtime_error("solve: equality rows are numerically singular "
                               "after presolve");
  }
  auto project_equalities = [&](VectorXd& v) {
    if (m == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
      VectorXd r = b - apply_A(v);
      if (r.cwiseAbs().maxCoeff() < 1e-15 * (1.0 + bnorm)) break;
      v.noalias() += At_dense * AAt_llt.solve(r);
    }
  };
  project_equalities(s);
  // Least-squares fit of the free multipliers to the current dual slacks.
  auto project_dual = [&](VectorXd& yv, const VectorXd& cf) {
    if (m == 0) return;
    VectorXd rd_cur = cf - apply_At(yv);
    yv.noalias() += AAt_llt.solve(At_dense.transpose() * rd_cur);
  };

  // F^*: adjoint of the block maps, applied to one matrix per block.
  auto apply_Fstar = [&](const std::vector<MatrixXd>& M) {
    VectorXd r = VectorXd::Zero(n);
    for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
      const ConicBlock& B = problem.blocks[j];
      for (std::size_t l = 0; l < B.vars.size(); ++l) {
        double acc = 0.0;
        for (const auto& e : B.entries[l])
          acc += e.coef * (e.r == e.c ? M[j](e.r, e.r) : 2.0 * M[j](e.r, e.c));
        r[B.vars[l]] += acc;
      }
    }
    return r;
  };

  double best_quality = 1e300;
  double plateau_best = 1e300;
  int plateau_count = 0;
  VectorXd best_s = s, best_y = y;
  double best_pobj = 0, best_dobj = 0, best_gaprel = 1e300, best_feas = 1e300;
  int stall = 0;
  double prev_mu = 1e300;
  rep.status = SolveStatus::numerical_failure;

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    // Residuals.
    VectorXd rp = b - apply_A(s);
    std::vector<MatrixXd> Zs(problem.blocks.size());
    double rx_norm = 0.0;
    for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
      blk[j].Rx = problem.blocks[j].at(s) - blk[j].X;
      rx_norm = std::max(rx_norm, blk[j].Rx.cwiseAbs().maxCoeff());
      Zs[j] = blk[j].Z;
    }
    VectorXd rd = c - apply_At(y) - apply_Fstar(Zs);

    double gap = 0.0;
    for (std::size_t j = 0; j < blk.size(); ++j)
      gap += block_inner(blk[j].X, blk[j].Z);
    const double mu = gap / sumdim;

    const double pobj = c.dot(s);
    const double dobj = m > 0 ? b.dot(y) : 0.0;
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pfeas =
        std::max(m > 0 ? rp.cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0,
                 rx_norm / (1.0 + tau));
    const double dfeas = rd.cwiseAbs().maxCoeff() / (1.0 + cnorm);
    const double feas = std::max(pfeas, dfeas);

    // Solution quality of the returned s itself: the cone membership of
    // M_j(s) is what certifies the bound, not the internal X coupling.
    double ms_mineig = 0.0;
    for (std::size_t j = 0; j < blk.size(); ++j) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(blk[j].X + blk[j].Rx);
      ms_mineig = std::min(ms_mineig, eig.eigenvalues().minCoeff());
    }
    const double sol_feas =
        std::max({m > 0 ? rp.cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0,
                  dfeas, -ms_mineig / (1.0 + tau)});

    if (opts.verbose)
      std::printf("it %3d  p %+.9e  d %+.9e  gap %.2e  rp %.2e rx %.2e rd %.2e  mu %.2e\n",
                  iter, pobj, dobj, relgap,
                  m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0, rx_norm,
                  rd.cwiseAbs().maxCoeff(), mu);
    if (opts.trace) opts.trace(iter, pobj, dobj, feas);

    const double quality = std::max(relgap, sol_feas);
    if (quality < best_quality) {
      best_quality = quality;
      best_s = s;
      best_y = y;
      best_pobj = pobj;
      best_dobj = dobj;
      best_gaprel = relgap;
      best_feas = sol_feas;
    }

    if (relgap <= opts.tol_gap && sol_feas <= opts.tol_feas) {
      rep.status = SolveStatus::optimal;
      break;
    }
    // Plateau: no meaningful progress on either measure for a stretch.
    if (quality > 0.995 * plateau_best && plateau_count++ >= 12) {
      rep.status = (best_feas <= 1e3 * opts.tol_feas && best_gaprel <= 1e-2)
                       ? SolveStatus::near_optimal
                       : SolveStatus::numerical_failure;
      rep.message += "progress plateaued; ";
      break;
    }
    if (quality <= 0.995 * plateau_best) {
      plateau_best = quality;
      plateau_count = 0;
    }

    // Unboundedness / infeasibility heuristics.
    if (pobj < -1e12 * (1.0 + cnorm) && pfeas <= opts.tol_feas * 10) {
      rep.status = SolveStatus::unbounded;
      rep.message += "primal objective diverges";
      break;
    }
    if (m > 0) {
      const double ynorm = y.cwiseAbs().maxCoeff();
      if (ynorm > 1e10 && b.dot(y) > 0) {
        VectorXd yn = y / b.dot(y);
        std::vector<MatrixXd> Zn(blk.size());
        for (std::size_t j = 0; j < blk.size(); ++j) Zn[j] = blk[j].Z / b.dot(y);
        const double cert = (apply_At(yn) + apply_Fstar(Zn)).cwiseAbs().maxCoeff();
        if (cert < 1e-6) {
          rep.status = SolveStatus::infeasible_certificate;
          rep.certificate_norm = cert;
          rep.message += "Farkas-type certificate of primal infeasibility";
          break;
        }
      }
    }

    if (mu > prev_mu * 0.999 && feas <= opts.tol_feas) {
      if (++stall >= 8) {
        rep.status = SolveStatus::near_optimal;
        rep.message += "progress stalled with feasibility attained";
        break;
      }
    } else {
      stall = 0;
    }
    prev_mu = mu;

    // Nesterov-Todd scaling for every block.
    bool scaling_ok = true;
    for (std::size_t j = 0; j < blk.size(); ++j) {
      BlockWork& w = blk[j];
      MatrixXd Xh = spectral_pow(w.X, 0.5, 1e-300);
      MatrixXd Xhi = spectral_pow(w.X, -0.5, 1e-300);
      MatrixXd S = Xh * w.Z * Xh;
      MatrixXd Shi = spectral_pow(S, -0.5, 1e-300);
      w.W = Xh * Shi * Xh;
      MatrixXd Sh = spectral_pow(S, 0.5, 1e-300);
      w.V = Xhi * Sh * Xhi;
      if (!w.W.allFinite() || !w.V.allFinite()) {
        scaling_ok = false;
        break;
      }
      MatrixXd Q;
      VectorXd lam;
      spectral(w.W, Q, lam);
      VectorXd lh(lam.size()), lhi(lam.size());
      for (int i = 0; i < lam.size(); ++i) {
        const double l = std::max(lam[i], 1e-300);
        lh[i] = std::sqrt(l);
        lhi[i] = 1.0 / lh[i];
      }
      w.G = Q * lh.asDiagonal();
      w.Ginv = lhi.asDiagonal() * Q.transpose();
      Eigen::LLT<MatrixXd> zllt(w.Z);
      if (zllt.info() != Eigen::Success) {
        scaling_ok = false;
        break;
      }
      w.Zinv = zllt.solve(MatrixXd::Identity(w.Z.rows(), w.Z.cols()));
    }
    if (!scaling_ok) {
      rep.message += "NT scaling failed";
      break;
    }

    // Schur matrix H_{ik} = sum_j <F_{j,i}, V_j F_{j,k} V_j>.
    MatrixXd H = MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < blk.size(); ++j) {
      const ConicBlock& B = problem.blocks[j];
      const MatrixXd& V = blk[j].V;
      const int nl = static_cast<int>(B.vars.size());
      MatrixXd Gl(B.size, B.size);
      for (int l = 0; l < nl; ++l) {
        Gl.setZero();
        for (const auto& e : B.entries[l]) {
          if (e.r == e.c)
            Gl.noalias() += e.coef * V.col(e.r) * V.row(e.r);
          else {
            Gl.noalias() += e.coef * V.col(e.r) * V.row(e.c);
            Gl.noalias() += e.coef * V.col(e.c) * V.row(e.r);
          }
        }
        for (int mloc = 0; mloc <= l; ++mloc) {
          double acc = 0.0;
          for (const auto& e : B.entries[mloc])
            acc += e.coef * (e.r == e.c ? Gl(e.r, e.r) : 2.0 * Gl(e.r, e.c));
          const int gi = B.vars[l], gk = B.vars[mloc];
          H(gi, gk) += acc;
          if (gi != gk) H(gk, gi) += acc;
        }
      }
    }
    // Tiny diagonal lift against free directions not touched by any block.
    const double hscale = H.diagonal().cwiseAbs().maxCoeff();
    H.diagonal().array() += std::max(1e-300, 1e-14 * hscale);

    Eigen::LLT<MatrixXd> Hllt(H);
    if (Hllt.info() != Eigen::Success) {
      rep.message += "Schur factorization failed";
      break;
    }

    Eigen::LLT<MatrixXd> Sllt;
    MatrixXd AHA;
    if (m > 0) {
      // Form A H^{-1} A' once per iteration.
      MatrixXd HiAt = Hllt.solve(At_dense);
      AHA.noalias() = At_dense.transpose() * HiAt;
      const double ascale = AHA.diagonal().cwiseAbs().maxCoeff();
      AHA.diagonal().array() += std::max(1e-300, 1e-14 * ascale);
      Sllt.compute(AHA);
      if (Sllt.info() != Eigen::Success) {
        rep.message += "KKT factorization failed";
        break;
      }
    }

    // H ds - A' dy = rhs1, A ds = rhs2, with iterative refinement against
    // the loss of accuracy in H as the barrier parameter collapses.
    auto solve_saddle = [&](const VectorXd& rhs1, const VectorXd& rhs2,
                            VectorXd& ds, VectorXd& dy) {
      auto apply_H = [&](const VectorXd& v) {
        std::vector<MatrixXd> Mv(blk.size());
        for (std::size_t j = 0; j < blk.size(); ++j)
          Mv[j] = blk[j].V * problem.blocks[j].linear_at(v) * blk[j].V;
        return VectorXd(apply_Fstar(Mv));
      };
      ds = VectorXd::Zero(n);
      dy = VectorXd::Zero(m);
      VectorXd e1 = rhs1, e2 = rhs2;
      for (int pass = 0; pass < 3; ++pass) {
        VectorXd cs, cy;
        if (m > 0) {
          VectorXd t = Hllt.solve(e1);
          cy = Sllt.solve(e2 - apply_A(t));
          cs = Hllt.solve(e1 + apply_At(cy));
        } else {
          cy = VectorXd();
          cs = Hllt.solve(e1);
        }
        ds += cs;
        if (m > 0) dy += cy;
        e1 = rhs1 - (apply_H(ds) - (m > 0 ? VectorXd(apply_At(dy)) : VectorXd::Zero(n)));
        if (m > 0) e2 = rhs2 - apply_A(ds);
        const double err = std::max(e1.cwiseAbs().maxCoeff(),
                                    m > 0 ? e2.cwiseAbs().maxCoeff() : 0.0);
        if (err < 1e-13 * (1.0 + rhs1.cwiseAbs().maxCoeff())) break;
      }
    };

    auto solve_kkt = [&](VectorXd& ds, VectorXd& dy) {
      // Rc and Rx enter through q = F^*(V (Rc - Rx) V).
      std::vector<MatrixXd> Q(blk.size());
      for (std::size_t j = 0; j < blk.size(); ++j)
        Q[j] = blk[j].V * (blk[j].Rc - blk[j].Rx) * blk[j].V;
      VectorXd q = apply_Fstar(Q);
      solve_saddle(q - rd, rp, ds, dy);
      for (std::size_t j = 0; j < blk.size(); ++j) {
        BlockWork& w = blk[j];
        w.dX = problem.blocks[j].linear_at(ds) + w.Rx;
        MatrixXd R = w.Rc - w.dX;
        w.dZ = w.V * R * w.V;
        w.dZ = 0.5 * (w.dZ + w.dZ.transpose()).eval();
        w.dX = 0.5 * (w.dX + w.dX.transpose()).eval();
      }
    };

    // Predictor (affine scaling direction).
    for (auto& w : blk) w.Rc = -w.X;
    VectorXd ds, dy;
    solve_kkt(ds, dy);

    double ap = 1e6, ad = 1e6;
    for (auto& w : blk) {
      ap = std::min(ap, max_step(w.X, w.dX));
      ad = std::min(ad, max_step(w.Z, w.dZ));
    }
    const double ap_aff = std::min(1.0, 0.99 * ap);
    const double ad_aff = std::min(1.0, 0.99 * ad);

    double gap_aff = 0.0;
    for (auto& w : blk)
      gap_aff += block_inner(w.X + ap_aff * w.dX, w.Z + ad_aff * w.dZ);
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / gap, 3.0);
    // Keep the barrier parameter from outrunning infeasibility, otherwise
    // the iterates pin to the cone boundary while residuals still linger.
    const double resid_abs =
        std::max(m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0,
                 rd.cwiseAbs().maxCoeff());
    if (mu > 0) sigma = std::max(sigma, std::min(1.0, 0.5 * resid_abs / mu));
    if (feas > relgap) sigma = std::max(sigma, 0.1);
    sigma = std::min(1.0, std::max(1e-10, sigma));
    const double zeta = sigma * mu;

    if (opts.use_corrector) {
      // Mehrotra corrector with the NT second-order term.
      for (auto& w : blk) {
        MatrixXd dXh = w.Ginv * w.dX * w.Ginv.transpose();
        MatrixXd dZh = w.G.transpose() * w.dZ * w.G;
        MatrixXd P = dXh * dZh;
        P = 0.5 * (P + P.transpose()).eval();
        MatrixXd Vs = w.G.transpose() * w.Z * w.G;
        Eigen::LLT<MatrixXd> vllt(Vs);
        MatrixXd corr;
        if (vllt.info() == Eigen::Success)
          corr = w.G * vllt.solve(P) * w.G.transpose();
        else
          corr = MatrixXd::Zero(w.X.rows(), w.X.cols());
        w.Rc = zeta * w.Zinv - w.X - 0.5 * (corr + corr.transpose());
      }
      solve_kkt(ds, dy);
    } else {
      for (auto& w : blk) w.Rc = zeta * w.Zinv - w.X;
      solve_kkt(ds, dy);
    }

    ap = 1e6;
    ad = 1e6;
    for (auto& w : blk) {
      ap = std::min(ap, max_step(w.X, w.dX));
      ad = std::min(ad, max_step(w.Z, w.dZ));
    }
    const double gamma = 0.9 + 0.08 * std::min({1.0, ap, ad});
    double alpha_p = std::min(1.0, gamma * ap);
    double alpha_d = std::min(1.0, gamma * ad);
    // Until the equalities hold, move primal and dual in lockstep.
    if (feas > 10.0 * opts.tol_feas) alpha_p = alpha_d = std::min(alpha_p, alpha_d);
    if (!(alpha_p > 1e-10) || !(alpha_d > 1e-10)) {
      rep.message += "step length collapsed";
      break;
    }

    s += alpha_p * ds;
    project_equalities(s);
    if (m > 0) y += alpha_d * dy;
    for (auto& w : blk) {
      w.X += alpha_p * w.dX;
      w.Z += alpha_d * w.dZ;
    }
    if (m > 0) {
      std::vector<MatrixXd> Zcur(blk.size());
      for (std::size_t j = 0; j < blk.size(); ++j) Zcur[j] = blk[j].Z;
      VectorXd cf = c - apply_Fstar(Zcur);
      project_dual(y, cf);
    }
    if (!s.allFinite()) {
      rep.message += "iterate diverged";
      break;
    }
  }

  // Classify when the loop ran out.
  if (iter >= opts.max_iter &&
      rep.status == SolveStatus::numerical_failure) {
    rep.status = best_feas <= opts.tol_feas ? SolveStatus::near_optimal
                                            : SolveStatus::numerical_failure;
    rep.message += "iteration cap reached";
  }
  if (rep.status == SolveStatus::numerical_failure &&
      best_feas <= 1e3 * opts.tol_feas && best_gaprel <= 1e-2) {
    rep.status = SolveStatus::near_optimal;
  }

  out.s = best_s;
  out.y = best_y;
  rep.primal_objective = best_pobj;
  rep.dual_objective = best_dobj;
  rep.gap = best_gaprel;
  rep.iterations = iter;

  ResidualReport res = check_solution(problem, out.s);
  rep.max_equality_residual = res.max_equality_residual;
  rep.min_block_eigenvalue = res.min_block_eigenvalue;
  if (rep.status == SolveStatus::optimal &&
      (rep.max_equality_residual > opts.tol_feas * (1.0 + bnorm) * 10 ||
       rep.min_block_eigenvalue < -opts.tol_psd * (1.0 + tau)))
    rep.status = SolveStatus::near_optimal;

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

}  // namespace momentpde
