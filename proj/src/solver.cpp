#include "qpgrating/solver.hpp"

#include <chrono>
#include <cmath>

#include "qpgrating/postproc.hpp"

namespace qpg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Givens rotation zeroing b in (a, b).
void givens(cplx a, cplx b, double& c, cplx& s) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
  } else {
    const double r = std::hypot(na, nb);
    c = na / r;
    s = (a / na) * std::conj(b) / r;
  }
}

}  // namespace

GmresResult gmres(const LinearOperator& op, const CVec& rhs, double tol, int maxit) {
  GmresResult out;
  const Eigen::Index n = rhs.size();
  out.x = CVec::Zero(n);
  const double bnorm = rhs.norm();
  if (!std::isfinite(bnorm)) throw NumericalError("GMRES right-hand side is not finite");
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const int m = std::max(1, static_cast<int>(std::min<Eigen::Index>(maxit, n)));
  CMat V(n, m + 1);
  CMat H = CMat::Zero(m + 1, m);
  std::vector<double> cs(m);
  std::vector<cplx> sn(m);
  CVec g = CVec::Zero(m + 1);
  V.col(0) = rhs / bnorm;
  g(0) = bnorm;
  int k = 0;
  for (; k < m; ++k) {
    CVec w = op(V.col(k));
    if (!w.allFinite()) throw NumericalError("non-finite Krylov vector in GMRES");
    for (int j = 0; j <= k; ++j) {
      H(j, k) = V.col(j).dot(w);
      w -= H(j, k) * V.col(j);
    }
    H(k + 1, k) = w.norm();
    const bool breakdown = std::abs(H(k + 1, k)) <= 1e-14 * bnorm;
    if (!breakdown) V.col(k + 1) = w / H(k + 1, k);
    for (int j = 0; j < k; ++j) {
      const cplx t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
      H(j + 1, k) = -std::conj(sn[j]) * H(j, k) + cs[j] * H(j + 1, k);
      H(j, k) = t;
    }
    givens(H(k, k), H(k + 1, k), cs[k], sn[k]);
    H(k, k) = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
    H(k + 1, k) = 0.0;
    g(k + 1) = -std::conj(sn[k]) * g(k);
    g(k) = cs[k] * g(k);
    const double rel = std::abs(g(k + 1)) / bnorm;
    out.history.push_back(rel);
    if (rel <= tol || breakdown) {
      ++k;
      break;
    }
  }
  out.iterations = k;
  // Back substitution on the leading k x k triangle.
  CVec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  out.x = V.leftCols(k) * y;
  out.residual = (rhs - op(out.x)).norm() / bnorm;
  out.converged = out.residual <= tol * 10.0 || out.history.back() <= tol;
  return out;
}

CVec CoupledProblem::apply_B(const CVec& alpha) const {
  if (!coupled || B.size() == 0) return CVec::Zero(arr.size());
  return B * alpha.head(B.cols());
}

CVec CoupledProblem::apply_C(const CVec& beta) const {
  CVec out = CVec::Zero(sys.rows.total);
  if (coupled && C.size() > 0) out.head(C.rows()) = C * beta;
  return out;
}

CVec CoupledProblem::apply_S(const CVec& a) const {
  CVec out(a.size());
  const int b = arr.block();
  for (int m = 0; m < arr.count(); ++m) out.segment(m * b, b) = placed[m] * a.segment(m * b, b);
  return out;
}

CVec CoupledProblem::apply_T(const CVec& beta) const {
  if (!T) return CVec::Zero(beta.size());
  return T->apply(beta);
}

std::shared_ptr<CoupledProblem> prepare_problem(const ProblemConfig& cfg, const SetupOptions& opt) {
  const auto t_start = Clock::now();
  cfg.validate();
  auto pb = std::make_shared<CoupledProblem>();
  pb->cfg = cfg;
  pb->coupled = opt.coupled;

  auto t0 = Clock::now();
  pb->geo = build_geometry(cfg);
  pb->particles = make_particles(cfg);
  pb->sys = assemble_empty_system(cfg, pb->geo);
  pb->timings.assembly = seconds_since(t0);

  t0 = Clock::now();
  factorize(pb->sys);
  pb->timings.factorization = seconds_since(t0);

  pb->arr = make_particle_array(cfg, pb->particles);
  if (pb->arr.count() > 0) {
    t0 = Clock::now();
    if (opt.smat) {
      const ScatteringMatrix& s = *opt.smat;
      if (s.p != cfg.multipole_order || s.k2 != cfg.k2 || s.kp != cfg.kp)
        throw std::invalid_argument("supplied scattering matrix does not match the configuration");
      pb->smat = s;
    } else {
      pb->smat = scattering_matrix(cfg.shape, cfg.k2, cfg.kp, cfg.multipole_order, cfg.particle_nodes, true);
    }
    for (double phi : pb->arr.rotations) pb->placed.push_back(placed_scattering_matrix(*pb->smat, phi));
    pb->timings.scatmat = seconds_since(t0);

    t0 = Clock::now();
    pb->T.emplace(pb->arr);
    if (pb->coupled) {
      pb->B = source_to_local_block(pb->arr, pb->geo, pb->sys.layout);
      pb->C = multipole_to_targets_block(pb->arr, pb->geo, pb->sys.rows);
    }
    pb->timings.coupling = seconds_since(t0);
  }
  pb->timings.total = seconds_since(t_start);
  return pb;
}

CVec apply_schur_operator(const CoupledProblem& pb, const CVec& beta) {
  CVec inc = pb.apply_T(beta);
  if (pb.coupled) inc -= pb.apply_B(apply_pinv(pb.sys, pb.apply_C(beta)));
  return beta - pb.apply_S(inc);
}

CVec schur_rhs(const CoupledProblem& pb) {
  if (!pb.coupled) return CVec::Zero(pb.arr.size());
  return pb.apply_S(pb.apply_B(apply_pinv(pb.sys, pb.sys.f)));
}

double coupled_residual(const CoupledProblem& pb, const CVec& alpha, const CVec& beta) {
  const CVec r1 = apply_physical(pb.sys, alpha) + pb.apply_C(beta) - pb.sys.f;
  double r = r1.squaredNorm();
  if (beta.size() > 0) r += (beta - pb.apply_S(pb.apply_B(alpha) + pb.apply_T(beta))).squaredNorm();
  return std::sqrt(r) / pb.sys.f.norm();
}

Solution solve_prepared(std::shared_ptr<CoupledProblem> pb) {
  Solution sol;
  const auto t0 = Clock::now();
  const int nb = pb->particle_unknowns();
  if (nb == 0) {
    sol.beta = CVec::Zero(0);
    sol.alpha = apply_pinv(pb->sys, pb->sys.f);
  } else {
    const GmresResult g = gmres([&](const CVec& b) { return apply_schur_operator(*pb, b); }, schur_rhs(*pb),
                                pb->cfg.gmres_tol, pb->cfg.gmres_maxit);
    sol.beta = g.x;
    sol.iterations = g.iterations;
    sol.gmres_residual = g.residual;
    sol.history = g.history;
    sol.converged = g.converged;
    sol.alpha = apply_pinv(pb->sys, pb->sys.f - pb->apply_C(sol.beta));
    sol.incoming = pb->apply_B(sol.alpha) + pb->apply_T(sol.beta);
  }
  pb->timings.gmres = seconds_since(t0);
  pb->timings.total += pb->timings.gmres;
  if (!sol.alpha.allFinite() || !sol.beta.allFinite()) throw NumericalError("non-finite solution");
  sol.coupled_residual = coupled_residual(*pb, sol.alpha, sol.beta);
  sol.problem = pb;
  sol.flux_error = flux_error(pb->cfg, pb->sys.layout, sol.alpha).error;
  sol.wall_discrepancy = wall_discrepancy(sol);
  return sol;
}

Solution solve_full(const ProblemConfig& cfg, const SetupOptions& opt) { return solve_prepared(prepare_problem(cfg, opt)); }

}  // namespace qpg
