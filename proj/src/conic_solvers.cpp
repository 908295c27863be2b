#include "conicadmm/conic_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <utility>

namespace conicadmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Projection onto the dual pattern cone tilted by the shift term of the
// objective: argmin over the dual cone of -<M, z> + (sigma/2) ||z - a||^2.
Vector dual_pattern_update(const PolyhedralPattern& pat, const Vector& a, double sigma) {
  if (!pat.has_shift()) return project_dual_polyhedral_packed(pat, a);
  return project_dual_polyhedral_packed(pat, a + pat.packed_shift() / sigma);
}

struct ConicTracker {
  const ConicProblem* problem = nullptr;
  double tol = 1e-6;
  double max_eq_infeas = 0.0;
  ResidualReport last;

  IterFeedback evaluate(const PrimalDualPoint& pt) {
    ResidualReport r = residuals(*problem, pt);
    last = r;
    max_eq_infeas =
        std::max(max_eq_infeas, (problem->eq.apply(pt.X) - problem->b_eq).norm());

    IterFeedback fb;
    fb.measure = r.eta;
    fb.primal_objective = r.primal_objective;
    fb.dual_objective = r.dual_objective;
    // The engine balances its own coupling residual against the multiplier
    // movement.  Here the coupling constraint is dual feasibility, so the
    // dual-side measures play the engine's primal role and the measures on
    // the multiplier X play the dual role.
    double coupling = std::max({r.eta_d, r.eta_ks, r.eta_pcs});
    double multiplier = std::max({r.eta_p, r.eta_k, r.eta_pc});
    if (r.eta_i) multiplier = std::max(multiplier, *r.eta_i);
    fb.sigma_groups = {coupling, multiplier};
    if (r.eta <= tol) fb.stop = RunStatus::Converged;
    return fb;
  }
};

Block psd_block(int packed) {
  Block b;
  b.op = LinearOp::identity(packed);
  b.solve = [](const Vector& target, double, const Vector&) {
    return project_psd_packed(target);
  };
  return b;
}

Block dual_pattern_block(const PolyhedralPattern& pat) {
  Block b;
  b.op = LinearOp::identity(svec_dim(pat.order()));
  b.solve = [pat](const Vector& target, double sigma, const Vector&) {
    return dual_pattern_update(pat, target, sigma);
  };
  return b;
}

// Multiplier block of the equality rows: minimizes
// -<b, y> + (sigma/2) ||A^* y - a||^2 through the Gram factor.
Block eq_linear_block(const ConicProblem& p, const std::shared_ptr<GramFactor>& gram) {
  Block b;
  b.op.block_dim = p.m_eq();
  b.op.x_dim = p.packed_dim();
  const LinearConstraintMap* eq = &p.eq;
  b.op.to_x = [eq](const Vector& y) { return eq->adjoint_packed(y); };
  b.op.from_x = [eq](const Vector& x) { return eq->apply(x); };
  const Vector* rhs = &p.b_eq;
  b.solve = [eq, gram, rhs](const Vector& target, double sigma, const Vector&) {
    return gram->solve(eq->apply(target) + *rhs / sigma);
  };
  return b;
}

}  // namespace

std::optional<SolverId> parse_solver_id(const std::string& name) {
  if (name == "admm3c") return SolverId::Admm3c;
  if (name == "spadmm3c") return SolverId::Spadmm3c;
  if (name == "admm3d_1") return SolverId::Admm3d_1;
  if (name == "admm3d_1618") return SolverId::Admm3d_1618;
  if (name == "spadmm4d_1") return SolverId::Spadmm4d_1;
  if (name == "spadmm4d_1618") return SolverId::Spadmm4d_1618;
  return std::nullopt;
}

const char* solver_id_name(SolverId id) {
  switch (id) {
    case SolverId::Admm3c: return "admm3c";
    case SolverId::Spadmm3c: return "spadmm3c";
    case SolverId::Admm3d_1: return "admm3d_1";
    case SolverId::Admm3d_1618: return "admm3d_1618";
    case SolverId::Spadmm4d_1: return "spadmm4d_1";
    case SolverId::Spadmm4d_1618: return "spadmm4d_1618";
  }
  return "unknown";
}

bool solver_handles_inequalities(SolverId id) {
  return id == SolverId::Spadmm3c || id == SolverId::Spadmm4d_1 ||
         id == SolverId::Spadmm4d_1618;
}

SplittingConfig default_config(SolverId id) {
  SplittingConfig cfg;
  const bool ineq = solver_handles_inequalities(id);
  cfg.tol = ineq ? 1e-5 : 1e-6;
  cfg.max_iters = ineq ? 50000 : 25000;
  switch (id) {
    case SolverId::Admm3c:
    case SolverId::Spadmm3c:
      cfg.tau0 = 1.95;
      cfg.safeguard = true;
      break;
    case SolverId::Admm3d_1:
    case SolverId::Spadmm4d_1:
      cfg.tau0 = 1.0;
      cfg.safeguard = false;
      break;
    case SolverId::Admm3d_1618:
    case SolverId::Spadmm4d_1618:
      cfg.tau0 = 1.618;
      cfg.safeguard = false;
      break;
  }
  return cfg;
}

SolveResult solve_conic_admm3c(const ConicProblem& p, const SplittingConfig& cfg) {
  const auto t0 = Clock::now();
  p.validate();
  if (p.m_ineq() != 0) {
    throw PreconditionError("this variant handles equality-only problems");
  }
  if (p.m_eq() == 0) throw PreconditionError("at least one equality row required");

  const int N = p.packed_dim();
  auto gram = std::make_shared<GramFactor>(p.check_surjective());

  LinearOp hop;
  hop.block_dim = p.m_eq();
  hop.x_dim = N;
  const LinearConstraintMap* eq = &p.eq;
  hop.to_x = [eq](const Vector& y) { return eq->adjoint_packed(y); };
  hop.from_x = [eq](const Vector& x) { return eq->apply(x); };
  ProjectorPair proj = build_projectors(
      hop, [gram](const Vector& r) { return gram->solve(r); }, p.b_eq);

  Block f = psd_block(N);
  Block g = dual_pattern_block(p.pattern);

  auto tracker = std::make_shared<ConicTracker>();
  tracker->problem = &p;
  tracker->tol = cfg.tol;
  auto callback = [tracker, &p](const IterationInfo& info) {
    PrimalDualPoint pt;
    pt.X = *info.x;
    pt.S = *info.blocks[0];
    pt.Z = *info.blocks[1];
    pt.y_eq = *info.blocks[2];
    pt.y_ineq = Vector::Zero(0);
    return tracker->evaluate(pt);
  };

  const double setup = seconds_since(t0);
  SplitResult run = run_spadmm3c(f, g, proj, p.cost, cfg, Vector::Zero(N),
                                 Vector::Zero(N), Vector::Zero(N), callback);

  SolveResult out;
  out.point.X = run.x;
  out.point.S = run.blocks[0];
  out.point.Z = run.blocks[1];
  out.point.y_eq = run.blocks[2];
  out.point.y_ineq = Vector::Zero(0);
  out.residuals = residuals(p, out.point);
  out.log = std::move(run.log);
  out.log.setup_seconds = setup;
  out.max_multiplier_eq_infeas = tracker->max_eq_infeas;
  return out;
}

IneqReformulation reformulate_ineq(const ConicProblem& p, double alpha_request) {
  if (p.m_ineq() == 0) {
    throw PreconditionError("reformulation requires inequality rows");
  }
  IneqReformulation ref;
  ref.alpha = std::clamp(alpha_request, 3.0, 6.0);
  ref.alpha_clamped = ref.alpha != alpha_request;
  ref.eq_gram = p.check_surjective();

  // Power iteration on A_I A_I^T.
  const SparseMatrix& R = p.ineq.packed_rows();
  const int m = p.m_ineq();
  Vector v(m);
  for (int i = 0; i < m; ++i) v[i] = 1.0 + 0.01 * (i % 7);
  v /= v.norm();
  double lam = 0.0;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    Vector w = R * (R.transpose() * v);
    const double nw = w.norm();
    if (nw <= 1e-300) {
      lam = 0.0;
      converged = true;
      break;
    }
    w /= nw;
    const double lam_new = w.dot(R * (R.transpose() * w));
    if (std::abs(lam_new - lam) <= 1e-10 * std::max(lam_new, 1.0)) {
      lam = lam_new;
      converged = true;
      break;
    }
    lam = lam_new;
    v = w;
  }
  if (!converged) {
    // Row-sum bound on the Gram matrix is always an upper bound.
    Matrix gramI = Matrix(R * R.transpose());
    lam = gramI.cwiseAbs().rowwise().sum().maxCoeff();
    ref.gershgorin_fallback = true;
  }
  ref.rho_max = lam * (1.0 + 1e-6);
  if (ref.rho_max < 1e-12) {
    throw PreconditionError("inequality map is numerically zero");
  }
  return ref;
}

Vector IneqReformulation::solve_doubled(const LinearConstraintMap& eq, double a,
                                        const Vector& rhs) const {
  const int N = svec_dim(eq.order());
  const int m = eq.rows();
  if (rhs.size() != N + m) throw DimensionMismatch("doubled solve: rhs length mismatch");
  const Vector r1 = rhs.head(N);
  const Vector r2 = rhs.tail(m);
  const double s = 1.0 + a * a;
  // Block elimination of the doubled system: the Schur complement of the
  // (1,1) block is (a^2/s) A_E A_E^T, so one equality Gram solve suffices.
  Vector y = (s / (a * a)) * eq_gram.solve(r2 - eq.apply(r1) / s);
  Vector z = (r1 - eq.adjoint_packed(y)) / s;
  Vector out(N + m);
  out << z, y;
  return out;
}

Vector ineq_block_update(const LinearConstraintMap& ineq, const Vector& b_ineq,
                         double rho_max, const Vector& target_packed, double sigma,
                         const Vector& prev) {
  // The proximal term rho I - A_I A_I^T makes the Hessian a multiple of the
  // identity, so the nonnegativity constraint separates into a clamp.
  Vector step = ineq.apply(target_packed - ineq.adjoint_packed(prev)) + b_ineq / sigma;
  return (prev + step / rho_max).cwiseMax(0.0);
}

namespace {

// Shared mutable state of the inequality path: the coupling weight alpha may
// be re-tuned every 100 iterations, so the operator closures read it live.
struct DoubledState {
  double alpha;
  const ConicProblem* p;
  IneqReformulation ref;
};

}  // namespace

SolveResult solve_conic_spadmm3c(const ConicProblem& p, const SplittingConfig& cfg) {
  const auto t0 = Clock::now();
  p.validate();
  if (p.m_ineq() == 0) {
    throw PreconditionError("this variant requires inequality rows");
  }
  if (p.m_eq() == 0) throw PreconditionError("at least one equality row required");

  const int N = p.packed_dim();
  const int mE = p.m_eq();
  const int mI = p.m_ineq();

  auto st = std::make_shared<DoubledState>();
  st->p = &p;
  st->ref = reformulate_ineq(p, 4.0);
  st->alpha = st->ref.alpha;

  // First block (s, u): psd slack and the second copy of the dual pattern
  // variable, coupled as (s; alpha * u).
  Block f;
  f.op.block_dim = 2 * N;
  f.op.x_dim = 2 * N;
  f.op.to_x = [st, N](const Vector& v) {
    Vector out(2 * N);
    out.head(N) = v.head(N);
    out.tail(N) = st->alpha * v.tail(N);
    return out;
  };
  f.op.from_x = f.op.to_x;  // the map is symmetric
  f.solve = [st, N](const Vector& target, double sigma, const Vector&) {
    Vector out(2 * N);
    out.head(N) = project_psd_packed(target.head(N));
    Vector a2 = target.tail(N) / st->alpha;
    if (st->p->pattern.has_shift()) {
      a2 += st->p->pattern.packed_shift() / (sigma * st->alpha * st->alpha);
    }
    out.tail(N) = project_dual_polyhedral_packed(st->p->pattern, a2);
    return out;
  };

  // Second block: the inequality multiplier, entering only the first row of
  // the doubled coupling space.
  Block g;
  g.op.block_dim = mI;
  g.op.x_dim = 2 * N;
  g.op.to_x = [&p, N](const Vector& y) {
    Vector out = Vector::Zero(2 * N);
    out.head(N) = p.ineq.adjoint_packed(y);
    return out;
  };
  g.op.from_x = [&p, N](const Vector& x) { return p.ineq.apply(x.head(N)); };
  g.solve = [st, N](const Vector& target, double sigma, const Vector& prev) {
    return ineq_block_update(st->p->ineq, st->p->b_ineq, st->ref.rho_max,
                             target.head(N), sigma, prev);
  };

  // Third block (z, y_E): first copy of the dual pattern variable and the
  // equality multiplier; its Gram factors through the equality one.
  LinearOp hop;
  hop.block_dim = N + mE;
  hop.x_dim = 2 * N;
  hop.to_x = [st, &p, N](const Vector& w) {
    Vector out(2 * N);
    out.head(N) = w.head(N) + p.eq.adjoint_packed(w.tail(p.m_eq()));
    out.tail(N) = -st->alpha * w.head(N);
    return out;
  };
  hop.from_x = [st, &p, N](const Vector& x) {
    Vector out(N + p.m_eq());
    out.head(N) = x.head(N) - st->alpha * x.tail(N);
    out.tail(p.m_eq()) = p.eq.apply(x.head(N));
    return out;
  };
  Vector b_doubled = Vector::Zero(N + mE);
  b_doubled.tail(mE) = p.b_eq;
  ProjectorPair proj = build_projectors(
      hop,
      [st, &p](const Vector& r) { return st->ref.solve_doubled(p.eq, st->alpha, r); },
      b_doubled);

  Vector c_doubled = Vector::Zero(2 * N);
  c_doubled.head(N) = p.cost;

  auto tracker = std::make_shared<ConicTracker>();
  tracker->problem = &p;
  tracker->tol = cfg.tol;
  auto split_gap = std::make_shared<double>(0.0);

  auto callback = [tracker, st, split_gap, N, mE](const IterationInfo& info) {
    PrimalDualPoint pt;
    pt.X = info.x->head(N);
    pt.S = info.blocks[0]->head(N);
    pt.Z = info.blocks[2]->head(N);
    pt.y_eq = info.blocks[2]->tail(mE);
    pt.y_ineq = *info.blocks[1];
    IterFeedback fb = tracker->evaluate(pt);

    const Vector u = info.blocks[0]->tail(N);
    const double uz = (u - pt.Z).norm() / (1.0 + pt.Z.norm());
    *split_gap = uz;

    // Re-tune the coupling weight: grow it when the two copies of the dual
    // pattern variable disagree more than everything else, shrink it when
    // they agree much better.  The second multiplier block is rescaled so
    // the effective multiplier u-row stays unchanged.
    if (info.k % 100 == 0) {
      const ResidualReport& r = tracker->last;
      double worst_other = std::max({r.eta_p, r.eta_d, r.eta_k, r.eta_pc, r.eta_ks,
                                     r.eta_pcs, r.eta_c1, r.eta_c2});
      if (r.eta_i) worst_other = std::max(worst_other, *r.eta_i);
      double next = st->alpha;
      if (uz > worst_other && st->alpha < 6.0) {
        next = std::min(st->alpha + 0.5, 6.0);
      } else if (10.0 * uz < worst_other && st->alpha > 3.0) {
        next = std::max(st->alpha - 0.5, 3.0);
      }
      if (next != st->alpha) {
        Vector nx = *info.x;
        nx.tail(N) *= st->alpha / next;
        st->alpha = next;
        fb.replace_x = std::move(nx);
      }
    }
    return fb;
  };

  const double setup = seconds_since(t0);
  SplitResult run = run_spadmm3c(f, g, proj, c_doubled, cfg, Vector::Zero(2 * N),
                                 Vector::Zero(mI), Vector::Zero(2 * N), callback);

  SolveResult out;
  out.point.X = run.x.head(N);
  out.point.S = run.blocks[0].head(N);
  out.point.Z = run.blocks[2].head(N);
  out.point.y_eq = run.blocks[2].tail(mE);
  out.point.y_ineq = run.blocks[1];
  out.residuals = residuals(p, out.point);
  out.log = std::move(run.log);
  out.log.setup_seconds = setup;
  if (st->ref.gershgorin_fallback) {
    out.log.notes.push_back("inequality spectrum bounded by row sums");
  }
  out.max_multiplier_eq_infeas = tracker->max_eq_infeas;
  out.final_split_gap = *split_gap;
  return out;
}

SolveResult solve_direct_baseline(const ConicProblem& p, int q,
                                  const SplittingConfig& cfg) {
  const auto t0 = Clock::now();
  p.validate();
  if (q != 3 && q != 4) throw PreconditionError("sweep length must be 3 or 4");
  if (q == 3 && p.m_ineq() != 0) {
    throw PreconditionError("3-block sweep handles equality-only problems");
  }
  if (q == 4 && p.m_ineq() == 0) {
    throw PreconditionError("4-block sweep requires inequality rows");
  }
  if (p.m_eq() == 0) throw PreconditionError("at least one equality row required");

  const int N = p.packed_dim();
  auto gram = std::make_shared<GramFactor>(p.check_surjective());

  std::vector<Block> blocks;
  std::vector<Vector> b0;
  blocks.push_back(psd_block(N));
  b0.push_back(Vector::Zero(N));

  double rho_max = 0.0;
  if (q == 4) {
    IneqReformulation ref = reformulate_ineq(p, 4.0);
    rho_max = ref.rho_max;
    Block yi;
    yi.op.block_dim = p.m_ineq();
    yi.op.x_dim = N;
    const LinearConstraintMap* ineq = &p.ineq;
    yi.op.to_x = [ineq](const Vector& y) { return ineq->adjoint_packed(y); };
    yi.op.from_x = [ineq](const Vector& x) { return ineq->apply(x); };
    const Vector* bi = &p.b_ineq;
    yi.solve = [ineq, bi, rho_max](const Vector& target, double sigma,
                                   const Vector& prev) {
      return ineq_block_update(*ineq, *bi, rho_max, target, sigma, prev);
    };
    blocks.push_back(std::move(yi));
    b0.push_back(Vector::Zero(p.m_ineq()));
  }

  blocks.push_back(dual_pattern_block(p.pattern));
  b0.push_back(Vector::Zero(N));
  blocks.push_back(eq_linear_block(p, gram));
  b0.push_back(gram->solve(p.eq.apply(p.cost)));

  // Start from the same multiplier as the guaranteed scheme.
  Vector x0 = p.eq.adjoint_packed(gram->solve(p.b_eq));

  auto tracker = std::make_shared<ConicTracker>();
  tracker->problem = &p;
  tracker->tol = cfg.tol;
  const int yi_index = (q == 4) ? 1 : -1;
  const int z_index = (q == 4) ? 2 : 1;
  auto callback = [tracker, yi_index, z_index, q](const IterationInfo& info) {
    PrimalDualPoint pt;
    pt.X = *info.x;
    pt.S = *info.blocks[0];
    pt.Z = *info.blocks[z_index];
    pt.y_eq = *info.blocks[z_index + 1];
    pt.y_ineq = (q == 4) ? *info.blocks[yi_index] : Vector::Zero(0);
    return tracker->evaluate(pt);
  };

  const double setup = seconds_since(t0);
  SplitResult run = run_admm_direct(blocks, p.cost, cfg, std::move(b0), x0, callback);

  SolveResult out;
  out.point.X = run.x;
  out.point.S = run.blocks[0];
  out.point.Z = run.blocks[z_index];
  out.point.y_eq = run.blocks[z_index + 1];
  out.point.y_ineq = (q == 4) ? run.blocks[yi_index] : Vector::Zero(0);
  out.residuals = residuals(p, out.point);
  out.log = std::move(run.log);
  out.log.setup_seconds = setup;
  out.max_multiplier_eq_infeas = tracker->max_eq_infeas;
  return out;
}

SolveResult solve(const ConicProblem& p, SolverId id, const SplittingConfig& cfg) {
  switch (id) {
    case SolverId::Admm3c: return solve_conic_admm3c(p, cfg);
    case SolverId::Spadmm3c: return solve_conic_spadmm3c(p, cfg);
    case SolverId::Admm3d_1:
    case SolverId::Admm3d_1618: return solve_direct_baseline(p, 3, cfg);
    case SolverId::Spadmm4d_1:
    case SolverId::Spadmm4d_1618: return solve_direct_baseline(p, 4, cfg);
  }
  throw PreconditionError("unknown solver id");
}

}  // namespace conicadmm
