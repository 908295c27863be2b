#include "conicadmm/admm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "conicadmm/problem.hpp"

namespace conicadmm {

namespace {

constexpr double kTauFloor = 1.618;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_change(const Vector& next, const Vector& prev) {
  if (next.size() == 0) return 0.0;
  return (next - prev).norm() / (1.0 + prev.norm());
}

// Tracks the best merit value over fixed windows; declares a stall when a
// full window passes without meaningful relative improvement.
class StallTracker {
 public:
  StallTracker(int window, double rel) : window_(window), rel_(rel), next_check_(window) {}

  bool stalled(int k, double measure) {
    if (std::isfinite(measure)) best_ = std::min(best_, measure);
    if (window_ <= 0 || k < next_check_) return false;
    bool verdict = false;
    if (std::isfinite(window_start_best_)) {
      const double improvement =
          (window_start_best_ - best_) / std::max(window_start_best_, 1e-300);
      verdict = improvement < rel_;
    }
    window_start_best_ = best_;
    next_check_ += window_;
    return verdict;
  }

 private:
  int window_;
  double rel_;
  double best_ = std::numeric_limits<double>::infinity();
  double window_start_best_ = std::numeric_limits<double>::infinity();
  int next_check_;
};

// Shared per-iteration bookkeeping: callback dispatch, merit selection,
// stall detection, logging, and penalty adaptation.
class LoopSupervisor {
 public:
  LoopSupervisor(const SplittingConfig& cfg, double c_norm)
      : cfg_(cfg),
        c_norm_(c_norm),
        stall_(cfg.stall_window, cfg.stall_rel_improvement),
        t0_(Clock::now()) {
    log_.records.reserve(
        static_cast<size_t>(std::min(cfg.max_iters, 200000) / std::max(cfg.log_every, 1) + 1));
  }

  // `generic_measure` is used when the callback does not supply one;
  // `default_groups` feed sigma adaptation under the same rule.
  std::optional<RunStatus> finish_iteration(const IterationInfo& info,
                                            const IterationCallback& callback,
                                            double generic_measure,
                                            std::pair<double, double> default_groups,
                                            double& sigma) {
    IterFeedback fb;
    if (callback) fb = callback(info);
    pending_x_ = std::move(fb.replace_x);
    const double measure = std::isnan(fb.measure) ? generic_measure : fb.measure;
    last_measure_ = measure;

    if (info.tau_reset) ++log_.tau_resets;
    if (cfg_.log_every > 0 && (info.k % cfg_.log_every == 0 || info.k == 1)) {
      log_.records.push_back({info.k, measure, sigma, info.tau, info.tau_reset,
                              fb.primal_objective, fb.dual_objective});
    }

    if (fb.stop) return fb.stop;
    if (!std::isfinite(measure) || !std::isfinite(info.primal_residual_norm)) {
      log_.notes.push_back("iterates became non-finite at iteration " +
                           std::to_string(info.k));
      return RunStatus::Stalled;
    }
    if (!callback && measure <= cfg_.tol) return RunStatus::Converged;
    if (stall_.stalled(info.k, measure)) return RunStatus::Stalled;

    if (cfg_.sigma.interval > 0 && info.k % cfg_.sigma.interval == 0) {
      const auto groups = fb.sigma_groups ? *fb.sigma_groups : default_groups;
      sigma = adapt_sigma(sigma, groups.first, groups.second, cfg_.sigma);
    }
    return std::nullopt;
  }

  double c_norm() const { return c_norm_; }

  // Multiplier substitution requested by the callback, if any.
  std::optional<Vector> claim_replacement() { return std::move(pending_x_); }

  IterateLog take(RunStatus status, int iterations) {
    log_.status = status;
    log_.iterations = iterations;
    log_.solve_seconds = seconds_since(t0_);
    log_.final_measure = last_measure_;
    return std::move(log_);
  }

 private:
  const SplittingConfig& cfg_;
  double c_norm_;
  StallTracker stall_;
  Clock::time_point t0_;
  IterateLog log_;
  double last_measure_ = std::numeric_limits<double>::infinity();
  std::optional<Vector> pending_x_;
};

double safeguard_threshold(double c0, int k) { return c0 * std::pow(k, -1.2); }

// Step-length reset rule: once the combined decrease quantity stops obeying
// the summable bound, shrink tau toward the floor.  Below the floor the
// scheme converges unconditionally, so tau is never raised back up.
bool maybe_reset_tau(const SplittingConfig& cfg, int k, double quantity, double& tau) {
  if (!cfg.safeguard || tau <= kTauFloor) return false;
  if (quantity <= safeguard_threshold(cfg.c0, k)) return false;
  tau = std::max(cfg.rho * tau, kTauFloor);
  return true;
}

void check_op(const LinearOp& op, int x_dim, const char* name) {
  if (op.x_dim != x_dim) {
    throw DimensionMismatch(std::string(name) + ": coupling dimension " +
                            std::to_string(op.x_dim) + ", expected " +
                            std::to_string(x_dim));
  }
  if (!op.to_x || !op.from_x) {
    throw PreconditionError(std::string(name) + ": linear map not set");
  }
}

}  // namespace

LinearOp LinearOp::identity(int n) {
  LinearOp op;
  op.block_dim = n;
  op.x_dim = n;
  op.to_x = [](const Vector& v) { return v; };
  op.from_x = [](const Vector& v) { return v; };
  return op;
}

LinearOp LinearOp::from_matrix(const Matrix& A) {
  LinearOp op;
  op.block_dim = static_cast<int>(A.rows());
  op.x_dim = static_cast<int>(A.cols());
  op.to_x = [A](const Vector& v) -> Vector { return A.transpose() * v; };
  op.from_x = [A](const Vector& v) -> Vector { return A * v; };
  return op;
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::Stalled: return "Stalled";
  }
  return "Unknown";
}

double adapt_sigma(double sigma, double primal_group, double dual_group,
                   const SigmaPolicy& policy) {
  const double ratio = primal_group / std::max(dual_group, 1e-12);
  if (ratio > policy.band_hi) {
    sigma *= policy.scale;
  } else if (ratio < policy.band_lo) {
    sigma /= policy.scale;
  }
  return std::clamp(sigma, policy.sigma_min, policy.sigma_max);
}

void SplittingConfig::validate() const {
  if (sigma0 <= 0.0) throw PreconditionError("sigma0 must be positive");
  if (tau0 <= 0.0 || tau0 >= 2.0) throw PreconditionError("tau0 must lie in (0, 2)");
  if (rho <= 0.0 || rho > 1.0) throw PreconditionError("rho must lie in (0, 1]");
  if (c0 <= 0.0) throw PreconditionError("c0 must be positive");
  if (max_iters < 0) throw PreconditionError("max_iters must be nonnegative");
  if (tol <= 0.0) throw PreconditionError("tol must be positive");
}

ProjectorPair::ProjectorPair(LinearOp h, std::function<Vector(const Vector&)> gram_solve,
                             Vector b)
    : h_(std::move(h)), gram_solve_(std::move(gram_solve)), b_(std::move(b)) {
  if (!h_.to_x || !h_.from_x) throw PreconditionError("projector map not set");
  if (b_.size() != h_.block_dim) {
    throw DimensionMismatch("projector rhs length " + std::to_string(b_.size()) +
                            ", expected " + std::to_string(h_.block_dim));
  }
  bbar_ = h_.to_x(gram_solve_(b_));
}

Vector ProjectorPair::multiplier(const Vector& rhs) const {
  return gram_solve_(h_.from_x(rhs));
}

Vector ProjectorPair::apply_p(const Vector& x) const { return h_.to_x(multiplier(x)); }

Vector ProjectorPair::apply_q(const Vector& x) const { return x - apply_p(x); }

ProjectorPair build_projectors(const Matrix& H, const Vector& b) {
  GramFactor factor = factorize_gram_of(Matrix(H * H.transpose()), "projector rows");
  auto solve = [factor](const Vector& r) { return factor.solve(r); };
  return ProjectorPair(LinearOp::from_matrix(H), std::move(solve), b);
}

ProjectorPair build_projectors(LinearOp h, std::function<Vector(const Vector&)> gram_solve,
                               const Vector& b) {
  return ProjectorPair(std::move(h), std::move(gram_solve), b);
}

SplitResult run_spadmm2(const Block& f, const std::optional<Block>& g, const Vector& c,
                        const SplittingConfig& cfg, Vector y0, Vector z0, Vector x0,
                        const IterationCallback& callback) {
  cfg.validate();
  const int xd = static_cast<int>(c.size());
  check_op(f.op, xd, "first block");
  if (g) check_op(g->op, xd, "second block");
  if (x0.size() != xd) throw DimensionMismatch("multiplier length mismatch");

  Vector y = std::move(y0), z = std::move(z0), x = std::move(x0);
  double sigma = cfg.sigma0, tau = cfg.tau0;
  LoopSupervisor sup(cfg, c.norm());

  RunStatus status = RunStatus::MaxIters;
  int k = 0;
  Vector r = Vector::Zero(xd);
  while (k < cfg.max_iters) {
    ++k;
    const Vector y_old = y, z_old = z;

    Vector a = c;
    if (g) a -= g->op.to_x(z);
    a -= x / sigma;
    y = f.solve(a, sigma, y_old);

    Vector gz_delta = Vector::Zero(xd);
    if (g) {
      a = c;
      a -= f.op.to_x(y);
      a -= x / sigma;
      z = g->solve(a, sigma, z_old);
      gz_delta = g->op.to_x(z - z_old);
    }

    r = f.op.to_x(y);
    if (g) r += g->op.to_x(z);
    r -= c;
    const double r_norm = r.norm();

    const bool tau_reset = maybe_reset_tau(
        cfg, k, gz_delta.squaredNorm() + r_norm * r_norm / tau, tau);

    x += (tau * sigma) * r;

    IterationInfo info;
    info.k = k;
    info.blocks = g ? std::vector<const Vector*>{&y, &z} : std::vector<const Vector*>{&y};
    info.x = &x;
    info.sigma = sigma;
    info.tau = tau;
    info.primal_residual_norm = r_norm;
    info.tau_reset = tau_reset;

    const double generic = std::max(
        {r_norm / (1.0 + sup.c_norm()), rel_change(y, y_old), rel_change(z, z_old)});
    const std::pair<double, double> groups{r_norm / (1.0 + sup.c_norm()),
                                           sigma * gz_delta.norm() / (1.0 + sup.c_norm())};
    if (auto stop = sup.finish_iteration(info, callback, generic, groups, sigma)) {
      status = *stop;
      break;
    }
    if (auto nx = sup.claim_replacement()) x = std::move(*nx);
  }

  SplitResult out;
  out.blocks.push_back(std::move(y));
  if (g) out.blocks.push_back(std::move(z));
  out.x = std::move(x);
  out.log = sup.take(status, k);
  return out;
}

SplitResult run_spadmm3c(const Block& f, const Block& g, const ProjectorPair& proj,
                         const Vector& c, const SplittingConfig& cfg, Vector y0,
                         Vector z0, Vector x0, const IterationCallback& callback) {
  cfg.validate();
  const int xd = static_cast<int>(c.size());
  check_op(f.op, xd, "first block");
  check_op(g.op, xd, "second block");
  check_op(proj.h(), xd, "multiplier block");
  if (x0.size() != xd) throw DimensionMismatch("multiplier length mismatch");

  Vector y = std::move(y0), z = std::move(z0);
  // Restore the affine condition H x = b exactly; the update preserves it.
  Vector x = proj.apply_q(x0) + proj.bbar();
  Vector w = proj.multiplier(c - f.op.to_x(y) - g.op.to_x(z));

  double sigma = cfg.sigma0, tau = cfg.tau0;
  LoopSupervisor sup(cfg, c.norm());

  RunStatus status = RunStatus::MaxIters;
  int k = 0;
  while (k < cfg.max_iters) {
    ++k;
    const Vector y_old = y, z_old = z;

    Vector a = c;
    a -= g.op.to_x(z);
    a -= proj.h().to_x(w);
    a -= x / sigma;
    y = f.solve(a, sigma, y_old);

    const Vector fy = f.op.to_x(y);
    const Vector w_half = proj.multiplier(c - fy - g.op.to_x(z_old));

    a = c;
    a -= fy;
    a -= proj.h().to_x(w_half);
    a -= x / sigma;
    z = g.solve(a, sigma, z_old);

    w = proj.multiplier(c - fy - g.op.to_x(z));

    Vector r = fy + g.op.to_x(z) + proj.h().to_x(w) - c;
    const double r_norm = r.norm();
    // Combined decrease quantity; by construction it equals the reduced
    // two-block one, so the safeguard fires identically on both paths.
    const Vector dual_delta = g.op.to_x(z - z_old) + proj.h().to_x(w - w_half);

    const bool tau_reset = maybe_reset_tau(
        cfg, k, dual_delta.squaredNorm() + r_norm * r_norm / tau, tau);

    x += (tau * sigma) * r;
    // The increment lies in the complement of range(H*) up to roundoff;
    // re-anchoring x on the affine set keeps the per-iterate drift from
    // compounding over long runs.
    x = proj.apply_q(x) + proj.bbar();

    IterationInfo info;
    info.k = k;
    info.blocks = {&y, &z, &w};
    info.x = &x;
    info.sigma = sigma;
    info.tau = tau;
    info.primal_residual_norm = r_norm;
    info.tau_reset = tau_reset;

    const double generic = std::max(
        {r_norm / (1.0 + sup.c_norm()), rel_change(y, y_old), rel_change(z, z_old)});
    const std::pair<double, double> groups{
        r_norm / (1.0 + sup.c_norm()),
        sigma * dual_delta.norm() / (1.0 + sup.c_norm())};
    if (auto stop = sup.finish_iteration(info, callback, generic, groups, sigma)) {
      status = *stop;
      break;
    }
    if (auto nx = sup.claim_replacement()) {
      x = std::move(*nx);
      // A replacement signals a reparameterization of the coupling space;
      // refresh the linear block so its defining relation holds again under
      // the caller's updated operators.
      w = proj.multiplier(c - f.op.to_x(y) - g.op.to_x(z));
    }
  }

  SplitResult out;
  out.blocks = {std::move(y), std::move(z), std::move(w)};
  out.x = std::move(x);
  out.log = sup.take(status, k);
  return out;
}

SplitResult run_spadmm2s(const Block& f, const Block& g, const ProjectorPair& proj,
                         const Vector& c, const SplittingConfig& cfg, Vector y0,
                         Vector z0, Vector x0, const IterationCallback& callback) {
  cfg.validate();
  const int xd = static_cast<int>(c.size());
  check_op(f.op, xd, "first block");
  check_op(g.op, xd, "second block");
  check_op(proj.h(), xd, "multiplier block");
  if (x0.size() != xd) throw DimensionMismatch("multiplier length mismatch");

  Vector lambda = x0 - proj.bbar();
  if (proj.apply_p(lambda).norm() > 1e-10 * (1.0 + lambda.norm())) {
    throw PreconditionError(
        "initial multiplier minus bbar must lie in the complement of range(H*)");
  }

  Vector y = std::move(y0), z = std::move(z0);
  double sigma = cfg.sigma0, tau = cfg.tau0;
  LoopSupervisor sup(cfg, c.norm());

  RunStatus status = RunStatus::MaxIters;
  int k = 0;
  Vector x_full = proj.bbar() + lambda;
  while (k < cfg.max_iters) {
    ++k;
    const Vector y_old = y, z_old = z;

    // Orthogonality of the two projectors folds the reduced quadratic and
    // the extra proximal term into one coupling-space target.
    Vector a = proj.apply_p(f.op.to_x(y_old)) -
               proj.apply_q(g.op.to_x(z_old) - c) - x_full / sigma;
    y = f.solve(a, sigma, y_old);

    const Vector fy = f.op.to_x(y);
    a = proj.apply_p(g.op.to_x(z_old)) - proj.apply_q(fy - c) - x_full / sigma;
    z = g.solve(a, sigma, z_old);

    const Vector r = proj.apply_q(fy + g.op.to_x(z) - c);
    const double r_norm = r.norm();
    const Vector dual_delta = proj.apply_q(g.op.to_x(z - z_old));

    const bool tau_reset = maybe_reset_tau(
        cfg, k, dual_delta.squaredNorm() + r_norm * r_norm / tau, tau);

    lambda += (tau * sigma) * r;
    // Same re-anchoring as the full scheme: the reduced multiplier stays in
    // the complement, so the two trajectories keep matching bitwise-near.
    lambda = proj.apply_q(lambda);
    x_full = proj.bbar() + lambda;

    IterationInfo info;
    info.k = k;
    info.blocks = {&y, &z};
    info.x = &x_full;
    info.sigma = sigma;
    info.tau = tau;
    info.primal_residual_norm = r_norm;
    info.tau_reset = tau_reset;

    const double generic = std::max(
        {r_norm / (1.0 + sup.c_norm()), rel_change(y, y_old), rel_change(z, z_old)});
    const std::pair<double, double> groups{
        r_norm / (1.0 + sup.c_norm()),
        sigma * dual_delta.norm() / (1.0 + sup.c_norm())};
    if (auto stop = sup.finish_iteration(info, callback, generic, groups, sigma)) {
      status = *stop;
      break;
    }
    if (auto nx = sup.claim_replacement()) {
      x_full = std::move(*nx);
      lambda = x_full - proj.bbar();
    }
  }

  SplitResult out;
  out.blocks = {std::move(y), std::move(z)};
  out.x = std::move(x_full);
  out.log = sup.take(status, k);
  return out;
}

SplitResult run_admm_direct(const std::vector<Block>& blocks, const Vector& c,
                            const SplittingConfig& cfg, std::vector<Vector> b0,
                            Vector x0, const IterationCallback& callback) {
  cfg.validate();
  const int xd = static_cast<int>(c.size());
  const int q = static_cast<int>(blocks.size());
  if (q == 0) throw PreconditionError("at least one block required");
  if (static_cast<int>(b0.size()) != q) {
    throw DimensionMismatch("initial block count mismatch");
  }
  for (int i = 0; i < q; ++i) check_op(blocks[i].op, xd, "sweep block");
  if (x0.size() != xd) throw DimensionMismatch("multiplier length mismatch");

  std::vector<Vector> b = std::move(b0);
  Vector x = std::move(x0);
  double sigma = cfg.sigma0;
  const double tau = cfg.tau0;  // fixed: no safeguard on the direct sweep
  LoopSupervisor sup(cfg, c.norm());

  RunStatus status = RunStatus::MaxIters;
  int k = 0;
  while (k < cfg.max_iters) {
    ++k;
    std::vector<Vector> b_old = b;

    for (int i = 0; i < q; ++i) {
      Vector a = c;
      for (int j = 0; j < q; ++j) {
        if (j != i) a -= blocks[j].op.to_x(b[j]);
      }
      a -= x / sigma;
      b[i] = blocks[i].solve(a, sigma, b_old[i]);
    }

    Vector r = blocks[0].op.to_x(b[0]);
    for (int j = 1; j < q; ++j) r += blocks[j].op.to_x(b[j]);
    r -= c;
    const double r_norm = r.norm();

    Vector trailing_delta = Vector::Zero(xd);
    for (int j = 1; j < q; ++j) trailing_delta += blocks[j].op.to_x(b[j] - b_old[j]);

    x += (tau * sigma) * r;

    IterationInfo info;
    info.k = k;
    info.blocks.reserve(q);
    for (const auto& v : b) info.blocks.push_back(&v);
    info.x = &x;
    info.sigma = sigma;
    info.tau = tau;
    info.primal_residual_norm = r_norm;
    info.tau_reset = false;

    double generic = r_norm / (1.0 + sup.c_norm());
    for (int j = 0; j < q; ++j) generic = std::max(generic, rel_change(b[j], b_old[j]));
    const std::pair<double, double> groups{
        r_norm / (1.0 + sup.c_norm()),
        sigma * trailing_delta.norm() / (1.0 + sup.c_norm())};
    if (auto stop = sup.finish_iteration(info, callback, generic, groups, sigma)) {
      status = *stop;
      break;
    }
    if (auto nx = sup.claim_replacement()) x = std::move(*nx);
  }

  SplitResult out;
  out.blocks = std::move(b);
  out.x = std::move(x);
  out.log = sup.take(status, k);
  return out;
}

}  // namespace conicadmm
