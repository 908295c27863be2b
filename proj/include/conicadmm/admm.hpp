#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conicadmm/core.hpp"

namespace conicadmm {

// Linear map between a block space and the coupling space.  `to_x` is the
// adjoint (block -> coupling), `from_x` the forward map (coupling -> block);
// the coupling constraint of a splitting always reads sum_i to_x(block_i) = c.
struct LinearOp {
  int block_dim = 0;
  int x_dim = 0;
  std::function<Vector(const Vector&)> to_x;
  std::function<Vector(const Vector&)> from_x;

  static LinearOp identity(int n);
  // Rows index the block space, columns the coupling space, i.e. the matrix
  // is the forward map and its transpose the adjoint.
  static LinearOp from_matrix(const Matrix& A);
};

// Exact minimizer of  f(y) + (sigma/2) ||F* y - target||^2
//                          + (sigma/2) ||y - prev||^2_T,
// where F and the (positive semidefinite, possibly zero) proximal operator T
// are baked into the closure.  `target` lives in the coupling space.
using BlockOracle = std::function<Vector(const Vector& target, double sigma,
                                         const Vector& prev)>;

struct Block {
  LinearOp op;
  BlockOracle solve;
};

enum class RunStatus { Converged, MaxIters, Stalled };

const char* run_status_name(RunStatus s);

// Penalty-parameter update policy: every `interval` iterations the ratio of
// the primal to the dual feasibility group decides whether sigma grows,
// shrinks, or stays.  interval <= 0 disables adaptation.
struct SigmaPolicy {
  int interval = 50;
  double scale = 1.25;
  double band_lo = 0.2;
  double band_hi = 5.0;
  double sigma_min = 1e-6;
  double sigma_max = 1e6;
};

double adapt_sigma(double sigma, double primal_group, double dual_group,
                   const SigmaPolicy& policy);

struct SplittingConfig {
  double sigma0 = 1.0;
  double tau0 = 1.95;
  // Step-length safeguard: when the combined decrease quantity exceeds
  // c0 * k^{-1.2} at iteration k, tau is reset to max(rho * tau, 1.618).
  bool safeguard = true;
  double rho = 0.95;
  double c0 = 1.0;

  double tol = 1e-6;
  int max_iters = 25000;

  SigmaPolicy sigma;

  // A run stalls when the best convergence measure fails to improve by the
  // given relative amount over a full window.
  int stall_window = 2000;
  double stall_rel_improvement = 1e-3;

  int log_every = 1;

  void validate() const;
};

struct IterateRecord {
  int k = 0;
  double measure = 0.0;  // caller-supplied merit (or the generic one)
  double sigma = 0.0;
  double tau = 0.0;
  bool tau_reset = false;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

struct IterateLog {
  std::vector<IterateRecord> records;
  RunStatus status = RunStatus::MaxIters;
  int iterations = 0;
  double solve_seconds = 0.0;
  double setup_seconds = 0.0;
  int tau_resets = 0;
  double final_measure = 0.0;
  std::vector<std::string> notes;
};

// Snapshot handed to the per-iteration callback after the multiplier update.
// `blocks` are in scheme order; for the three-operator schemes that is
// (first block, second block, subspace multiplier block).
struct IterationInfo {
  int k = 0;
  std::vector<const Vector*> blocks;
  const Vector* x = nullptr;
  double sigma = 0.0;
  double tau = 0.0;
  double primal_residual_norm = 0.0;
  bool tau_reset = false;
};

// Callback verdict.  A NaN measure means "use the engine's generic one";
// absent sigma groups likewise fall back to engine defaults.  `replace_x`
// substitutes the multiplier before the next iteration; callers use it for
// exact reparameterizations (e.g. rescaling an auxiliary multiplier block
// when a coupling weight changes) and are responsible for preserving any
// affine condition the scheme maintains on x.
struct IterFeedback {
  std::optional<RunStatus> stop;
  double measure = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::pair<double, double>> sigma_groups;
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  std::optional<Vector> replace_x;
};

using IterationCallback = std::function<IterFeedback(const IterationInfo&)>;

// Orthogonal projector pair onto the range of H* and its complement,
// together with the minimum-norm solution of H x = b.
class ProjectorPair {
 public:
  ProjectorPair(LinearOp h, std::function<Vector(const Vector&)> gram_solve,
                Vector b);

  const LinearOp& h() const { return h_; }
  int x_dim() const { return h_.x_dim; }
  const Vector& b() const { return b_; }
  const Vector& bbar() const { return bbar_; }

  // (H H*)^{-1} H rhs: the multiplier block as a function of the rest.
  Vector multiplier(const Vector& rhs) const;
  Vector apply_p(const Vector& x) const;  // H* (H H*)^{-1} H x
  Vector apply_q(const Vector& x) const;  // x - P x

 private:
  LinearOp h_;
  std::function<Vector(const Vector&)> gram_solve_;
  Vector b_;
  Vector bbar_;
};

// Dense convenience: rows of H index the multiplier space.  Factors H H^T
// and throws SurjectivityViolation when the rows are dependent.
ProjectorPair build_projectors(const Matrix& H, const Vector& b);
ProjectorPair build_projectors(LinearOp h, std::function<Vector(const Vector&)> gram_solve,
                               const Vector& b);

struct SplitResult {
  std::vector<Vector> blocks;
  Vector x;
  IterateLog log;
};

// Two-operator scheme with an optional second block:
//   y-step, z-step, x += tau * sigma * (F* y + G* z - c),
// with the step-length safeguard of the config.  Both subproblem oracles
// receive coupling-space targets that already include the multiplier term.
SplitResult run_spadmm2(const Block& f, const std::optional<Block>& g, const Vector& c,
                        const SplittingConfig& cfg, Vector y0, Vector z0, Vector x0,
                        const IterationCallback& callback = nullptr);

// Three-operator scheme whose third block is an unconstrained linear block
// solved twice per sweep: once between the other two blocks (half step) and
// once at the end (full step).  The multiplier starts on the affine set
// H x = b; the update keeps it there for every iterate.
SplitResult run_spadmm3c(const Block& f, const Block& g, const ProjectorPair& proj,
                         const Vector& c, const SplittingConfig& cfg, Vector y0,
                         Vector z0, Vector x0,
                         const IterationCallback& callback = nullptr);

// Two-operator scheme on the reduced problem over the orthogonal complement
// of range(H*).  Started from the same data it reproduces run_spadmm3c's
// (y, z) trajectory exactly; the returned x is bbar plus the reduced
// multiplier.  x0 - bbar must lie in the complement.
SplitResult run_spadmm2s(const Block& f, const Block& g, const ProjectorPair& proj,
                         const Vector& c, const SplittingConfig& cfg, Vector y0,
                         Vector z0, Vector x0,
                         const IterationCallback& callback = nullptr);

// Directly extended Gauss-Seidel sweep over any number of blocks with a
// fixed step length and no safeguard.  No convergence guarantee: divergence
// surfaces as a Stalled or MaxIters status, never as an exception.
SplitResult run_admm_direct(const std::vector<Block>& blocks, const Vector& c,
                            const SplittingConfig& cfg, std::vector<Vector> b0,
                            Vector x0, const IterationCallback& callback = nullptr);

}  // namespace conicadmm
