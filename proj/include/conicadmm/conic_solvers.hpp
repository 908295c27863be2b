#pragma once

#include <optional>
#include <string>

#include "conicadmm/admm.hpp"
#include "conicadmm/problem.hpp"

namespace conicadmm {

// Available solver variants.  The *3c/*3c-with-inequalities schemes carry a
// convergence guarantee; the *d variants are directly extended sweeps with a
// fixed step length, included as baselines.
enum class SolverId {
  Admm3c,       // equality + two cones, guaranteed
  Spadmm3c,     // adds inequality rows via a proximal slack block, guaranteed
  Admm3d_1,     // direct 3-block sweep, tau = 1
  Admm3d_1618,  // direct 3-block sweep, tau = 1.618
  Spadmm4d_1,   // direct 4-block sweep, tau = 1
  Spadmm4d_1618,
};

std::optional<SolverId> parse_solver_id(const std::string& name);
const char* solver_id_name(SolverId id);
bool solver_handles_inequalities(SolverId id);

// Per-variant defaults: guaranteed solvers start at tau = 1.95 with the
// safeguard armed; direct ones fix tau and disable it.  Tolerances: 1e-6 /
// 25000 iterations without inequality rows, 1e-5 / 50000 with them.
SplittingConfig default_config(SolverId id);

struct SolveResult {
  PrimalDualPoint point;
  ResidualReport residuals;
  IterateLog log;
  // Worst violation of A_E applied to the running multiplier over all
  // iterations (not normalized); the guaranteed schemes keep it at roundoff.
  double max_multiplier_eq_infeas = 0.0;
  // Final inconsistency between the two copies of the dual pattern variable
  // (inequality path only), ||u - z|| / (1 + ||z||).
  double final_split_gap = 0.0;
};

// Guaranteed solver for problems without inequality rows.
SolveResult solve_conic_admm3c(const ConicProblem& p, const SplittingConfig& cfg);

// Guaranteed solver for problems with inequality rows, via a doubled dual
// pattern variable weighted by alpha and a proximal nonnegative block.
SolveResult solve_conic_spadmm3c(const ConicProblem& p, const SplittingConfig& cfg);

// Directly extended baseline: q = 3 blocks (no inequalities) or q = 4.
SolveResult solve_direct_baseline(const ConicProblem& p, int q,
                                  const SplittingConfig& cfg);

// Dispatch by id.
SolveResult solve(const ConicProblem& p, SolverId id, const SplittingConfig& cfg);

// Data of the inequality reformulation shared by the guaranteed and the
// 4-block direct paths.
struct IneqReformulation {
  double alpha = 4.0;
  bool alpha_clamped = false;
  double rho_max = 0.0;          // spectral bound of A_I A_I^T, inflated
  bool gershgorin_fallback = false;
  GramFactor eq_gram;            // factor of A_E A_E^T

  // Solves  [[(1+a^2) I, A_E^*], [A_E, A_E A_E^*]] (z; y) = rhs  using the
  // stored equality Gram factor; rhs stacks a packed matrix over R^{m_E}.
  Vector solve_doubled(const LinearConstraintMap& eq, double a, const Vector& rhs) const;
};

// Clamps the requested alpha into [3, 6] and bounds the inequality Gram
// spectrum (power iteration with a Gershgorin fallback).
IneqReformulation reformulate_ineq(const ConicProblem& p, double alpha_request);

// Exact minimizer of the nonnegative proximal subproblem used for the
// inequality multiplier block; exposed for direct verification.
Vector ineq_block_update(const LinearConstraintMap& ineq, const Vector& b_ineq,
                         double rho_max, const Vector& target_packed, double sigma,
                         const Vector& prev);

}  // namespace conicadmm
