#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conicadmm/conic_solvers.hpp"
#include "conicadmm/problem.hpp"

namespace conicadmm {

// SDPA sparse format restricted to a single positive semidefinite block.
// Accepted shape: comment lines starting with '*' or '"', then the number of
// constraint matrices, the block count (must be 1), the block size (must be
// positive), the right-hand sides, and entry lines "matno blkno i j value"
// with 1-based upper-triangle indices (i <= j).  Matrix 0 is the cost.
// Multi-block and diagonal-block files are rejected.  Duplicate (matno, i, j)
// coordinates are rejected.  Errors carry 1-based line numbers.
ConicProblem read_sdpa(std::istream& in);

// File wrapper; sets the problem id to the file stem.  When a companion file
// "<path>.pattern" exists, its lines "i j KIND" (1-based, i <= j, KIND one of
// FREE NONNEG NONPOS ZERO) replace the all-FREE default pattern.
ConicProblem read_sdpa_file(const std::string& path);

// Inverse of read_sdpa.  The problem must be representable: no inequality
// rows, an all-FREE unshifted pattern, objective sign 1 and offset 0;
// otherwise std::invalid_argument.  Reading the written text reproduces the
// problem data bit-identically.
void write_sdpa(std::ostream& out, const ConicProblem& p);
void write_sdpa_file(const std::string& path, const ConicProblem& p);

// Native annotated format carrying the full model (inequalities, pattern,
// shift, objective sign and offset); grammar in docs/native_format.md.
// Reading the written text reproduces the problem data bit-identically.
ConicProblem read_native(std::istream& in);
ConicProblem read_native_file(const std::string& path);
void write_native(std::ostream& out, const ConicProblem& p);
void write_native_file(const std::string& path, const ConicProblem& p);

// One benchmark run; a CSV row.  Objective values are the reported ones
// (orientation sign and constant offset applied).  status Converged implies
// eta <= tol at the recorded iterate.
struct RunRecord {
  std::string problem_id;
  std::string solver;
  int n = 0;
  int m_eq = 0;
  int m_ineq = 0;
  double tol = 0.0;
  int iterations = 0;
  RunStatus status = RunStatus::MaxIters;
  double eta = 0.0;
  double eta_p = 0.0;
  double eta_d = 0.0;
  double eta_k = 0.0;
  double eta_ks = 0.0;
  double eta_pc = 0.0;
  double eta_pcs = 0.0;
  double eta_c1 = 0.0;
  double eta_c2 = 0.0;
  std::optional<double> eta_i;
  std::optional<double> eta_is;
  double gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
};

RunRecord make_run_record(const ConicProblem& p, SolverId id,
                          const SplittingConfig& cfg, const SolveResult& result);

// CSV serialization.  Values are written with 17 significant digits, so a
// written row reparses to bitwise-equal fields.  The two optional columns are
// empty when absent.  Ids must not contain commas or newlines.
std::string run_record_header();
std::string run_record_row(const RunRecord& r);
RunRecord parse_run_record_row(const std::string& line);
std::vector<RunRecord> read_run_records(std::istream& in);
std::vector<RunRecord> read_run_records_file(const std::string& path);
void write_run_records(std::ostream& out, const std::vector<RunRecord>& records);

// Appends one row, writing the header first when the file is new or empty.
void append_run_record_file(const std::string& path, const RunRecord& r);

// "h:mm:ss" rendering of a nonnegative duration, rounded to whole seconds.
std::string format_hms(double seconds);

enum class ProfileMetric { Time, Iterations };

std::optional<ProfileMetric> parse_profile_metric(const std::string& name);
const char* profile_metric_name(ProfileMetric m);

// Performance profile of a solver set over a problem set.  y[s][i] is the
// fraction of problems whose metric for solver s is within x[i] times the
// best metric over all solvers on that problem; runs that did not converge
// count as +infinity and never receive credit.
struct ProfileTable {
  ProfileMetric metric = ProfileMetric::Time;
  std::vector<std::string> solvers;
  std::vector<double> x;
  std::vector<std::vector<double>> y;
};

// 200 log-spaced abscissae spanning [1, 32].
std::vector<double> profile_grid();

// Every problem must carry exactly one record per solver appearing anywhere
// in `records`; violations raise std::invalid_argument.  Solver and problem
// order follow first appearance.
ProfileTable emit_performance_profile(const std::vector<RunRecord>& records,
                                      ProfileMetric metric,
                                      const std::vector<double>& grid = profile_grid());

// CSV with header "x,<solver>,..." and one row per grid point.
void write_profile_csv(std::ostream& out, const ProfileTable& table);

}  // namespace conicadmm
