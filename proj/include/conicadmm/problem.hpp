#pragma once

#include <Eigen/Cholesky>

#include <optional>
#include <string>
#include <vector>

#include "conicadmm/cones.hpp"
#include "conicadmm/core.hpp"

namespace conicadmm {

// One coefficient of a symmetric constraint matrix; (i, j) with i <= j
// stands for the value at both (i, j) and (j, i).
struct CoeffTriplet {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

// A linear map X -> (<A_1, X>, ..., <A_m, X>) with symmetric coefficient
// matrices, stored as explicit triplets plus a sparse matrix acting on
// packed coordinates.  Call finalize() once all entries are added.
class LinearConstraintMap {
 public:
  LinearConstraintMap(int n, int m);

  int order() const { return n_; }
  int rows() const { return m_; }
  int packed_dim() const { return svec_dim(n_); }

  // Adds `value` at (i, j) and (j, i) of row `row`.  Duplicate coordinates
  // accumulate.  Invalid after finalize().
  void add_entry(int row, int i, int j, double value);
  void finalize();
  bool finalized() const { return finalized_; }

  const std::vector<std::vector<CoeffTriplet>>& row_triplets() const { return rows_; }

  // A x for packed x.
  Vector apply(const Vector& packed) const;
  Vector apply_matrix(const Matrix& X) const;

  // Packed form of sum_k y_k A_k.
  Vector adjoint_packed(const Vector& y) const;
  Matrix adjoint(const Vector& y) const;

  // Dense m x m Gram matrix A A^T (in packed coordinates).
  Matrix gram() const;

  const SparseMatrix& packed_rows() const;

 private:
  int n_;
  int m_;
  std::vector<std::vector<CoeffTriplet>> rows_;
  SparseMatrix packed_rows_;
  bool finalized_ = false;
};

// Cholesky factor of a constraint map's Gram matrix; solving against it
// applies (A A^T)^{-1}.
class GramFactor {
 public:
  GramFactor() = default;
  explicit GramFactor(Matrix gram);

  int rows() const { return static_cast<int>(llt_.rows()); }
  bool success() const;
  Vector solve(const Vector& rhs) const;

 private:
  Eigen::LLT<Matrix> llt_;
};

// Factors A A^T; throws SurjectivityViolation when the rows of the map are
// (numerically) linearly dependent.
GramFactor factorize_gram(const LinearConstraintMap& map);
GramFactor factorize_gram_of(const Matrix& gram, const std::string& what);

// Conic program over n x n symmetric matrices:
//   minimize  <C, X>
//   s.t.      <A_k, X> =  b_eq[k]
//             <B_k, X> >= b_ineq[k]
//             X psd, X in the (possibly shifted) polyhedral pattern cone.
// Reported objective values are obj_sign * <C, X> + obj_offset, which lets
// maximization problems and constant-shifted objectives round-trip through
// the minimization form.
struct ConicProblem {
  std::string id;
  int n = 0;
  Vector cost;  // packed
  LinearConstraintMap eq;
  Vector b_eq;
  LinearConstraintMap ineq;
  Vector b_ineq;
  PolyhedralPattern pattern;
  double obj_sign = 1.0;
  double obj_offset = 0.0;

  explicit ConicProblem(int n_, int m_eq_, int m_ineq_ = 0);

  int m_eq() const { return eq.rows(); }
  int m_ineq() const { return ineq.rows(); }
  int packed_dim() const { return svec_dim(n); }

  // Shape consistency; throws on violation.
  void validate() const;

  // Load-time row-independence check of the equality map.
  GramFactor check_surjective() const { return factorize_gram(eq); }

  double reported_objective(double internal_value) const {
    return obj_sign * internal_value + obj_offset;
  }

  Matrix cost_matrix() const { return unsvec(cost); }
};

// Exact bitwise data equality (ids excluded); used by round-trip tests.
bool identical(const ConicProblem& a, const ConicProblem& b);

// Primal matrix and dual variables, matrices in packed form.
struct PrimalDualPoint {
  Vector X, S, Z;
  Vector y_eq, y_ineq;

  static PrimalDualPoint zeros(const ConicProblem& p);
};

// Relative KKT residuals.  `eta` is the max of all components defined for
// the problem; `gap` is the signed relative duality gap.  When the pattern
// carries a shift M, complementarity of Z is measured against X - M and the
// dual objective includes <M, Z>, so an exact optimal tuple still reports
// all zeros.
struct ResidualReport {
  double eta_p = 0.0;       // equality feasibility
  double eta_d = 0.0;       // dual feasibility
  double eta_k = 0.0;       // X outside the psd cone
  double eta_pc = 0.0;      // X outside the pattern cone
  double eta_ks = 0.0;      // S outside the psd cone (dual side)
  double eta_pcs = 0.0;     // Z outside the dual pattern cone
  double eta_c1 = 0.0;      // <X, S> complementarity
  double eta_c2 = 0.0;      // <X - M, Z> complementarity
  std::optional<double> eta_i;   // inequality feasibility (if m_ineq > 0)
  std::optional<double> eta_is;  // y_ineq sign (if m_ineq > 0)
  double eta = 0.0;
  double gap = 0.0;

  double primal_objective = 0.0;  // internal (minimization) values
  double dual_objective = 0.0;
};

ResidualReport residuals(const ConicProblem& p, const PrimalDualPoint& pt);

}  // namespace conicadmm
