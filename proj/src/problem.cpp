#include "conicadmm/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

namespace conicadmm {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

LinearConstraintMap::LinearConstraintMap(int n, int m) : n_(n), m_(m), rows_(m) {
  if (n <= 0) throw DimensionMismatch("constraint map order must be positive");
  if (m < 0) throw DimensionMismatch("constraint map row count must be nonnegative");
}

void LinearConstraintMap::add_entry(int row, int i, int j, double value) {
  if (finalized_) throw PreconditionError("constraint map already finalized");
  if (row < 0 || row >= m_) {
    throw DimensionMismatch("constraint row " + std::to_string(row) + " out of range");
  }
  if (i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw DimensionMismatch("constraint entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") out of range for order " +
                            std::to_string(n_));
  }
  if (i > j) std::swap(i, j);
  rows_[row].push_back({i, j, value});
}

void LinearConstraintMap::finalize() {
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < m_; ++r) {
    for (const auto& t : rows_[r]) {
      // Packed coordinates are scaled by sqrt(2) off the diagonal, so the
      // row below reproduces <A_r, X> as a plain dot product.
      const double w = (t.i == t.j) ? t.value : kSqrt2 * t.value;
      trips.emplace_back(r, svec_index(t.i, t.j), w);
    }
  }
  packed_rows_.resize(m_, packed_dim());
  packed_rows_.setFromTriplets(trips.begin(), trips.end());
  packed_rows_.makeCompressed();
  finalized_ = true;
}

const SparseMatrix& LinearConstraintMap::packed_rows() const {
  if (!finalized_) throw PreconditionError("constraint map not finalized");
  return packed_rows_;
}

Vector LinearConstraintMap::apply(const Vector& packed) const {
  if (packed.size() != packed_dim()) {
    throw DimensionMismatch("apply: packed length " + std::to_string(packed.size()) +
                            ", expected " + std::to_string(packed_dim()));
  }
  return packed_rows() * packed;
}

Vector LinearConstraintMap::apply_matrix(const Matrix& X) const { return apply(svec(X)); }

Vector LinearConstraintMap::adjoint_packed(const Vector& y) const {
  if (y.size() != m_) {
    throw DimensionMismatch("adjoint: multiplier length " + std::to_string(y.size()) +
                            ", expected " + std::to_string(m_));
  }
  return packed_rows().transpose() * y;
}

Matrix LinearConstraintMap::adjoint(const Vector& y) const {
  return unsvec(adjoint_packed(y));
}

Matrix LinearConstraintMap::gram() const {
  const SparseMatrix& R = packed_rows();
  return Matrix(R * R.transpose());
}

GramFactor::GramFactor(Matrix gram) : llt_(std::move(gram)) {}

bool GramFactor::success() const {
  return llt_.rows() == 0 || llt_.info() == Eigen::Success;
}

Vector GramFactor::solve(const Vector& rhs) const {
  if (rhs.size() != llt_.rows()) {
    throw DimensionMismatch("gram solve: rhs length mismatch");
  }
  return llt_.solve(rhs);
}

GramFactor factorize_gram_of(const Matrix& gram, const std::string& what) {
  for (int i = 0; i < gram.rows(); ++i) {
    if (gram(i, i) <= 0.0) {
      throw SurjectivityViolation(what + ": row " + std::to_string(i) +
                                  " is zero (Gram diagonal not positive)");
    }
  }
  GramFactor factor{gram};
  if (!factor.success()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lam_min = eig.eigenvalues().minCoeff();
    throw SurjectivityViolation(
        what + ": rows are linearly dependent (Gram matrix of order " +
        std::to_string(gram.rows()) + " has minimum eigenvalue " +
        std::to_string(lam_min) + ")");
  }
  return factor;
}

GramFactor factorize_gram(const LinearConstraintMap& map) {
  return factorize_gram_of(map.gram(), "constraint map");
}

ConicProblem::ConicProblem(int n_, int m_eq_, int m_ineq_)
    : n(n_),
      cost(Vector::Zero(svec_dim(n_))),
      eq(n_, m_eq_),
      b_eq(Vector::Zero(m_eq_)),
      ineq(n_, m_ineq_),
      b_ineq(Vector::Zero(m_ineq_)),
      pattern(n_, EntryKind::Free) {}

void ConicProblem::validate() const {
  if (cost.size() != packed_dim()) throw DimensionMismatch("cost length mismatch");
  if (eq.order() != n || ineq.order() != n) {
    throw DimensionMismatch("constraint map order mismatch");
  }
  if (b_eq.size() != eq.rows()) throw DimensionMismatch("b_eq length mismatch");
  if (b_ineq.size() != ineq.rows()) throw DimensionMismatch("b_ineq length mismatch");
  if (pattern.order() != n) throw DimensionMismatch("pattern order mismatch");
  if (!eq.finalized() || !ineq.finalized()) {
    throw PreconditionError("constraint maps must be finalized");
  }
}

bool identical(const ConicProblem& a, const ConicProblem& b) {
  if (a.n != b.n || a.m_eq() != b.m_eq() || a.m_ineq() != b.m_ineq()) return false;
  if (a.obj_sign != b.obj_sign || a.obj_offset != b.obj_offset) return false;
  if ((a.cost - b.cost).cwiseAbs().maxCoeff() != 0.0) return false;
  if (a.b_eq.size() && (a.b_eq - b.b_eq).cwiseAbs().maxCoeff() != 0.0) return false;
  if (a.b_ineq.size() && (a.b_ineq - b.b_ineq).cwiseAbs().maxCoeff() != 0.0) return false;
  if (!a.pattern.same_kinds(b.pattern)) return false;
  if ((a.pattern.shift() - b.pattern.shift()).cwiseAbs().maxCoeff() != 0.0) return false;
  auto rows_equal = [](const LinearConstraintMap& x, const LinearConstraintMap& y) {
    Matrix dx = Matrix(x.packed_rows()), dy = Matrix(y.packed_rows());
    return dx.rows() == dy.rows() && (dx.rows() == 0 || (dx - dy).cwiseAbs().maxCoeff() == 0.0);
  };
  return rows_equal(a.eq, b.eq) && rows_equal(a.ineq, b.ineq);
}

PrimalDualPoint PrimalDualPoint::zeros(const ConicProblem& p) {
  PrimalDualPoint pt;
  pt.X = Vector::Zero(p.packed_dim());
  pt.S = Vector::Zero(p.packed_dim());
  pt.Z = Vector::Zero(p.packed_dim());
  pt.y_eq = Vector::Zero(p.m_eq());
  pt.y_ineq = Vector::Zero(p.m_ineq());
  return pt;
}

ResidualReport residuals(const ConicProblem& p, const PrimalDualPoint& pt) {
  const int N = p.packed_dim();
  if (pt.X.size() != N || pt.S.size() != N || pt.Z.size() != N ||
      pt.y_eq.size() != p.m_eq() || pt.y_ineq.size() != p.m_ineq()) {
    throw DimensionMismatch("residuals: point does not match problem sizes");
  }

  ResidualReport r;
  const double nX = pt.X.norm(), nS = pt.S.norm(), nZ = pt.Z.norm();
  const double nb = p.b_eq.norm(), nC = p.cost.norm();

  r.eta_p = (p.eq.apply(pt.X) - p.b_eq).norm() / (1.0 + nb);

  Vector dual_resid = p.eq.adjoint_packed(pt.y_eq) + pt.S + pt.Z - p.cost;
  if (p.m_ineq() > 0) dual_resid += p.ineq.adjoint_packed(pt.y_ineq);
  r.eta_d = dual_resid.norm() / (1.0 + nC);

  r.eta_k = project_psd_packed(-pt.X).norm() / (1.0 + nX);
  r.eta_pc = (pt.X - project_polyhedral_packed(p.pattern, pt.X)).norm() / (1.0 + nX);
  r.eta_ks = project_psd_packed(-pt.S).norm() / (1.0 + nS);
  r.eta_pcs =
      (pt.Z - project_dual_polyhedral_packed(p.pattern, pt.Z)).norm() / (1.0 + nZ);

  r.eta_c1 = std::abs(pt.X.dot(pt.S)) / (1.0 + nX + nS);
  // Complementarity of Z holds against the cone seen from the shift.
  const Vector x_rel = p.pattern.has_shift() ? (pt.X - p.pattern.packed_shift()).eval()
                                             : pt.X;
  r.eta_c2 = std::abs(x_rel.dot(pt.Z)) / (1.0 + nX + nZ);

  r.eta = std::max({r.eta_p, r.eta_d, r.eta_k, r.eta_pc, r.eta_ks, r.eta_pcs, r.eta_c1,
                    r.eta_c2});

  if (p.m_ineq() > 0) {
    const Vector slack = p.b_ineq - p.ineq.apply(pt.X);
    r.eta_i = slack.cwiseMax(0.0).norm() / (1.0 + p.b_ineq.norm());
    r.eta_is = (-pt.y_ineq).cwiseMax(0.0).norm() / (1.0 + pt.y_ineq.norm());
    r.eta = std::max({r.eta, *r.eta_i, *r.eta_is});
  }

  r.primal_objective = p.cost.dot(pt.X);
  r.dual_objective = p.b_eq.dot(pt.y_eq);
  if (p.m_ineq() > 0) r.dual_objective += p.b_ineq.dot(pt.y_ineq);
  if (p.pattern.has_shift()) r.dual_objective += p.pattern.packed_shift().dot(pt.Z);
  r.gap = (r.primal_objective - r.dual_objective) /
          (1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective));
  return r;
}

}  // namespace conicadmm
