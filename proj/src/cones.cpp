#include "conicadmm/cones.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <utility>

namespace conicadmm {

EntryKind entry_kind_from_token(const std::string& token) {
  if (token == "FREE") return EntryKind::Free;
  if (token == "NONNEG") return EntryKind::NonNeg;
  if (token == "NONPOS") return EntryKind::NonPos;
  if (token == "ZERO") return EntryKind::Zero;
  throw ParseError("unknown entry kind token '" + token + "'");
}

const char* entry_kind_token(EntryKind k) {
  switch (k) {
    case EntryKind::Free: return "FREE";
    case EntryKind::NonNeg: return "NONNEG";
    case EntryKind::NonPos: return "NONPOS";
    case EntryKind::Zero: return "ZERO";
  }
  return "FREE";
}

PolyhedralPattern::PolyhedralPattern(int n, EntryKind uniform)
    : n_(n),
      kinds_(static_cast<size_t>(n) * n, uniform),
      shift_(Matrix::Zero(n, n)) {
  if (n <= 0) throw DimensionMismatch("pattern order must be positive");
  rebuild_packed();
}

PolyhedralPattern::PolyhedralPattern(std::vector<std::vector<EntryKind>> kinds)
    : n_(static_cast<int>(kinds.size())) {
  if (n_ <= 0) throw DimensionMismatch("pattern order must be positive");
  kinds_.resize(static_cast<size_t>(n_) * n_);
  for (int i = 0; i < n_; ++i) {
    if (static_cast<int>(kinds[i].size()) != n_) {
      throw DimensionMismatch("pattern kind table is not square");
    }
    for (int j = 0; j < n_; ++j) kinds_[static_cast<size_t>(i) * n_ + j] = kinds[i][j];
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (kind(i, j) != kind(j, i)) {
        throw DimensionMismatch("pattern kind table is not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  shift_ = Matrix::Zero(n_, n_);
  rebuild_packed();
}

void PolyhedralPattern::set_kind(int i, int j, EntryKind k) {
  kinds_[static_cast<size_t>(i) * n_ + j] = k;
  kinds_[static_cast<size_t>(j) * n_ + i] = k;
  rebuild_packed();
}

void PolyhedralPattern::set_shift(Matrix M) {
  if (M.rows() != n_ || M.cols() != n_) {
    throw DimensionMismatch("pattern shift order mismatch");
  }
  if ((M - M.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw DimensionMismatch("pattern shift must be symmetric");
  }
  shift_ = std::move(M);
  has_shift_ = shift_.cwiseAbs().maxCoeff() > 0.0;
  rebuild_packed();
}

bool PolyhedralPattern::all_free() const {
  return std::all_of(kinds_.begin(), kinds_.end(),
                     [](EntryKind k) { return k == EntryKind::Free; });
}

PolyhedralPattern PolyhedralPattern::dual_pattern() const {
  PolyhedralPattern dual(n_, EntryKind::Free);
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      EntryKind k = kind(i, j);
      EntryKind d = k;
      if (k == EntryKind::Free) d = EntryKind::Zero;
      if (k == EntryKind::Zero) d = EntryKind::Free;
      dual.set_kind(i, j, d);
    }
  }
  return dual;
}

bool PolyhedralPattern::same_kinds(const PolyhedralPattern& other) const {
  return n_ == other.n_ && kinds_ == other.kinds_;
}

void PolyhedralPattern::rebuild_packed() {
  packed_kinds_.resize(svec_dim(n_));
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i <= j; ++i) packed_kinds_[svec_index(i, j)] = kind(i, j);
  }
  packed_shift_ = has_shift_ ? svec(shift_) : Vector::Zero(svec_dim(n_));
}

namespace {

double clamp_entry(EntryKind k, double v) {
  switch (k) {
    case EntryKind::Free: return v;
    case EntryKind::NonNeg: return std::max(v, 0.0);
    case EntryKind::NonPos: return std::min(v, 0.0);
    case EntryKind::Zero: return 0.0;
  }
  return v;
}

Vector clamp_packed(const std::vector<EntryKind>& kinds, const Vector& a) {
  Vector out(a.size());
  for (int k = 0; k < a.size(); ++k) out[k] = clamp_entry(kinds[k], a[k]);
  return out;
}

}  // namespace

Matrix project_psd(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("project_psd: input must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(A));
  if (eig.info() != Eigen::Success) {
    throw SolverError("eigendecomposition failed on order " +
                      std::to_string(A.rows()) + " matrix");
  }
  Vector lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Vector project_psd_packed(const Vector& a) { return svec(project_psd(unsvec(a))); }

Matrix project_polyhedral(const PolyhedralPattern& pat, const Matrix& A) {
  if (A.rows() != pat.order() || A.cols() != pat.order()) {
    throw DimensionMismatch("project_polyhedral: order mismatch");
  }
  return unsvec(project_polyhedral_packed(pat, svec(A)));
}

Vector project_polyhedral_packed(const PolyhedralPattern& pat, const Vector& a) {
  if (a.size() != svec_dim(pat.order())) {
    throw DimensionMismatch("project_polyhedral_packed: length mismatch");
  }
  if (!pat.has_shift()) return clamp_packed(pat.packed_kinds(), a);
  return pat.packed_shift() + clamp_packed(pat.packed_kinds(), a - pat.packed_shift());
}

Matrix project_dual_polyhedral(const PolyhedralPattern& pat, const Matrix& A) {
  if (A.rows() != pat.order() || A.cols() != pat.order()) {
    throw DimensionMismatch("project_dual_polyhedral: order mismatch");
  }
  return unsvec(project_dual_polyhedral_packed(pat, svec(A)));
}

Vector project_dual_polyhedral_packed(const PolyhedralPattern& pat, const Vector& a) {
  if (a.size() != svec_dim(pat.order())) {
    throw DimensionMismatch("project_dual_polyhedral_packed: length mismatch");
  }
  Vector out(a.size());
  const auto& kinds = pat.packed_kinds();
  for (int k = 0; k < a.size(); ++k) {
    EntryKind d = kinds[k];
    if (d == EntryKind::Free) d = EntryKind::Zero;
    else if (d == EntryKind::Zero) d = EntryKind::Free;
    out[k] = clamp_entry(d, a[k]);
  }
  return out;
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace conicadmm
