#pragma once

#include <cstdint>
#include <vector>

#include "conicadmm/core.hpp"

namespace conicadmm {

// Per-entry sign restriction of a polyhedral matrix cone.
enum class EntryKind : std::uint8_t { Free, NonNeg, NonPos, Zero };

EntryKind entry_kind_from_token(const std::string& token);
const char* entry_kind_token(EntryKind k);

// Entrywise polyhedral cone on n x n symmetric matrices, optionally shifted:
// the feasible set is { M + X : X obeys the per-entry signs }.  The kind
// table and the shift are both symmetric; the constructor enforces this.
class PolyhedralPattern {
 public:
  // All entries share one kind, shift zero.
  PolyhedralPattern(int n, EntryKind uniform);
  // Explicit kind table (must be symmetric); shift defaults to zero.
  explicit PolyhedralPattern(std::vector<std::vector<EntryKind>> kinds);

  int order() const { return n_; }
  EntryKind kind(int i, int j) const { return kinds_[static_cast<size_t>(i) * n_ + j]; }
  void set_kind(int i, int j, EntryKind k);

  const Matrix& shift() const { return shift_; }
  void set_shift(Matrix M);
  bool has_shift() const { return has_shift_; }

  bool all_free() const;

  // Pattern of the dual cone: NonNeg and NonPos are self-dual entrywise,
  // Free dualizes to Zero and Zero to Free.  The shift does not carry over;
  // duality always refers to the unshifted cone.
  PolyhedralPattern dual_pattern() const;

  // Packed-entry view used by solvers: kind of packed coordinate k and the
  // packed shift vector.  Entrywise sign clamps commute with the sqrt(2)
  // off-diagonal scaling, so projections act coordinatewise in packed form.
  const std::vector<EntryKind>& packed_kinds() const { return packed_kinds_; }
  const Vector& packed_shift() const { return packed_shift_; }

  bool same_kinds(const PolyhedralPattern& other) const;

 private:
  void rebuild_packed();

  int n_;
  std::vector<EntryKind> kinds_;  // row-major n x n, symmetric
  Matrix shift_;
  bool has_shift_ = false;
  std::vector<EntryKind> packed_kinds_;
  Vector packed_shift_;
};

// Metric projection onto the positive semidefinite cone: eigendecompose the
// symmetrized input and clamp negative eigenvalues at zero.
Matrix project_psd(const Matrix& A);

// Packed-form variant; order recovered from the vector length.
Vector project_psd_packed(const Vector& a);

// Metric projection onto the (shifted) polyhedral cone: entrywise clamp of
// A - shift toward the sign restriction, then add the shift back.
Matrix project_polyhedral(const PolyhedralPattern& pat, const Matrix& A);
Vector project_polyhedral_packed(const PolyhedralPattern& pat, const Vector& a);

// Metric projection onto the dual of the unshifted polyhedral cone.
Matrix project_dual_polyhedral(const PolyhedralPattern& pat, const Matrix& A);
Vector project_dual_polyhedral_packed(const PolyhedralPattern& pat, const Vector& a);

// Entrywise max(v, 0).
Vector project_nonneg(const Vector& v);

}  // namespace conicadmm
