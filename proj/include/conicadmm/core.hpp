#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace conicadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Thrown when operand shapes disagree with the declared problem sizes.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a constraint map fails the row-independence requirement,
// i.e. its Gram matrix admits no Cholesky factorization.
struct SurjectivityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical kernel (eigendecomposition, triangular solve)
// reports failure; carries enough context to identify the operand.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an algorithm's entry conditions are violated, e.g. an
// initial multiplier outside the required subspace.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown by file readers; message includes path and 1-based line number.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension of the packed representation of an n x n symmetric matrix.
inline int svec_dim(int n) { return n * (n + 1) / 2; }

// Side length n recovered from a packed dimension, or -1 if not triangular.
int svec_order(int packed_dim);

// Packed index of entry (i, j), i <= j, in column-major lower-triangle order:
// entries of column j occupy positions j*(j+1)/2 .. j*(j+1)/2 + j.
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

// Isometric packing of a symmetric matrix: off-diagonal entries are scaled
// by sqrt(2) so that dot products of packed vectors equal trace inner
// products of the matrices.  The input is symmetrized as (A + A^T)/2 first.
Vector svec(const Matrix& A);

// Inverse of svec; packed must have triangular length.
Matrix unsvec(const Vector& packed);

inline Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

// Deterministic random source.  Uses the fixed mt19937_64 stream and builds
// all variates from raw 64-bit draws, so identical seeds give bit-identical
// sequences on every platform (the standard distributions do not promise
// that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Uniform on [0, 1).
  double uniform01();
  // Uniform on {lo, ..., hi} inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller on uniform01 draws.
  double normal();

  std::uint64_t raw();

 private:
  std::mt19937_64 state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace conicadmm
