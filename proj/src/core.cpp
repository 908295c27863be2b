#include "conicadmm/core.hpp"

#include <cmath>

namespace conicadmm {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

int svec_order(int packed_dim) {
  int n = static_cast<int>(std::floor(std::sqrt(2.0 * packed_dim)));
  for (int cand = n - 1; cand <= n + 1; ++cand) {
    if (cand >= 0 && cand * (cand + 1) / 2 == packed_dim) return cand;
  }
  return -1;
}

Vector svec(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("svec: matrix is " + std::to_string(A.rows()) + "x" +
                            std::to_string(A.cols()) + ", expected square");
  }
  const int n = static_cast<int>(A.rows());
  Vector out(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double sym = 0.5 * (A(i, j) + A(j, i));
      out[k++] = (i == j) ? sym : kSqrt2 * sym;
    }
  }
  return out;
}

Matrix unsvec(const Vector& packed) {
  const int n = svec_order(static_cast<int>(packed.size()));
  if (n < 0) {
    throw DimensionMismatch("unsvec: length " + std::to_string(packed.size()) +
                            " is not a triangular number");
  }
  Matrix A(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double v = packed[k++];
      if (i == j) {
        A(i, i) = v;
      } else {
        A(i, j) = v / kSqrt2;
        A(j, i) = A(i, j);
      }
    }
  }
  return A;
}

double Rng::uniform01() {
  // 53 random mantissa bits; value lies in [0, 1).
  return static_cast<double>(state_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t r;
  do {
    r = state_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::raw() { return state_(); }

}  // namespace conicadmm
