#pragma once

#include "conicadmm/core.hpp"

namespace testutil {

inline conicadmm::Matrix random_symmetric(conicadmm::Rng& rng, int n) {
  conicadmm::Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      A(i, j) = rng.normal();
      A(j, i) = A(i, j);
    }
  }
  return A;
}

inline conicadmm::Matrix random_psd(conicadmm::Rng& rng, int n, int rank) {
  conicadmm::Matrix V(n, rank);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < rank; ++r) V(i, r) = rng.normal();
  }
  return V * V.transpose();
}

inline conicadmm::Matrix random_dense(conicadmm::Rng& rng, int rows, int cols) {
  conicadmm::Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  }
  return A;
}

inline conicadmm::Vector random_vector(conicadmm::Rng& rng, int n) {
  conicadmm::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline double max_abs_diff(const conicadmm::Matrix& A, const conicadmm::Matrix& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const conicadmm::Vector& a, const conicadmm::Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
