#include "conicadmm/cones.hpp"

#include <vector>

#include "doctest.h"
#include "test_util.hpp"

using namespace conicadmm;
using testutil::max_abs_diff;
using testutil::random_psd;
using testutil::random_symmetric;

namespace {

// Feasible point of the (unshifted) pattern cone obtained by clamping;
// idempotence of the clamp makes this a valid membership sampler.
Matrix feasible_point(const PolyhedralPattern& pat, Rng& rng) {
  PolyhedralPattern unshifted = pat;
  unshifted.set_shift(Matrix::Zero(pat.order(), pat.order()));
  return project_polyhedral(unshifted, random_symmetric(rng, pat.order()));
}

PolyhedralPattern mixed_pattern(int n, Rng& rng) {
  PolyhedralPattern pat(n, EntryKind::Free);
  const EntryKind kinds[] = {EntryKind::Free, EntryKind::NonNeg, EntryKind::NonPos,
                             EntryKind::Zero};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      pat.set_kind(i, j, kinds[rng.uniform_int(0, 3)]);
    }
  }
  return pat;
}

}  // namespace

TEST_CASE("packed symmetric representation is an isometry") {
  Rng rng(101);
  for (int n : {1, 2, 5, 9}) {
    Matrix A = random_symmetric(rng, n);
    Matrix B = random_symmetric(rng, n);
    Vector a = svec(A), b = svec(B);
    CHECK(std::abs((A * B).trace() - a.dot(b)) <= 1e-12 * (1 + std::abs(a.dot(b))));
    CHECK(max_abs_diff(unsvec(a), A) <= 1e-15 * A.cwiseAbs().maxCoeff());
    CHECK(svec_order(static_cast<int>(a.size())) == n);
  }
  CHECK(svec_order(4) == -1);
  CHECK_THROWS_AS(svec(Matrix::Zero(2, 3)), DimensionMismatch);
  CHECK_THROWS_AS(unsvec(Vector::Zero(5)), DimensionMismatch);
}

TEST_CASE("psd projection fixes the identity") {
  Matrix I = Matrix::Identity(2, 2);
  CHECK(max_abs_diff(project_psd(I), I) <= 1e-14);
}

TEST_CASE("psd projection clamps a negative eigenvalue") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = -1.0;
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 1.0;
  CHECK(max_abs_diff(project_psd(A), want) <= 1e-14);
}

TEST_CASE("psd projection satisfies the variational inequality") {
  Rng rng(7);
  Matrix A = random_symmetric(rng, 5);
  Matrix R = project_psd(A);
  for (int t = 0; t < 100; ++t) {
    Matrix Y = random_psd(rng, 5, 1 + static_cast<int>(rng.uniform_int(0, 4)));
    Y /= Y.norm();
    // <A - R, Y - R> <= 0 characterizes the metric projection onto a
    // closed convex cone (up to roundoff).
    CHECK(((A - R).transpose() * (Y - R)).trace() <= 1e-10);
  }
}

TEST_CASE("polyhedral projection clamps sign-restricted entries") {
  PolyhedralPattern pat(2, EntryKind::NonNeg);
  Matrix A(2, 2);
  A << 1, -2, -2, 3;
  Matrix want(2, 2);
  want << 1, 0, 0, 3;
  CHECK(max_abs_diff(project_polyhedral(pat, A), want) == 0.0);
}

TEST_CASE("shifted zero entry projects onto the shift value") {
  PolyhedralPattern pat(3, EntryKind::Free);
  pat.set_kind(1, 2, EntryKind::Zero);
  Matrix M = Matrix::Zero(3, 3);
  M(1, 2) = M(2, 1) = -0.5;
  pat.set_shift(M);
  Rng rng(12);
  Matrix X = random_symmetric(rng, 3);
  Matrix R = project_polyhedral(pat, X);
  CHECK(R(1, 2) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(R(2, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  // Free entries pass through untouched.
  CHECK(R(0, 0) == doctest::Approx(X(0, 0)).epsilon(1e-14));
  CHECK(R(0, 1) == doctest::Approx(0.5 * (X(0, 1) + X(1, 0))).epsilon(1e-14));
}

TEST_CASE("dual of the all-nonneg pattern clamps the same way") {
  PolyhedralPattern pat(3, EntryKind::NonNeg);
  Rng rng(3);
  Matrix A = random_symmetric(rng, 3);
  CHECK(max_abs_diff(project_dual_polyhedral(pat, A), A.cwiseMax(0.0)) <= 1e-14);
}

TEST_CASE("dual of the all-free pattern is the origin") {
  PolyhedralPattern pat(4, EntryKind::Free);
  Rng rng(4);
  Matrix A = random_symmetric(rng, 4);
  CHECK(project_dual_polyhedral(pat, A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dual pattern table") {
  PolyhedralPattern pat(4, EntryKind::Free);
  pat.set_kind(0, 1, EntryKind::NonNeg);
  pat.set_kind(0, 2, EntryKind::NonPos);
  pat.set_kind(0, 3, EntryKind::Zero);
  PolyhedralPattern dual = pat.dual_pattern();
  CHECK(dual.kind(0, 1) == EntryKind::NonNeg);
  CHECK(dual.kind(0, 2) == EntryKind::NonPos);
  CHECK(dual.kind(0, 3) == EntryKind::Free);
  CHECK(dual.kind(1, 2) == EntryKind::Zero);
  CHECK(dual.kind(2, 1) == EntryKind::Zero);
}

TEST_CASE("moreau decomposition for pattern cones") {
  Rng rng(55);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    PolyhedralPattern pat = mixed_pattern(n, rng);
    Matrix X = 3.0 * random_symmetric(rng, n);
    Matrix recon = project_polyhedral(pat, X) - project_dual_polyhedral(pat, -X);
    CHECK(max_abs_diff(recon, symmetrized(X)) <= 1e-12);
  }
}

TEST_CASE("moreau decomposition for the psd cone") {
  Rng rng(56);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    Matrix X = 3.0 * random_symmetric(rng, n);
    // The cone is self-dual, so X = P(X) - P(-X).
    Matrix recon = project_psd(X) - project_psd(-X);
    CHECK(max_abs_diff(recon, X) <= 1e-10);
  }
}

TEST_CASE("nonneg vector projection complementarity") {
  Rng rng(9);
  Vector v = testutil::random_vector(rng, 40);
  Vector w = project_nonneg(v);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(std::abs((w - v).dot(w)) <= 1e-14);
}

TEST_CASE("projections are idempotent") {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    Matrix X = 2.0 * random_symmetric(rng, n);

    Matrix R = project_psd(X);
    CHECK(max_abs_diff(project_psd(R), R) <= 1e-10);

    PolyhedralPattern pat = mixed_pattern(n, rng);
    Matrix Q = project_polyhedral(pat, X);
    CHECK(max_abs_diff(project_polyhedral(pat, Q), Q) <= 1e-10);

    Matrix D = project_dual_polyhedral(pat, X);
    CHECK(max_abs_diff(project_dual_polyhedral(pat, D), D) <= 1e-10);
  }
}

TEST_CASE("projections are non-expansive") {
  Rng rng(78);
  for (int t = 0; t < 50; ++t) {
    const int n = 3;
    Matrix A = 2.0 * random_symmetric(rng, n);
    Matrix B = 2.0 * random_symmetric(rng, n);
    const double dist = (A - B).norm();

    CHECK((project_psd(A) - project_psd(B)).norm() <= dist * (1 + 1e-12));

    PolyhedralPattern pat = mixed_pattern(n, rng);
    CHECK((project_polyhedral(pat, A) - project_polyhedral(pat, B)).norm() <=
          dist * (1 + 1e-12));
    CHECK((project_dual_polyhedral(pat, A) - project_dual_polyhedral(pat, B)).norm() <=
          dist * (1 + 1e-12));
  }
}

TEST_CASE("projection minimizes distance over sampled feasible points") {
  Rng rng(79);
  const int n = 4;
  Matrix X = 2.0 * random_symmetric(rng, n);

  Matrix R = project_psd(X);
  for (int t = 0; t < 100; ++t) {
    Matrix Y = random_psd(rng, n, 1 + static_cast<int>(rng.uniform_int(0, 3)));
    CHECK((X - R).norm() <= (X - Y).norm() + 1e-10);
  }

  PolyhedralPattern pat = mixed_pattern(n, rng);
  Matrix Q = project_polyhedral(pat, X);
  for (int t = 0; t < 100; ++t) {
    Matrix Y = feasible_point(pat, rng);
    CHECK((symmetrized(X) - Q).norm() <= (symmetrized(X) - Y).norm() + 1e-10);
  }
}

TEST_CASE("packed and matrix projections agree") {
  Rng rng(80);
  const int n = 5;
  Matrix X = random_symmetric(rng, n);
  PolyhedralPattern pat = mixed_pattern(n, rng);
  Matrix M = Matrix::Zero(n, n);
  M(0, 1) = M(1, 0) = 0.25;
  pat.set_shift(M);

  CHECK(max_abs_diff(project_psd_packed(svec(X)), svec(project_psd(X))) <= 1e-12);
  CHECK(max_abs_diff(project_polyhedral_packed(pat, svec(X)),
                     svec(project_polyhedral(pat, X))) <= 1e-12);
  CHECK(max_abs_diff(project_dual_polyhedral_packed(pat, svec(X)),
                     svec(project_dual_polyhedral(pat, X))) <= 1e-12);
}

TEST_CASE("pattern construction rejects bad input") {
  CHECK_THROWS_AS(PolyhedralPattern(0, EntryKind::Free), DimensionMismatch);
  std::vector<std::vector<EntryKind>> lop(2, std::vector<EntryKind>(2, EntryKind::Free));
  lop[0][1] = EntryKind::NonNeg;  // asymmetric
  CHECK_THROWS_AS(PolyhedralPattern{lop}, DimensionMismatch);
  PolyhedralPattern pat(2, EntryKind::Free);
  CHECK_THROWS_AS(pat.set_shift(Matrix::Zero(3, 3)), DimensionMismatch);
  CHECK_THROWS_AS(project_polyhedral(pat, Matrix::Zero(3, 3)), DimensionMismatch);
  CHECK_THROWS_AS(entry_kind_from_token("POS"), ParseError);
}
