// Copyright 2026 The nss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nss/error.hpp"
#include "nss/linalg.hpp"
#include "nss/oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace nss;
using namespace nss::testing_support;

Matrix psd_gram(std::mt19937_64& rng, std::size_t d, std::size_t n) {
  const Matrix h = randn(rng, d, n);
  return loop_matmul(h, loop_transpose(h));
}

Matrix reconstruct(const EigenDecomposition& e) {
  const std::size_t d = e.values.size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
      m(i, j) = s;
    }
  return m;
}

TEST(EigSymmetric, IdentityHasUnitSpectrumAndOrthonormalVectors) {
  const auto e = eig_symmetric(Matrix::identity(3));
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
  const Matrix utu = loop_matmul(loop_transpose(e.vectors), e.vectors);
  EXPECT_LE(fro_diff(utu, Matrix::identity(3)), 1e-12);
}

TEST(EigSymmetric, DiagonalIsSortedAndSignFixed) {
  const double diag[] = {1.0, 4.0};
  const auto e = eig_symmetric(Matrix::diagonal(diag));
  EXPECT_DOUBLE_EQ(e.values[0], 4.0);
  EXPECT_DOUBLE_EQ(e.values[1], 1.0);
  // (4,1) ordering swaps the axes; sign fixing makes every entry non-negative.
  EXPECT_EQ(e.vectors, Matrix(2, 2, {0, 1, 1, 0}));

  const double diag2[] = {4.0, 1.0};
  EXPECT_EQ(eig_symmetric(Matrix::diagonal(diag2)).vectors, Matrix::identity(2));
}

TEST(EigSymmetric, SeededGramMatchesJacobiOracle) {
  std::mt19937_64 rng(5);
  const Matrix m = psd_gram(rng, 5, 7);
  const auto e = eig_symmetric(m);
  const auto ref = oracle::jacobi_eigen(m);
  EXPECT_LE(fro_diff(reconstruct(e), m), 1e-8 * std::max(loop_fro(m), 1.0));
  ASSERT_EQ(ref.values.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_NEAR(e.values[i], ref.values[i], 1e-9 * ref.values[0]);
  // Distinct eigenvalues: columns agree up to sign.
  for (std::size_t k = 0; k < 5; ++k) {
    double dotp = 0.0;
    for (std::size_t i = 0; i < 5; ++i) dotp += e.vectors(i, k) * ref.vectors(i, k);
    EXPECT_NEAR(std::abs(dotp), 1.0, 1e-8);
  }
}

TEST(EigSymmetric, PropertiesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t d = 2 + seed % 15;
    const Matrix m = psd_gram(rng, d, 1 + seed % 20);
    const auto e = eig_symmetric(m);
    const double lmax = std::max(e.values.front(), 1.0);
    for (double v : e.values) EXPECT_GE(v, -1e-10 * lmax);
    for (std::size_t k = 1; k < d; ++k) EXPECT_GE(e.values[k - 1], e.values[k]);
    EXPECT_LE(fro_diff(reconstruct(e), m), 1e-8 * std::max(loop_fro(m), 1.0));
    // Sign convention: the largest-magnitude entry of each column is positive.
    for (std::size_t k = 0; k < d; ++k) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < d; ++i)
        if (std::abs(e.vectors(i, k)) > std::abs(e.vectors(best, k))) best = i;
      EXPECT_GT(e.vectors(best, k), 0.0);
    }
    const auto again = eig_symmetric(m);
    EXPECT_EQ(again.vectors, e.vectors);
    EXPECT_EQ(again.values, e.values);
  }
}

TEST(EigSymmetric, RejectsBadInput) {
  EXPECT_THROW(eig_symmetric(Matrix(2, 3)), ShapeError);
  EXPECT_THROW(eig_symmetric(Matrix(2, 2, {1, 2, 0, 1})), InvalidInputError);
  EXPECT_THROW(Matrix(1, 1, {std::nan("")}), InvalidInputError);
}

TEST(Pseudoinverse, IdentityAndRankDeficientDiagonal) {
  EXPECT_LE(fro_diff(pseudoinverse(Matrix::identity(4)), Matrix::identity(4)), 1e-15);
  const double diag[] = {2.0, 0.0};
  const Matrix p = pseudoinverse(Matrix::diagonal(diag));
  EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(1, 0), 0.0);
}

TEST(Pseudoinverse, SeededRectangularSatisfiesPenrose) {
  std::mt19937_64 rng(11);
  const Matrix a = randn(rng, 4, 3);
  const Matrix x = pseudoinverse(a);
  ASSERT_EQ(x.rows(), 3u);
  ASSERT_EQ(x.cols(), 4u);
  // Penrose conditions, computed with test-local loops.
  const Matrix ax = loop_matmul(a, x);
  const Matrix xa = loop_matmul(x, a);
  EXPECT_LE(fro_diff(loop_matmul(ax, a), a), 1e-12 * loop_fro(a));
  EXPECT_LE(fro_diff(loop_matmul(xa, x), x), 1e-12 * loop_fro(x));
  EXPECT_LE(fro_diff(ax, loop_transpose(ax)), 1e-12);
  EXPECT_LE(fro_diff(xa, loop_transpose(xa)), 1e-12);
  for (double r : oracle::penrose_residuals(a, x)) EXPECT_LE(r, 1e-12);
}

TEST(Pseudoinverse, InvolutionAndRankDeficientPenrose) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const std::size_t r = 1 + seed % 4, m = 3 + seed % 5, n = 2 + seed % 6;
    const Matrix a = loop_matmul(randn(rng, m, r), randn(rng, r, n));
    const Matrix x = pseudoinverse(a, 1e-10);
    EXPECT_LE(fro_diff(pseudoinverse(x, 1e-10), a), 1e-8 * loop_fro(a));
    EXPECT_LE(fro_diff(loop_matmul(loop_matmul(a, x), a), a), 1e-9 * loop_fro(a));
  }
}

TEST(Pseudoinverse, RejectsNonFinite) {
  Matrix a(2, 2);
  a.data()[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(pseudoinverse(a), InvalidInputError);
}

TEST(FrobeniusNorm, SmallCases) {
  EXPECT_EQ(frobenius_norm(Matrix(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(Matrix(1, 2, {3, 4})), 5.0);
}

TEST(FrobeniusNorm, MatchesDoubleLoop) {
  std::mt19937_64 rng(3);
  const Matrix m = randn(rng, 10, 10);
  EXPECT_NEAR(frobenius_norm(m), loop_fro(m), 1e-12 * loop_fro(m));
}

TEST(Kernels, IdentityAndInvolution) {
  std::mt19937_64 rng(9);
  const Matrix a = randn(rng, 4, 6);
  EXPECT_EQ(matmul(a, Matrix::identity(6)), a);
  EXPECT_EQ(transpose(transpose(a)), a);
  EXPECT_EQ(add(a, scale(a, -1.0)), Matrix(4, 6));
  EXPECT_EQ(subtract(a, a), Matrix(4, 6));
}

TEST(Kernels, MatmulBitExactAgainstTripleLoop) {
  std::mt19937_64 rng(7);
  const Matrix a = randn(rng, 7, 5);
  const Matrix b = randn(rng, 5, 3);
  EXPECT_EQ(matmul(a, b), loop_matmul(a, b));
  EXPECT_EQ(matmul_transposed(a, transpose(b)), loop_matmul(a, b));
  EXPECT_EQ(oracle::naive_matmul(a, b), loop_matmul(a, b));
}

TEST(Kernels, ShapeErrors) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(add(Matrix(2, 3), Matrix(3, 2)), ShapeError);
  EXPECT_THROW(Matrix(2, 2, {1, 2, 3}), ShapeError);
  const Vector v{1, 2};
  EXPECT_THROW(matvec(Matrix(2, 3), v), ShapeError);
}

TEST(Kernels, DeterministicAcrossCalls) {
  std::mt19937_64 rng(21);
  const Matrix a = randn(rng, 9, 9);
  EXPECT_EQ(pseudoinverse(a), pseudoinverse(a));
  EXPECT_EQ(matmul(a, a), matmul(a, a));
}

}  // namespace
