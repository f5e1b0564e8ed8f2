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


#include <random>

#include <gtest/gtest.h>

#include "nss/error.hpp"
#include "nss/nullspace.hpp"
#include "nss/oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace nss;
using namespace nss::testing_support;

double trace_of(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

// d x n matrix of rank k plus entrywise noise of the given scale.
Matrix low_rank_plus_noise(std::mt19937_64& rng, std::size_t d, std::size_t k, std::size_t n,
                           double noise) {
  Matrix h = loop_matmul(randn(rng, d, k), randn(rng, k, n));
  const Matrix e = randn(rng, d, n);
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] += noise * e.data()[i];
  return h;
}

void expect_projector(const ProjectionMatrix& pm) {
  const Matrix& p = pm.p;
  const double d = static_cast<double>(p.rows());
  EXPECT_LE(fro_diff(p, loop_transpose(p)), 1e-10 * d);
  EXPECT_LE(fro_diff(loop_matmul(p, p), p), 1e-8 * d);
  EXPECT_NEAR(trace_of(p), static_cast<double>(pm.retained_rank), 1e-6);
}

TEST(Gram, OneColumnOuterProduct) {
  EXPECT_EQ(gram(Matrix(2, 1, {1, 0})), Matrix(2, 2, {1, 0, 0, 0}));
}

TEST(Gram, OrthonormalSpanningColumnsGiveIdentity) {
  const double s = std::sqrt(0.5);
  const Matrix q(2, 2, {s, s, s, -s});
  EXPECT_LE(fro_diff(gram(q), Matrix::identity(2)), 1e-15);
}

TEST(Gram, SeededMatchesLoops) {
  std::mt19937_64 rng(8);
  const Matrix h = randn(rng, 8, 20);
  const Matrix ref = loop_matmul(h, loop_transpose(h));
  EXPECT_LE(fro_diff(gram(h), ref), 1e-12 * loop_fro(ref));
}

TEST(Gram, EmptyInputRejected) { EXPECT_THROW(gram(Matrix(3, 0)), InvalidInputError); }

TEST(NullProjection, AxisCase) {
  const auto pm = null_projection(Matrix(2, 1, {1, 0}), RankPolicy::relative(1e-8));
  EXPECT_EQ(pm.retained_rank, 1u);
  EXPECT_LE(fro_diff(pm.p, Matrix(2, 2, {0, 0, 0, 1})), 1e-15);
  expect_projector(pm);
}

TEST(NullProjection, FullRankGivesZeroProjectorAndDiagnostic) {
  std::mt19937_64 rng(1);
  const auto pm = null_projection(randn(rng, 5, 5), RankPolicy::relative());
  EXPECT_EQ(pm.retained_rank, 0u);
  EXPECT_TRUE(pm.degenerate());
  EXPECT_EQ(pm.p, Matrix(5, 5));
  EXPECT_FALSE(pm.diagnostics.empty());
}

TEST(NullProjection, ZeroAndEmptyInputGiveIdentity) {
  EXPECT_EQ(null_projection(Matrix(4, 3), RankPolicy::relative()).p, Matrix::identity(4));
  const auto empty = null_projection(Matrix(4, 0), RankPolicy::relative());
  EXPECT_EQ(empty.p, Matrix::identity(4));
  EXPECT_EQ(empty.retained_rank, 4u);
}

TEST(NullProjection, IntrinsicDimensionSixInSixteen) {
  std::mt19937_64 rng(16);
  const Matrix h = low_rank_plus_noise(rng, 16, 6, 40, 1e-8);
  const auto pm = null_projection(h, RankPolicy::relative(1e-8));
  EXPECT_EQ(pm.retained_rank, 10u);
  EXPECT_LE(loop_fro(loop_matmul(pm.p, h)) / loop_fro(h), 1e-6);
  expect_projector(pm);

  const Matrix b = oracle::gram_schmidt_null_basis(h, 1e-6);
  ASSERT_EQ(b.cols(), 10u);
  EXPECT_LE(fro_diff(pm.p, loop_matmul(b, loop_transpose(b))), 1e-6 * 16);
}

TEST(NullProjection, PolicyModes) {
  std::mt19937_64 rng(2);
  const Matrix h = low_rank_plus_noise(rng, 10, 3, 12, 0.0);
  EXPECT_EQ(null_projection(h, RankPolicy::fixed(4)).retained_rank, 4u);
  EXPECT_EQ(null_projection(h, RankPolicy::fixed(0)).p, Matrix(10, 10));
  EXPECT_EQ(null_projection(h, RankPolicy::absolute(1e-6)).retained_rank, 7u);
  EXPECT_THROW(null_projection(h, RankPolicy::fixed(11)), PolicyError);
  EXPECT_THROW(null_projection(h, RankPolicy::relative(0.0)), PolicyError);
  EXPECT_THROW(null_projection(h, RankPolicy::absolute(-1.0)), PolicyError);
  EXPECT_EQ(parse_rank_mode("fixed"), RankPolicy::Mode::kFixedRank);
  EXPECT_EQ(parse_rank_mode("relative-threshold"), RankPolicy::Mode::kRelativeThreshold);
  EXPECT_THROW(parse_rank_mode("bogus"), PolicyError);
}

TEST(NullProjection, PropertiesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dd(2, 24);
    const std::size_t d = dd(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, d)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 2 * d)(rng);
    const Matrix h = k == 0 ? Matrix(d, n) : low_rank_plus_noise(rng, d, k, n, 0.0);
    const auto pm = null_projection(h, RankPolicy::relative());
    expect_projector(pm);
    EXPECT_EQ(pm.retained_rank, d - std::min(k, n));

    // Annihilates the benign span; non-expansive everywhere.
    const Matrix x = randn(rng, d, 1);
    const Matrix in_span = loop_matmul(h, randn(rng, n, 1));
    if (loop_fro(in_span) > 0.0)
      EXPECT_LE(loop_fro(loop_matmul(pm.p, in_span)), 1e-6 * loop_fro(in_span));
    EXPECT_LE(loop_fro(loop_matmul(pm.p, x)), loop_fro(x) * (1 + 1e-10));

    // Retained rank plus the above-threshold count is d.
    std::size_t above = 0;
    const double lmax = pm.spectrum.front();
    for (double v : pm.spectrum) above += v > 1e-8 * lmax ? 1 : 0;
    if (lmax > 0.0) EXPECT_EQ(pm.retained_rank + above, d);
  }
}

TEST(Equivalence, AxisCaseInThree) {
  const auto rep = nullspace_equivalence_check(Matrix(3, 1, {1, 0, 0}), RankPolicy::relative());
  EXPECT_TRUE(rep.equivalent);
  EXPECT_EQ(rep.gram_rank, 2u);
  EXPECT_EQ(rep.direct_rank, 2u);
}

TEST(Equivalence, ZeroInput) {
  const auto rep = nullspace_equivalence_check(Matrix(4, 5), RankPolicy::relative());
  EXPECT_TRUE(rep.equivalent);
  EXPECT_EQ(rep.gram_rank, 4u);
  EXPECT_EQ(rep.direct_rank, 4u);
}

TEST(Equivalence, SeededRankFive) {
  std::mt19937_64 rng(12);
  const Matrix h = low_rank_plus_noise(rng, 12, 5, 30, 0.0);
  const auto rep = nullspace_equivalence_check(h, RankPolicy::relative());
  EXPECT_TRUE(rep.equivalent);
  EXPECT_EQ(rep.gram_rank, 7u);
  EXPECT_EQ(rep.direct_rank, 7u);
  EXPECT_LE(rep.discrepancy, 1e-6 * 12);

  const Matrix b = oracle::gram_schmidt_null_basis(h, 1e-8);
  EXPECT_EQ(b.cols(), 7u);
  const auto pm = null_projection(h, RankPolicy::relative());
  EXPECT_LE(fro_diff(pm.p, loop_matmul(b, loop_transpose(b))), 1e-6 * 12);
}

}  // namespace
