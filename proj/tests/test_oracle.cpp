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
#include "nss/instances.hpp"
#include "nss/nullspace.hpp"
#include "nss/oracle.hpp"
#include "nss/steering.hpp"
#include "test_support.hpp"

namespace {

using namespace nss;
using namespace nss::testing_support;

TEST(Gradient, ZeroTransform) {
  instances::Rng irng(5);
  const auto prob = instances::solver_problem(irng, 4, 10);
  const Matrix& p = prob.projector.p;
  const std::size_t d = p.rows();
  const Matrix g = oracle::gradient(Matrix(d, d), prob.malicious, prob.refusal, prob.attribution, p,
                                    prob.alpha, prob.beta);
  Matrix y = prob.refusal;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += prob.beta * prob.attribution.data()[i];
  const Matrix x = loop_matmul(p, prob.malicious);
  const Matrix ref = loop_matmul(y, loop_transpose(x));
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(g.data()[i], -2.0 * ref.data()[i], 1e-12 * loop_fro(ref));
}

TEST(Gradient, StationaryAtClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    instances::Rng irng(seed);
    const auto prob = instances::solver_problem(irng, 4, 16);
    SolverConfig cfg;
    cfg.alpha = prob.alpha;
    cfg.beta = prob.beta;
    const auto art = solve_transform(prob.malicious, prob.refusal, prob.attribution,
                                     prob.projector, cfg);
    const Matrix& p = prob.projector.p;
    const Matrix g = oracle::gradient(art.delta, prob.malicious, prob.refusal, prob.attribution, p,
                                      prob.alpha, prob.beta);
    Matrix y = prob.refusal;
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += prob.beta * prob.attribution.data()[i];
    const double scale = loop_fro(loop_matmul(y, loop_transpose(loop_matmul(p, prob.malicious))));
    EXPECT_LE(loop_fro(g), 1e-6 * std::max(scale, 1.0));
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    instances::Rng irng(seed);
    std::mt19937_64 rng(seed + 500);
    const auto prob = instances::solver_problem(irng, 3, 12);
    const Matrix& p = prob.projector.p;
    const std::size_t d = p.rows();
    const Matrix w = randn(rng, d, d);
    const Matrix g = oracle::gradient(w, prob.malicious, prob.refusal, prob.attribution, p,
                                      prob.alpha, prob.beta);
    const auto f = [&](const Matrix& m) {
      return objective_value(m, prob.malicious, prob.refusal, prob.attribution, p, prob.alpha,
                             prob.beta)
          .compact;
    };
    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
    for (int t = 0; t < 20; ++t) {
      const std::size_t i = pick(rng), j = pick(rng);
      const double fd = oracle::central_difference(f, w, i, j, 1e-6);
      const double scale = std::max({std::abs(fd), std::abs(g(i, j)), 1e-3 * loop_fro(g)});
      EXPECT_LE(std::abs(fd - g(i, j)) / scale, 1e-4) << "seed " << seed << " (" << i << "," << j << ")";
    }
  }
}

TEST(GradientSolve, ZeroMaliciousConvergesToConstant) {
  std::mt19937_64 rng(8);
  const std::size_t d = 6, n = 4;
  const Matrix hb = randn(rng, d, 2);
  const auto pm = null_projection(hb, RankPolicy::relative());
  const Matrix r = randn(rng, d, n), v = randn(rng, d, n);
  oracle::GradientSolveConfig cfg;
  cfg.init = oracle::GradientSolveConfig::Init::kSeededGaussian;
  cfg.seed = 3;
  cfg.learning_rate = oracle::suggested_learning_rate(Matrix(d, n), pm.p, 1.0, 0.2);
  cfg.growth = 1.05;
  cfg.steps = 3000;
  cfg.gradient_tol = 1e-10;
  const auto res = oracle::gradient_solve(Matrix(d, n), r, v, pm.p, 1.0, 0.2, cfg);
  EXPECT_LE(loop_fro(loop_matmul(res.w, pm.p)), 1e-8);
  const auto t = objective_value(res.w, Matrix(d, n), r, v, pm.p, 1.0, 0.2);
  const double expected = std::pow(loop_fro(r), 2) + 0.2 * std::pow(loop_fro(v), 2);
  EXPECT_NEAR(t.literal, expected, 1e-10 * expected);
}

TEST(GradientSolve, AgreesWithClosedForm) {
  std::mt19937_64 rng(85);
  const std::size_t d = 8, n = 5;
  const auto pm = null_projection(randn(rng, d, 2), RankPolicy::relative());
  const Matrix hm = randn(rng, d, n), r = randn(rng, d, n), v = randn(rng, d, n);
  SolverConfig scfg;
  const auto art = solve_transform(hm, r, v, pm, scfg);
  oracle::GradientSolveConfig cfg;
  cfg.steps = 5000;
  cfg.learning_rate = oracle::suggested_learning_rate(hm, pm.p, scfg.alpha, scfg.beta);
  cfg.growth = 1.05;
  const auto res = oracle::gradient_solve(hm, r, v, pm.p, scfg.alpha, scfg.beta, cfg);
  const double j_star = oracle::compact_objective(art.delta, hm, r, v, pm.p, scfg.alpha, scfg.beta);
  EXPECT_LE(std::abs(res.objective - j_star), 1e-6 * j_star);
  const Matrix eff = loop_matmul(art.delta, pm.p);
  EXPECT_LE(fro_diff(eff, loop_matmul(res.w, pm.p)), 1e-3 * loop_fro(eff));
}

TEST(GradientSolve, RidgeCaseMatchesExplicitInverse) {
  std::mt19937_64 rng(86);
  const std::size_t d = 5, n = 7;
  const Matrix hm = randn(rng, d, n), r = randn(rng, d, n);
  const Matrix id = Matrix::identity(d);
  oracle::GradientSolveConfig cfg;
  cfg.steps = 5000;
  cfg.learning_rate = oracle::suggested_learning_rate(hm, id, 0.5, 0.0);
  cfg.growth = 1.05;
  const auto res = oracle::gradient_solve(hm, r, Matrix(d, n), id, 0.5, 0.0, cfg);
  Matrix sys = loop_matmul(hm, loop_transpose(hm));
  for (std::size_t i = 0; i < d; ++i) sys(i, i) += 0.5;
  const Matrix ridge = loop_matmul(loop_matmul(r, loop_transpose(hm)), oracle::explicit_inverse(sys));
  EXPECT_LE(fro_diff(res.w, ridge), 1e-6 * loop_fro(ridge));
}

TEST(GradientSolve, DivergenceCarriesTrace) {
  std::mt19937_64 rng(87);
  const Matrix hm = randn(rng, 4, 3), r = randn(rng, 4, 3);
  oracle::GradientSolveConfig cfg;
  cfg.learning_rate = 1e30;
  cfg.steps = 100;
  try {
    oracle::gradient_solve(hm, r, Matrix(4, 3), Matrix::identity(4), 1.0, 0.0, cfg);
    FAIL() << "expected divergence";
  } catch (const oracle::DivergenceError& e) {
    EXPECT_FALSE(e.trace().empty());
  }
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.steps = 1;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(GramSchmidtNullBasis, AxisAndFullRank) {
  const Matrix b = oracle::gram_schmidt_null_basis(Matrix(2, 1, {1, 0}), 1e-10);
  ASSERT_EQ(b.cols(), 1u);
  EXPECT_NEAR(std::abs(b(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(b(0, 0), 0.0, 1e-15);
  EXPECT_EQ(oracle::gram_schmidt_null_basis(Matrix::identity(4), 1e-10).cols(), 0u);
}

TEST(GramSchmidtNullBasis, SeededRankThree) {
  std::mt19937_64 rng(10);
  const Matrix h = loop_matmul(randn(rng, 10, 3), randn(rng, 3, 4));
  const Matrix b = oracle::gram_schmidt_null_basis(h, 1e-8);
  ASSERT_EQ(b.cols(), 7u);
  EXPECT_LE(fro_diff(loop_matmul(loop_transpose(b), b), Matrix::identity(7)), 1e-10);
  EXPECT_LE(loop_fro(loop_matmul(loop_transpose(b), h)), 1e-10 * loop_fro(h));
}

TEST(Jacobi, ReconstructsAndSorts) {
  std::mt19937_64 rng(13);
  const Matrix a = randn(rng, 6, 6);
  const Matrix m = loop_matmul(a, loop_transpose(a));
  const auto e = oracle::jacobi_eigen(m);
  for (std::size_t k = 1; k < 6; ++k) EXPECT_GE(e.values[k - 1], e.values[k]);
  Matrix rec(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      for (std::size_t k = 0; k < 6; ++k) rec(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
  EXPECT_LE(fro_diff(rec, m), 1e-10 * loop_fro(m));
}

TEST(ExplicitInverse, InvertsAndRejectsSingular) {
  std::mt19937_64 rng(14);
  const Matrix a = randn(rng, 5, 5);
  EXPECT_LE(fro_diff(loop_matmul(a, oracle::explicit_inverse(a)), Matrix::identity(5)), 1e-10);
  EXPECT_THROW(oracle::explicit_inverse(Matrix(3, 3)), InvalidInputError);
}

}  // namespace
