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

#include "nss/instances.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nss/linalg.hpp"

namespace nss::instances {

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

Matrix orthonormal(Rng& rng, std::size_t rows, std::size_t cols) {
  using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix g = gaussian(rng, rows, rows);
  const Eigen::Map<const Dense> gm(g.data().data(), static_cast<Eigen::Index>(rows),
                                   static_cast<Eigen::Index>(rows));
  Eigen::HouseholderQR<Dense> qr(gm);
  const Dense q = qr.householderQ();
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(i, j) = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

Matrix low_rank(Rng& rng, std::size_t d, std::size_t rank, std::size_t n) {
  rank = std::min({rank, n, d});
  if (rank == 0) return Matrix(d, n);
  const Matrix u = orthonormal(rng, d, rank);
  const Matrix v = orthonormal(rng, n, rank);
  Matrix us = u;
  for (std::size_t k = 0; k < rank; ++k) {
    const double s = std::pow(10.0, uniform_real(rng, -1.0, 1.0));
    for (std::size_t i = 0; i < d; ++i) us(i, k) *= s;
  }
  return matmul_transposed(us, v);
}

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SolverProblem solver_problem(Rng& rng, std::size_t d_min, std::size_t d_max) {
  SolverProblem prob;
  const std::size_t d = uniform_int(rng, d_min, d_max);
  const std::size_t benign_rank = uniform_int(rng, 0, d - 1);
  const std::size_t n_b = uniform_int(rng, std::max<std::size_t>(benign_rank, 1), 2 * d);
  const std::size_t n_m = uniform_int(rng, 1, 12);
  prob.benign = low_rank(rng, d, benign_rank, n_b);
  prob.malicious = gaussian(rng, d, n_m);
  prob.refusal = gaussian(rng, d, n_m);
  prob.attribution = gaussian(rng, d, n_m);
  prob.projector = null_projection(prob.benign, RankPolicy::relative());
  prob.alpha = uniform_real(rng, 0.1, 2.0);
  prob.beta = uniform_real(rng, 0.0, 0.5);
  return prob;
}

}  // namespace nss::instances
