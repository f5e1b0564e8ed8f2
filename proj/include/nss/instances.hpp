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

#ifndef NSS_INSTANCES_HPP_
#define NSS_INSTANCES_HPP_

// Seeded random problem instances shared by the verify command and the test
// suites.

#include <cstddef>
#include <random>

#include "nss/matrix.hpp"
#include "nss/nullspace.hpp"

namespace nss::instances {

using Rng = std::mt19937_64;

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols);
// rows x cols with orthonormal columns (cols <= rows).
Matrix orthonormal(Rng& rng, std::size_t rows, std::size_t cols);
// d x n matrix of exact rank min(rank, n, d) with singular values drawn
// log-uniformly from [0.1, 10].
Matrix low_rank(Rng& rng, std::size_t d, std::size_t rank, std::size_t n);

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);

struct SolverProblem {
  Matrix benign;
  Matrix malicious;
  Matrix refusal;
  Matrix attribution;
  ProjectionMatrix projector;
  double alpha = 1.0;
  double beta = 0.1;
};

// d in [d_min, d_max], N_m in [1, 12]; the benign rank is drawn so that the
// null space is non-trivial.
SolverProblem solver_problem(Rng& rng, std::size_t d_min, std::size_t d_max);

}  // namespace nss::instances

#endif  // NSS_INSTANCES_HPP_
