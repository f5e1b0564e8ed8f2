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

#ifndef NSS_ORACLE_HPP_
#define NSS_ORACLE_HPP_

// Brute-force reference routines. They deliberately share no code path with
// the production solver beyond the Matrix container, and exist to check it.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nss/error.hpp"
#include "nss/linalg.hpp"
#include "nss/matrix.hpp"

namespace nss::oracle {

// Cyclic Jacobi rotations. Values descending, vectors sign-normalised the
// same way as eig_symmetric.
EigenDecomposition jacobi_eigen(const Matrix& m, int max_sweeps = 100);

// Orthonormal basis (as columns) of {x : x^T H = 0}. Column-pivoted modified
// Gram-Schmidt on H decides the numerical rank: a residual column norm at or
// below tol * ||H||_F counts as dependent.
Matrix gram_schmidt_null_basis(const Matrix& h, double tol);

// Gauss-Jordan inverse with partial pivoting. Throws InvalidInputError for a
// singular matrix.
Matrix explicit_inverse(const Matrix& m);

// ||A A+ A - A||, ||A+ A A+ - A+||, ||(A A+)^T - A A+||, ||(A+ A)^T - A+ A||.
std::array<double, 4> penrose_residuals(const Matrix& a, const Matrix& a_pinv);

// Triple-loop product with the same summation order as matmul.
Matrix naive_matmul(const Matrix& a, const Matrix& b);

// ||W X - Y||^2 + (alpha + beta) ||W P||^2, X = P H_m, Y = R + beta V, by
// explicit loops.
double compact_objective(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                         const Matrix& attribution, const Matrix& p, double alpha, double beta);

// 2 (W X - Y) X^T + 2 (alpha + beta) W P P^T.
Matrix gradient(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                const Matrix& attribution, const Matrix& p, double alpha, double beta);

// Central difference of `f` at `w` along entry (i, j).
double central_difference(const std::function<double(const Matrix&)>& f, const Matrix& w,
                          std::size_t i, std::size_t j, double step);

struct GradientSolveConfig {
  enum class Init { kZeros, kSeededGaussian };

  std::size_t steps = 5000;
  double learning_rate = 1e-2;
  Init init = Init::kZeros;
  std::uint64_t seed = 0;
  // Stop early once ||grad||_F falls to this value. 0 disables the target
  // and instead stops once J stops resolving progress.
  double gradient_tol = 0.0;
  // Rate multiplier after an accepted step (1 keeps the rate fixed).
  double growth = 1.0;

  // Throws ConfigError unless steps >= 1 and learning_rate > 0.
  void validate() const;
};

struct GradientSolveResult {
  Matrix w;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t accepted_steps = 0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

// 0.5 / (||P H_m||_F^2 + alpha + beta), a safe first step for the quadratic.
double suggested_learning_rate(const Matrix& malicious, const Matrix& p, double alpha,
                               double beta);

// Plain gradient descent on the compact objective. A step that raises the
// objective is rejected and the rate halved; ten rejections in a row raise
// DivergenceError carrying the rejected objective values. An increase no
// larger than 1e-13 relative ends the run as converged.
GradientSolveResult gradient_solve(const Matrix& malicious, const Matrix& refusal,
                                   const Matrix& attribution, const Matrix& p, double alpha,
                                   double beta, const GradientSolveConfig& cfg);

}  // namespace nss::oracle

#endif  // NSS_ORACLE_HPP_
