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

#ifndef NSS_NULLSPACE_HPP_
#define NSS_NULLSPACE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "nss/matrix.hpp"

namespace nss {

// Decides which eigen-directions of the benign Gram matrix count as
// "near zero" and therefore span the null space.
struct RankPolicy {
  enum class Mode { kRelativeThreshold, kAbsoluteThreshold, kFixedRank };

  Mode mode = Mode::kRelativeThreshold;
  double epsilon = 1e-8;  // threshold modes
  std::size_t r = 0;      // fixed-rank mode

  static RankPolicy relative(double epsilon = 1e-8) { return {Mode::kRelativeThreshold, epsilon, 0}; }
  static RankPolicy absolute(double epsilon) { return {Mode::kAbsoluteThreshold, epsilon, 0}; }
  static RankPolicy fixed(std::size_t r) { return {Mode::kFixedRank, 0.0, r}; }

  // Throws PolicyError when epsilon <= 0 in a threshold mode or r > d.
  void validate(std::size_t d) const;

  friend bool operator==(const RankPolicy&, const RankPolicy&) = default;
};

const char* to_string(RankPolicy::Mode mode);
// Accepts "relative", "absolute" and "fixed"; throws PolicyError otherwise.
RankPolicy::Mode parse_rank_mode(const std::string& name);

// Orthogonal projector onto the left null space of a benign activation
// matrix. Immutable once built.
struct ProjectionMatrix {
  Matrix p;
  std::size_t retained_rank = 0;
  // Eigenvalues of H_b H_b^T, descending. Empty for projectors read back from
  // disk, where only P and its rank are stored.
  std::vector<double> spectrum;
  RankPolicy policy;
  // Human-readable warnings raised during construction. A retained rank of
  // zero means steering is a global no-op and is always reported here.
  std::vector<std::string> diagnostics;

  std::size_t dim() const noexcept { return p.rows(); }
  bool degenerate() const noexcept { return retained_rank == 0; }
};

// H_b H_b^T. Throws InvalidInputError when H_b has no columns or rows.
Matrix gram(const Matrix& benign);

// P = U_hat U_hat^T where U_hat holds the eigenvectors of gram(benign) whose
// eigenvalues pass the policy. A benign matrix with zero columns (or all
// zeros) yields P = I.
ProjectionMatrix null_projection(const Matrix& benign, const RankPolicy& policy);

struct EquivalenceReport {
  bool equivalent = false;
  std::size_t gram_rank = 0;    // retained rank via the Gram eigen route
  std::size_t direct_rank = 0;  // null-space dimension via QR of H_b itself
  double discrepancy = 0.0;     // ||P_gram - P_direct||_F
  double tolerance = 0.0;       // 1e-6 * d
};

// Builds the projector twice, once from the Gram eigendecomposition and once
// from a column-pivoted Householder QR of H_b directly, and compares them.
// Never throws for numerical disagreement; the report carries the verdict.
EquivalenceReport nullspace_equivalence_check(const Matrix& benign, const RankPolicy& policy);

}  // namespace nss

#endif  // NSS_NULLSPACE_HPP_
