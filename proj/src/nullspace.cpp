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

#include "nss/nullspace.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nss/error.hpp"
#include "nss/linalg.hpp"

namespace nss {

void RankPolicy::validate(std::size_t d) const {
  switch (mode) {
    case Mode::kRelativeThreshold:
    case Mode::kAbsoluteThreshold:
      if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw PolicyError("rank policy epsilon must be positive and finite");
      break;
    case Mode::kFixedRank:
      if (r > d)
        throw PolicyError("fixed rank " + std::to_string(r) + " exceeds dimension " +
                          std::to_string(d));
      break;
  }
}

const char* to_string(RankPolicy::Mode mode) {
  switch (mode) {
    case RankPolicy::Mode::kRelativeThreshold: return "relative";
    case RankPolicy::Mode::kAbsoluteThreshold: return "absolute";
    case RankPolicy::Mode::kFixedRank: return "fixed";
  }
  return "unknown";
}

RankPolicy::Mode parse_rank_mode(const std::string& name) {
  if (name == "relative" || name == "relative-threshold") return RankPolicy::Mode::kRelativeThreshold;
  if (name == "absolute" || name == "absolute-threshold") return RankPolicy::Mode::kAbsoluteThreshold;
  if (name == "fixed" || name == "fixed-rank") return RankPolicy::Mode::kFixedRank;
  throw PolicyError("unknown rank policy mode '" + name + "'");
}

Matrix gram(const Matrix& benign) {
  if (benign.rows() == 0 || benign.cols() == 0)
    throw InvalidInputError("gram: benign matrix is empty");
  return matmul_transposed(benign, benign);
}

ProjectionMatrix null_projection(const Matrix& benign, const RankPolicy& policy) {
  const std::size_t d = benign.rows();
  if (d == 0) throw InvalidInputError("null_projection: zero-dimensional activations");
  policy.validate(d);

  ProjectionMatrix out;
  out.policy = policy;

  if (benign.cols() == 0) {
    out.p = Matrix::identity(d);
    out.retained_rank = d;
    out.spectrum.assign(d, 0.0);
    out.diagnostics.push_back("benign set is empty; projector is the identity");
    return out;
  }

  const EigenDecomposition eig = eig_symmetric(gram(benign));
  out.spectrum = eig.values;
  const double lambda_max = eig.values.front();

  // Eigenvalues are descending, so the null directions form a suffix.
  std::size_t first_null = d;
  switch (policy.mode) {
    case RankPolicy::Mode::kRelativeThreshold:
      if (lambda_max <= 0.0) {
        first_null = 0;
      } else {
        while (first_null > 0 && eig.values[first_null - 1] <= policy.epsilon * lambda_max)
          --first_null;
      }
      break;
    case RankPolicy::Mode::kAbsoluteThreshold:
      while (first_null > 0 && eig.values[first_null - 1] <= policy.epsilon) --first_null;
      break;
    case RankPolicy::Mode::kFixedRank:
      first_null = d - policy.r;
      break;
  }

  out.retained_rank = d - first_null;
  const Matrix basis = eig.vectors.columns(first_null, out.retained_rank);
  out.p = matmul_transposed(basis, basis);

  if (out.retained_rank == 0) {
    out.diagnostics.push_back(
        "retained rank is 0: benign activations span the whole space, the null space is "
        "trivial and steering will be a no-op everywhere");
  }
  return out;
}

EquivalenceReport nullspace_equivalence_check(const Matrix& benign, const RankPolicy& policy) {
  using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  EquivalenceReport report;
  const std::size_t d = benign.rows();
  report.tolerance = 1e-6 * static_cast<double>(d);

  const ProjectionMatrix from_gram = null_projection(benign, policy);
  report.gram_rank = from_gram.retained_rank;

  Dense direct_basis;
  const bool zero_input = benign.cols() == 0 || frobenius_norm(benign) == 0.0;
  if (zero_input) {
    direct_basis = Dense::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  } else {
    const Eigen::Map<const Dense> h(benign.data().data(), static_cast<Eigen::Index>(d),
                                    static_cast<Eigen::Index>(benign.cols()));
    Eigen::ColPivHouseholderQR<Dense> qr(h);
    const Dense r = qr.matrixR().template triangularView<Eigen::Upper>();
    const Eigen::Index diag = std::min(r.rows(), r.cols());
    const double lead = std::abs(r(0, 0));

    // Eigenvalues of the Gram matrix are squared singular values, so the
    // threshold is applied to |R_ii| through a square root.
    Eigen::Index rank = 0;
    switch (policy.mode) {
      case RankPolicy::Mode::kRelativeThreshold:
        while (rank < diag && std::abs(r(rank, rank)) > std::sqrt(policy.epsilon) * lead) ++rank;
        break;
      case RankPolicy::Mode::kAbsoluteThreshold:
        while (rank < diag && std::abs(r(rank, rank)) > std::sqrt(policy.epsilon)) ++rank;
        break;
      case RankPolicy::Mode::kFixedRank:
        rank = static_cast<Eigen::Index>(d - policy.r);
        break;
    }
    const Dense q = qr.householderQ();
    direct_basis = q.rightCols(static_cast<Eigen::Index>(d) - rank);
  }
  report.direct_rank = static_cast<std::size_t>(direct_basis.cols());

  const Dense p_direct = direct_basis * direct_basis.transpose();
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff =
          from_gram.p(i, j) - p_direct(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      acc += diff * diff;
    }
  }
  report.discrepancy = std::sqrt(acc);
  report.equivalent =
      report.gram_rank == report.direct_rank && report.discrepancy <= report.tolerance;
  return report;
}

}  // namespace nss
