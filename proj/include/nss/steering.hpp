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

#ifndef NSS_STEERING_HPP_
#define NSS_STEERING_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "nss/matrix.hpp"
#include "nss/nullspace.hpp"
#include "nss/sha256.hpp"

namespace nss {

// Mean-difference direction between refusal and compliance activations.
struct RefusalDirection {
  Vector direction;
  std::size_t n_refusal = 0;
  std::size_t n_compliance = 0;
  int layer_tag = 0;
};

RefusalDirection refusal_direction(const Matrix& refusal, const Matrix& compliance, int layer_tag);

// h + lambda * r. The unconstrained baseline; it moves benign activations too.
Vector additive_steer(std::span<const double> h, const RefusalDirection& r, double lambda);

// Column i is full[:, i] - masked[:, i].
Matrix attribution_deltas(const Matrix& full, const Matrix& masked);

struct SolverConfig {
  double alpha = 1.0;
  double beta = 0.1;
  RankPolicy rank_policy = RankPolicy::relative();
  // Relative singular-value cutoff for the pseudoinverse; unset means
  // 1e-12 * d.
  std::optional<double> pinv_tol;
  std::uint64_t seed = 0;
  // When false the refusal target is replaced by zero, leaving only the
  // attribution term and the regulariser (ablation mode).
  bool use_refusal_target = true;
  double lambda_default = 5.0;
  int layer_tag = 0;

  // Throws ConfigError unless alpha > 0, beta >= 0 and pinv_tol > 0.
  void validate() const;
};

// Input bundle digests in fit order. A zero digest marks an input that did
// not take part in the solve.
struct Provenance {
  Sha256Digest benign{};
  Sha256Digest malicious{};
  Sha256Digest masked{};
  Sha256Digest refusal{};

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Solved transform. The effective map is delta * projector.p; it is exactly
// zero on the benign span the projector was built from.
struct SteeringArtifact {
  Matrix delta;
  ProjectionMatrix projector;
  double alpha = 1.0;
  double beta = 0.1;
  double lambda_default = 5.0;
  int layer_tag = 0;
  // False for artifacts solved in refusal-free mode. On disk this is encoded
  // as a zero refusal digest next to a non-zero malicious digest.
  bool refusal_target = true;
  Provenance provenance;

  std::size_t dim() const noexcept { return delta.rows(); }
};

// Closed-form minimiser
//
//   delta = (R + beta V) H_m^T P^T (P H_m H_m^T P^T + (alpha + beta) P P^T)^+
//
// evaluated as written. The bracketed matrix is singular whenever P is a
// proper projector, hence the pseudoinverse. R is read as the displacement
// each malicious column should receive at lambda = 1; to land on absolute
// states S at strength lambda pass R = (S - H_m) / lambda.
SteeringArtifact solve_transform(const Matrix& malicious, const Matrix& refusal,
                                 const Matrix& attribution, const ProjectionMatrix& projector,
                                 const SolverConfig& cfg);

// ||W (X X^T + (alpha+beta) P P^T) - Y X^T||_F / ||Y X^T||_F with X = P H_m and
// Y = R + beta V. Zero when both sides vanish.
double normal_equation_residual(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                                const Matrix& attribution, const Matrix& p, double alpha,
                                double beta);

// ||delta P H_b||_F / (||delta||_F ||H_b||_F); zero when either norm is zero.
double benign_annihilation(const SteeringArtifact& artifact, const Matrix& benign);

struct ObjectiveTerms {
  double refusal_fit = 0.0;      // ||W P H_m - R||_F^2
  double smoothness = 0.0;       // ||W P||_F^2
  double attribution_fit = 0.0;  // ||W P H_m - V||_F^2
  // refusal_fit + alpha * smoothness + beta * attribution_fit
  double literal = 0.0;
  // ||W X - Y||_F^2 + (alpha + beta) ||W P||_F^2 with X = P H_m, Y = R + beta V.
  // This is the form the closed-form solution minimises.
  double compact = 0.0;
  // literal - compact. Expanding both gives
  //   (||R||^2 + beta ||V||^2 - ||Y||^2) + beta (||W X||^2 - ||W P||^2),
  // so the two forms differ only by a constant when beta = 0. For beta > 0
  // the second group depends on W and the literal form has a different
  // minimiser: (R + beta V) X^T ((1 + beta) X X^T + alpha P)^+.
  double expansion_residue = 0.0;
};

ObjectiveTerms objective_value(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                               const Matrix& attribution, const Matrix& p, double alpha,
                               double beta);

// lambda * delta * (P h); P h is formed first.
Vector steer_displacement(std::span<const double> h, const SteeringArtifact& artifact,
                          double lambda);
// h + lambda * delta * P * h.
Vector steer(std::span<const double> h, const SteeringArtifact& artifact, double lambda);
// Column-wise steer; identical bit for bit to calling steer per column.
Matrix steer_batch(const Matrix& h, const SteeringArtifact& artifact, double lambda);

}  // namespace nss

#endif  // NSS_STEERING_HPP_
