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

#include "nss/steering.hpp"

#include <cmath>

#include "nss/error.hpp"
#include "nss/linalg.hpp"

namespace nss {
namespace {

Vector column_mean(const Matrix& m) {
  Vector mean(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j);
    mean[i] = acc / static_cast<double>(m.cols());
  }
  return mean;
}

void check_solver_shapes(const Matrix& malicious, const Matrix& refusal,
                         const Matrix& attribution, const Matrix& p) {
  const std::size_t d = malicious.rows();
  if (p.rows() != d || p.cols() != d) throw ShapeError("projector dimension does not match H_m");
  if (refusal.rows() != d || refusal.cols() != malicious.cols())
    throw ShapeError("refusal targets must have the shape of H_m");
  if (attribution.rows() != d || attribution.cols() != malicious.cols())
    throw ShapeError("attribution deltas must have the shape of H_m");
}

double squared_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return acc;
}

}  // namespace

RefusalDirection refusal_direction(const Matrix& refusal, const Matrix& compliance,
                                   int layer_tag) {
  if (refusal.cols() == 0 || compliance.cols() == 0)
    throw InvalidInputError("refusal_direction: refusal and compliance sets must be non-empty");
  if (refusal.rows() != compliance.rows())
    throw ShapeError("refusal_direction: refusal and compliance dimensions differ");
  if (layer_tag < 0) throw InvalidInputError("refusal_direction: layer tag must be >= 0");

  RefusalDirection out;
  const Vector mr = column_mean(refusal);
  const Vector mc = column_mean(compliance);
  out.direction.resize(mr.size());
  for (std::size_t i = 0; i < mr.size(); ++i) out.direction[i] = mr[i] - mc[i];
  out.n_refusal = refusal.cols();
  out.n_compliance = compliance.cols();
  out.layer_tag = layer_tag;
  return out;
}

Vector additive_steer(std::span<const double> h, const RefusalDirection& r, double lambda) {
  if (h.size() != r.direction.size()) throw ShapeError("additive_steer: dimension mismatch");
  Vector out(h.begin(), h.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * r.direction[i];
  return out;
}

Matrix attribution_deltas(const Matrix& full, const Matrix& masked) {
  if (full.rows() != masked.rows() || full.cols() != masked.cols())
    throw ShapeError("attribution_deltas: full and masked activations differ in shape");
  return subtract(full, masked);
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
  if (pinv_tol && !(*pinv_tol > 0.0)) throw ConfigError("pinv_tol must be > 0");
  if (!std::isfinite(lambda_default)) throw ConfigError("lambda_default must be finite");
}

SteeringArtifact solve_transform(const Matrix& malicious, const Matrix& refusal,
                                 const Matrix& attribution, const ProjectionMatrix& projector,
                                 const SolverConfig& cfg) {
  cfg.validate();
  check_solver_shapes(malicious, refusal, attribution, projector.p);
  const Matrix& p = projector.p;

  // Y = R + beta V, or beta V alone in refusal-free mode.
  const Matrix target = cfg.use_refusal_target ? add(refusal, scale(attribution, cfg.beta))
                                               : scale(attribution, cfg.beta);
  const Matrix x = matmul(p, malicious);                   // P H_m
  const Matrix rhs = matmul_transposed(target, x);         // Y H_m^T P^T
  const Matrix system = add(matmul_transposed(x, x),       // P H_m H_m^T P^T
                            scale(matmul_transposed(p, p), cfg.alpha + cfg.beta));
  const double tol = cfg.pinv_tol.value_or(default_pinv_tolerance(system));

  SteeringArtifact out;
  out.delta = matmul(rhs, pseudoinverse(system, tol));
  out.projector = projector;
  out.alpha = cfg.alpha;
  out.beta = cfg.beta;
  out.lambda_default = cfg.lambda_default;
  out.layer_tag = cfg.layer_tag;
  out.refusal_target = cfg.use_refusal_target;
  return out;
}

double normal_equation_residual(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                                const Matrix& attribution, const Matrix& p, double alpha,
                                double beta) {
  check_solver_shapes(malicious, refusal, attribution, p);
  const Matrix target = add(refusal, scale(attribution, beta));
  const Matrix x = matmul(p, malicious);
  const Matrix rhs = matmul_transposed(target, x);
  const Matrix system =
      add(matmul_transposed(x, x), scale(matmul_transposed(p, p), alpha + beta));
  const double num = frobenius_norm(subtract(matmul(w, system), rhs));
  const double den = frobenius_norm(rhs);
  if (den == 0.0) return num;
  return num / den;
}

double benign_annihilation(const SteeringArtifact& artifact, const Matrix& benign) {
  const double scale_ref = frobenius_norm(artifact.delta) * frobenius_norm(benign);
  if (scale_ref == 0.0) return 0.0;
  const Matrix ph = matmul(artifact.projector.p, benign);
  return frobenius_norm(matmul(artifact.delta, ph)) / scale_ref;
}

ObjectiveTerms objective_value(const Matrix& w, const Matrix& malicious, const Matrix& refusal,
                               const Matrix& attribution, const Matrix& p, double alpha,
                               double beta) {
  check_solver_shapes(malicious, refusal, attribution, p);
  if (w.rows() != p.rows() || w.cols() != p.rows())
    throw ShapeError("objective_value: W must be d x d");

  const Matrix x = matmul(p, malicious);
  const Matrix wx = matmul(w, x);
  const Matrix wp = matmul(w, p);
  const Matrix target = add(refusal, scale(attribution, beta));

  ObjectiveTerms t;
  t.refusal_fit = squared_norm(subtract(wx, refusal));
  t.smoothness = squared_norm(wp);
  t.attribution_fit = squared_norm(subtract(wx, attribution));
  t.literal = t.refusal_fit + alpha * t.smoothness + beta * t.attribution_fit;
  t.compact = squared_norm(subtract(wx, target)) + (alpha + beta) * t.smoothness;
  t.expansion_residue = t.literal - t.compact;
  return t;
}

Vector steer_displacement(std::span<const double> h, const SteeringArtifact& artifact,
                          double lambda) {
  if (h.size() != artifact.dim()) throw ShapeError("steer: dimension does not match artifact");
  Vector out = matvec(artifact.delta, matvec(artifact.projector.p, h));
  for (double& v : out) v *= lambda;
  return out;
}

Vector steer(std::span<const double> h, const SteeringArtifact& artifact, double lambda) {
  // Exact identity at zero strength, including signed zeros in h.
  if (lambda == 0.0) {
    if (h.size() != artifact.dim()) throw ShapeError("steer: dimension does not match artifact");
    return Vector(h.begin(), h.end());
  }
  Vector out = steer_displacement(h, artifact, lambda);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h[i];
  return out;
}

Matrix steer_batch(const Matrix& h, const SteeringArtifact& artifact, double lambda) {
  if (h.rows() != artifact.dim()) throw ShapeError("steer_batch: dimension does not match artifact");
  Matrix out(h.rows(), h.cols());
  for (std::size_t j = 0; j < h.cols(); ++j) out.set_column(j, steer(h.column(j), artifact, lambda));
  return out;
}

}  // namespace nss
