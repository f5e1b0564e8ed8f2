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

#include "nss/synthdata.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "nss/error.hpp"
#include "nss/linalg.hpp"

namespace nss {
namespace {

constexpr double kMaskRetained = 0.9;  // share of the harmful displacement surviving masking
constexpr double kTargetNoise = 0.05;  // std of refusal-target jitter
// Gain of the sample-specific part of each refusal target.
constexpr double kTargetCoupling = 0.5;
constexpr int kMaxAttempts = 8;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double normal() { return normal_(rng_); }
  double uniform() { return uniform_(rng_); }
  Vector normal_vector(std::size_t n) {
    Vector v(n);
    for (double& x : v) x = normal();
    return v;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Orthonormal d x d basis from the QR factor of a Gaussian matrix.
Matrix random_orthonormal(Sampler& s, std::size_t d) {
  using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Dense g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = s.normal();
  Eigen::HouseholderQR<Dense> qr(g);
  const Dense q = qr.householderQ();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out(i, j) = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

Vector axpy(const Vector& base, double a, const Vector& dir) {
  Vector out = base;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * dir[i];
  return out;
}

struct Geometry {
  Matrix frame;       // d x k
  Matrix complement;  // d x (d - k)
  Vector benign_coeff;
  Vector benign_centroid;
  Vector malicious_centroid;
  Vector refusal_centroid;
};

// Removes the benign-subspace component of v.
Vector out_of_subspace(const Matrix& frame, const Vector& v) {
  const Vector coeff = matvec(transpose(frame), v);
  const Vector in = matvec(frame, coeff);
  Vector out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= in[i];
  return out;
}

Vector benign_column(Sampler& s, const SynthConfig& cfg, const Geometry& g) {
  const std::size_t k = cfg.k_benign;
  Vector coeff = g.benign_coeff;
  for (std::size_t i = 0; i < k; ++i) coeff[i] += s.normal();
  Vector col = matvec(g.frame, coeff);
  if (cfg.subspace_noise > 0.0) {
    Vector n = matvec(g.complement, s.normal_vector(cfg.d - k));
    const double target = cfg.subspace_noise * norm(col) * s.uniform();
    const double nn = norm(n);
    if (nn > 0.0)
      for (std::size_t i = 0; i < col.size(); ++i) col[i] += n[i] * (target / nn);
  }
  return col;
}

Vector cluster_column(Sampler& s, const Vector& centroid) {
  Vector col = centroid;
  for (double& x : col) x += s.normal();
  return col;
}

Matrix masked_of(const Matrix& malicious, const Matrix& frame) {
  Matrix out = malicious;
  for (std::size_t j = 0; j < malicious.cols(); ++j) {
    const Vector h = malicious.column(j);
    const Vector off = out_of_subspace(frame, h);
    out.set_column(j, axpy(h, -(1.0 - kMaskRetained), off));
  }
  return out;
}

// Each refusal target is the centroid displacement plus a fixed linear
// function of the sample's own off-subspace content (the query-specific part
// of a refusal) plus jitter.
Matrix targets(Sampler& s, const Vector& displacement, const Matrix& coupling,
               const Matrix& frame, const Matrix& malicious, const Vector& centroid) {
  Matrix out(displacement.size(), malicious.cols());
  for (std::size_t j = 0; j < malicious.cols(); ++j) {
    const Vector own = out_of_subspace(frame, axpy(malicious.column(j), -1.0, centroid));
    Vector col = axpy(displacement, 1.0, matvec(coupling, own));
    for (double& x : col) x += kTargetNoise * s.normal();
    out.set_column(j, col);
  }
  return out;
}

Vector column_mean(const Matrix& m) {
  Vector mean(m.rows(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) mean[i] += m(i, j);
  for (double& x : mean) x /= static_cast<double>(m.cols());
  return mean;
}

SynthDataset draw(const SynthConfig& cfg, double separation, std::uint64_t seed) {
  Sampler s(seed);
  const std::size_t d = cfg.d;
  const std::size_t k = cfg.k_benign;

  Geometry g;
  const Matrix basis = random_orthonormal(s, d);
  g.frame = basis.columns(0, k);
  g.complement = basis.columns(k, d - k);
  const Vector q_out = basis.column(k);
  // Refusal states move along a second out-of-subspace axis, orthogonal to the
  // harmful one; with a single spare dimension they point the other way.
  const Vector q_ref = d - k >= 2 ? basis.column(k + 1) : axpy(Vector(d, 0.0), -1.0, q_out);

  Vector in_coeff = s.normal_vector(k);
  const double in_norm = norm(in_coeff);
  for (double& x : in_coeff) x /= in_norm;
  const Vector q_in = matvec(g.frame, in_coeff);

  g.benign_coeff = s.normal_vector(k);
  g.benign_centroid = matvec(g.frame, g.benign_coeff);
  // Harmful direction: 0.6 inside the benign subspace, 0.8 outside.
  Vector harm_dir = axpy(Vector(d, 0.0), 0.6, q_in);
  harm_dir = axpy(harm_dir, 0.8, q_out);
  g.malicious_centroid = axpy(g.benign_centroid, separation, harm_dir);
  g.refusal_centroid = axpy(g.benign_centroid, separation, q_ref);

  SynthDataset ds;
  auto fill = [&](std::size_t n, auto&& make) {
    Matrix m(d, n);
    for (std::size_t j = 0; j < n; ++j) m.set_column(j, make());
    return m;
  };
  ds.benign = fill(cfg.n_benign, [&] { return benign_column(s, cfg, g); });
  ds.malicious = fill(cfg.n_malicious, [&] { return cluster_column(s, g.malicious_centroid); });
  ds.refusal_states = fill(cfg.n_refusal, [&] { return cluster_column(s, g.refusal_centroid); });
  ds.compliance_states =
      fill(cfg.n_refusal, [&] { return cluster_column(s, g.malicious_centroid); });

  Matrix coupling(d, d);
  for (double& x : coupling.data()) x = s.normal() * kTargetCoupling / std::sqrt(static_cast<double>(d));
  ds.refusal_displacement = axpy(g.refusal_centroid, -1.0, g.malicious_centroid);
  ds.refusal = targets(s, ds.refusal_displacement, coupling, g.frame, ds.malicious,
                       g.malicious_centroid);
  ds.malicious_masked = masked_of(ds.malicious, g.frame);

  ds.benign_holdout = fill(cfg.n_holdout, [&] { return benign_column(s, cfg, g); });
  ds.malicious_holdout =
      fill(cfg.n_holdout, [&] { return cluster_column(s, g.malicious_centroid); });
  ds.refusal_holdout = targets(s, ds.refusal_displacement, coupling, g.frame,
                               ds.malicious_holdout, g.malicious_centroid);
  ds.malicious_holdout_masked = masked_of(ds.malicious_holdout, g.frame);

  // Means-difference discriminant with the threshold at the midpoint.
  const Vector mu_m = column_mean(ds.malicious);
  const Vector mu_b = column_mean(ds.benign);
  ds.probe.w = axpy(mu_m, -1.0, mu_b);
  const Vector mid = axpy(mu_b, 0.5, ds.probe.w);
  ds.probe.b = -dot(ds.probe.w, mid);

  ds.benign_frame = g.frame;
  ds.benign_centroid = g.benign_centroid;
  ds.malicious_centroid = g.malicious_centroid;
  ds.refusal_centroid = g.refusal_centroid;
  ds.effective_separation = separation;
  return ds;
}

bool construction_holds(const SynthDataset& ds, double separation) {
  if (harm_probe_rate(ds.malicious, ds.probe) < 0.95) return false;
  if (harm_probe_rate(ds.benign, ds.probe) > 0.05) return false;
  for (std::size_t j = 0; j < ds.malicious.cols(); ++j) {
    if (norm(out_of_subspace(ds.benign_frame, ds.malicious.column(j))) < 0.5 * separation)
      return false;
  }
  return true;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_benign == 0 || n_malicious == 0 || n_refusal == 0 || n_holdout == 0)
    throw InvalidInputError("synthetic counts must be >= 1");
  if (k_benign < 1 || k_benign >= d)
    throw ConfigError("k_benign must satisfy 1 <= k_benign < d");
  if (!(cluster_separation > 0.0) || !std::isfinite(cluster_separation))
    throw ConfigError("cluster_separation must be > 0");
  if (!(subspace_noise >= 0.0) || !std::isfinite(subspace_noise))
    throw ConfigError("subspace_noise must be >= 0");
  if (layer_tag < 0) throw ConfigError("layer_tag must be >= 0");
}

SynthDataset gen_dataset(const SynthConfig& cfg) {
  cfg.validate();
  double separation = cfg.cluster_separation;
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    SynthDataset ds = draw(cfg, separation, cfg.seed);
    ds.attempts = attempt;
    if (construction_holds(ds, separation)) return ds;
    separation *= 1.5;
  }
  throw ConfigError("could not satisfy the probe construction bounds; raise cluster_separation");
}

double harm_probe_rate(const Matrix& h, const HarmProbe& probe) {
  if (h.cols() == 0) return 0.0;
  if (probe.w.size() != h.rows()) throw ShapeError("harm probe dimension mismatch");
  std::size_t flagged = 0;
  for (std::size_t j = 0; j < h.cols(); ++j) {
    double score = probe.b;
    for (std::size_t i = 0; i < h.rows(); ++i) score += probe.w[i] * h(i, j);
    if (score > 0.0) ++flagged;
  }
  return static_cast<double>(flagged) / static_cast<double>(h.cols());
}

}  // namespace nss
