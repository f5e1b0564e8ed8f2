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

#ifndef NSS_SYNTHDATA_HPP_
#define NSS_SYNTHDATA_HPP_

#include <cstddef>
#include <cstdint>

#include "nss/matrix.hpp"

namespace nss {

// Seeded stand-in for hidden states captured at one decoder layer.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t d = 64;
  std::size_t k_benign = 16;
  std::size_t n_benign = 200;
  std::size_t n_malicious = 96;
  std::size_t n_refusal = 64;
  // Centroid distance in units of the within-cluster standard deviation.
  double cluster_separation = 8.0;
  // Out-of-subspace benign noise, relative to each column's norm.
  double subspace_noise = 1e-8;
  // Size of each held-out split.
  std::size_t n_holdout = 100;
  int layer_tag = 20;

  // Throws ConfigError for k_benign outside [1, d), separation <= 0 or
  // negative noise, and InvalidInputError for zero counts.
  void validate() const;
};

// Linear readout; a column h is flagged harmful when w.h + b > 0.
struct HarmProbe {
  Vector w;
  double b = 0.0;
};

struct SynthDataset {
  Matrix benign;            // H_b
  Matrix malicious;         // H_m
  Matrix malicious_masked;  // H_m with salient content masked
  Matrix refusal;           // R, one displacement target per malicious column
  Matrix refusal_states;    // D_r
  Matrix compliance_states; // D_c
  Matrix benign_holdout;
  Matrix malicious_holdout;
  Matrix malicious_holdout_masked;
  Matrix refusal_holdout;
  HarmProbe probe;

  // Generation metadata.
  Matrix benign_frame;  // d x k_benign orthonormal
  Vector benign_centroid;
  Vector malicious_centroid;
  Vector refusal_centroid;       // centroid of D_r
  Vector refusal_displacement;   // shared part of every R column
  double effective_separation = 0.0;
  int attempts = 0;
};

// Deterministic in the seed. If the probe misses its construction bounds
// (>= 95% of H_m flagged, <= 5% of H_b flagged) or a malicious column sits
// closer than half the separation to the benign subspace, the draw is
// repeated with the separation scaled by 1.5.
SynthDataset gen_dataset(const SynthConfig& cfg);

// Fraction of columns with w.h + b > 0; zero for an empty matrix.
double harm_probe_rate(const Matrix& h, const HarmProbe& probe);

}  // namespace nss

#endif  // NSS_SYNTHDATA_HPP_
