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

#ifndef NSS_BUNDLE_IO_HPP_
#define NSS_BUNDLE_IO_HPP_

// Binary file formats. Everything is little-endian.
//
// Activation bundle ("NSAB"), 29-byte header then payload:
//   magic[4] version:u32 role:u8 d:u32 n:u32 layer_tag:i32 seed:i64
//   payload: d*n float64, column-major (one sample per column)
//
// Steering artifact ("NSSA"):
//   magic[4] version:u32 d:u32 retained_rank:u32
//   alpha:f64 beta:f64 lambda_default:f64 layer_tag:i32
//   sha256[32] x 4 (benign, malicious, masked, refusal bundles)
//   P: d*d float64 row-major, delta: d*d float64 row-major
//   sha256[32] of all preceding bytes

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nss/matrix.hpp"
#include "nss/sha256.hpp"
#include "nss/steering.hpp"

namespace nss {

inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::uint32_t kArtifactVersion = 1;
inline constexpr std::size_t kBundleHeaderSize = 29;

enum class Role : std::uint8_t {
  kBenign = 0,
  kMalicious = 1,
  kRefusal = 2,
  kMasked = 3,
  kGeneric = 4,
};

const char* to_string(Role role);

struct ActivationBundle {
  Role role = Role::kGeneric;
  std::int32_t layer_tag = 0;
  std::int64_t seed = 0;
  Matrix data;  // d x N

  friend bool operator==(const ActivationBundle&, const ActivationBundle&) = default;
};

std::vector<std::uint8_t> encode_bundle(const ActivationBundle& bundle);
// Throws IoError on bad magic, version, role or length.
ActivationBundle decode_bundle(std::span<const std::uint8_t> bytes);

// Writes bundle and returns the SHA-256 of the bytes written.
Sha256Digest write_bundle(const std::filesystem::path& path, const ActivationBundle& bundle);
ActivationBundle read_bundle(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_artifact(const SteeringArtifact& artifact);
// Throws CorruptArtifactError when the checksum, structure or projector
// invariants (symmetry, idempotence, trace = rank) fail.
SteeringArtifact decode_artifact(std::span<const std::uint8_t> bytes);

Sha256Digest write_artifact(const std::filesystem::path& path, const SteeringArtifact& artifact);
SteeringArtifact read_artifact(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace nss

#endif  // NSS_BUNDLE_IO_HPP_
