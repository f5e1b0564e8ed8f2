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

#include "nss/bundle_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "nss/error.hpp"
#include "nss/linalg.hpp"

namespace nss {
namespace {

constexpr char kBundleMagic[4] = {'N', 'S', 'A', 'B'};
constexpr char kArtifactMagic[4] = {'N', 'S', 'S', 'A'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  const std::vector<std::uint8_t>& view() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

// Reader that raises E on truncated input.
template <typename E>
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw E("unexpected end of data");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

template <typename E>
std::vector<double> read_doubles(Reader<E>& r, std::size_t count) {
  std::vector<double> out(count);
  for (double& v : out) {
    v = r.f64();
    if (!std::isfinite(v)) throw E("payload contains non-finite values");
  }
  return out;
}

}  // namespace

const char* to_string(Role role) {
  switch (role) {
    case Role::kBenign: return "benign";
    case Role::kMalicious: return "malicious";
    case Role::kRefusal: return "refusal";
    case Role::kMasked: return "masked";
    case Role::kGeneric: return "generic";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_bundle(const ActivationBundle& bundle) {
  Writer w;
  w.bytes(kBundleMagic, 4);
  w.u32(kBundleVersion);
  w.u8(static_cast<std::uint8_t>(bundle.role));
  w.u32(static_cast<std::uint32_t>(bundle.data.rows()));
  w.u32(static_cast<std::uint32_t>(bundle.data.cols()));
  w.i32(bundle.layer_tag);
  w.i64(bundle.seed);
  for (double v : bundle.data.to_column_major()) w.f64(v);
  return w.take();
}

ActivationBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  Reader<IoError> r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kBundleMagic, 4) != 0) throw IoError("not an activation bundle (bad magic)");
  if (const auto version = r.u32(); version != kBundleVersion)
    throw IoError("unsupported bundle version " + std::to_string(version));
  const std::uint8_t role = r.u8();
  if (role > static_cast<std::uint8_t>(Role::kGeneric))
    throw IoError("invalid bundle role byte " + std::to_string(role));
  const std::uint32_t d = r.u32();
  const std::uint32_t n = r.u32();
  ActivationBundle out;
  out.role = static_cast<Role>(role);
  out.layer_tag = r.i32();
  out.seed = r.i64();
  const std::uint64_t expected = 8ull * d * n;
  if (r.remaining() != expected)
    throw IoError("bundle payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                  std::to_string(expected));
  out.data = Matrix::from_column_major(d, n, read_doubles(r, std::size_t{d} * n));
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Sha256Digest write_bundle(const std::filesystem::path& path, const ActivationBundle& bundle) {
  const auto bytes = encode_bundle(bundle);
  write_file(path, bytes);
  return sha256(bytes);
}

ActivationBundle read_bundle(const std::filesystem::path& path) {
  try {
    return decode_bundle(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_artifact(const SteeringArtifact& artifact) {
  const std::size_t d = artifact.dim();
  if (artifact.projector.p.rows() != d || artifact.projector.p.cols() != d ||
      artifact.delta.cols() != d) {
    throw ShapeError("encode_artifact: inconsistent artifact dimensions");
  }
  Writer w;
  w.bytes(kArtifactMagic, 4);
  w.u32(kArtifactVersion);
  w.u32(static_cast<std::uint32_t>(d));
  w.u32(static_cast<std::uint32_t>(artifact.projector.retained_rank));
  w.f64(artifact.alpha);
  w.f64(artifact.beta);
  w.f64(artifact.lambda_default);
  w.i32(artifact.layer_tag);
  const Sha256Digest unused{};
  const Sha256Digest& refusal_digest =
      artifact.refusal_target ? artifact.provenance.refusal : unused;
  for (const auto* digest : {&artifact.provenance.benign, &artifact.provenance.malicious,
                             &artifact.provenance.masked, &refusal_digest}) {
    w.bytes(digest->data(), digest->size());
  }
  for (double v : artifact.projector.p.data()) w.f64(v);
  for (double v : artifact.delta.data()) w.f64(v);
  const Sha256Digest check = sha256(w.view());
  w.bytes(check.data(), check.size());
  return w.take();
}

SteeringArtifact decode_artifact(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 32) throw CorruptArtifactError("artifact is truncated");
  const auto body = bytes.first(bytes.size() - 32);
  Sha256Digest stored{};
  std::memcpy(stored.data(), bytes.data() + body.size(), 32);
  if (sha256(body) != stored) throw CorruptArtifactError("artifact checksum mismatch");

  Reader<CorruptArtifactError> r(body);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kArtifactMagic, 4) != 0)
    throw CorruptArtifactError("not a steering artifact (bad magic)");
  if (const auto version = r.u32(); version != kArtifactVersion)
    throw CorruptArtifactError("unsupported artifact version " + std::to_string(version));

  SteeringArtifact out;
  const std::uint32_t d = r.u32();
  const std::uint32_t rank = r.u32();
  if (rank > d) throw CorruptArtifactError("retained rank exceeds dimension");
  out.alpha = r.f64();
  out.beta = r.f64();
  out.lambda_default = r.f64();
  out.layer_tag = r.i32();
  if (!(out.alpha > 0.0) || !(out.beta >= 0.0) || !std::isfinite(out.lambda_default))
    throw CorruptArtifactError("artifact hyperparameters out of range");
  for (auto* digest : {&out.provenance.benign, &out.provenance.malicious, &out.provenance.masked,
                       &out.provenance.refusal}) {
    r.bytes(digest->data(), digest->size());
  }
  const Sha256Digest zero{};
  out.refusal_target = !(out.provenance.refusal == zero && out.provenance.malicious != zero);
  const std::size_t dd = std::size_t{d} * d;
  if (r.remaining() != 16 * dd) throw CorruptArtifactError("artifact payload has wrong length");
  out.projector.p = Matrix(d, d, read_doubles(r, dd));
  out.delta = Matrix(d, d, read_doubles(r, dd));
  out.projector.retained_rank = rank;
  out.projector.policy = RankPolicy::fixed(rank);

  const Matrix& p = out.projector.p;
  const double n = static_cast<double>(d);
  if (frobenius_norm(subtract(p, transpose(p))) > 1e-10 * n)
    throw CorruptArtifactError("projector is not symmetric");
  if (frobenius_norm(subtract(matmul(p, p), p)) > 1e-8 * n)
    throw CorruptArtifactError("projector is not idempotent");
  if (std::abs(trace(p) - static_cast<double>(rank)) > 1e-6)
    throw CorruptArtifactError("projector trace does not match retained rank");
  return out;
}

Sha256Digest write_artifact(const std::filesystem::path& path, const SteeringArtifact& artifact) {
  const auto bytes = encode_artifact(artifact);
  write_file(path, bytes);
  return sha256(bytes);
}

SteeringArtifact read_artifact(const std::filesystem::path& path) {
  try {
    return decode_artifact(read_file(path));
  } catch (const CorruptArtifactError& e) {
    throw CorruptArtifactError(path.string() + ": " + e.what());
  }
}

}  // namespace nss
