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

#ifndef NSS_SHA256_HPP_
#define NSS_SHA256_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace nss {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> bytes);
// Throws IoError when the file cannot be read.
Sha256Digest sha256_file(const std::filesystem::path& path);
std::string to_hex(const Sha256Digest& digest);

}  // namespace nss

#endif  // NSS_SHA256_HPP_
