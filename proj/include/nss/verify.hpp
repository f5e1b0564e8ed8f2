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

#ifndef NSS_VERIFY_HPP_
#define NSS_VERIFY_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nss {

// Worst observed value of one checked quantity across all instances. For
// upper-bound checks `worst` is the largest residual; `pass` compares it to
// `tolerance`.
struct InvariantResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  std::size_t checks = 0;
  std::size_t failures = 0;

  bool pass() const noexcept { return failures == 0; }
};

struct VerifyReport {
  std::vector<InvariantResult> results;
  std::size_t instances = 0;

  bool all_pass() const noexcept;
};

// Runs the numerics, projector, solver, oracle and file-format invariants over
// `seed_count` random instances. Residuals are normalised so that every
// tolerance reads as a plain upper bound.
VerifyReport run_invariant_suite(std::size_t seed_count, std::uint64_t base_seed = 0);

std::string render_verify_report(const VerifyReport& report);

}  // namespace nss

#endif  // NSS_VERIFY_HPP_
