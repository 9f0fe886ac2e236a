// Copyright 2026 The bpbn Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bpbn::cli {

// Exit codes of `bpbn infer`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitModelLoad = 2;
inline constexpr int kExitShape = 3;
inline constexpr int kExitRuntime = 4;

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Round-trip, reconstruction, kernel-equivalence, threshold-fold, sign,
// shift and cost regression checks. Deterministic for a given seed.
std::vector<SuiteResult> run_selftest(std::uint64_t seed);

}  // namespace bpbn::cli
