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
#include <string_view>
#include <vector>

namespace bpbn::cost {

enum class Method { kBaseline, kDbid, kBil, kThermometer, kBitPlane };

std::string_view to_string(Method m);

// First-layer dimensions. Defaults are the 32x32x3 / F1 = 128 setting:
// 3x3 kernels, 8-bit input, K = 32 expansion channels.
struct FirstLayerCostInputs {
  std::uint64_t height = 32;
  std::uint64_t width = 32;
  std::uint64_t channels = 3;
  std::uint64_t kernel = 3;
  std::uint64_t filters = 128;  // F1
  std::uint64_t bits = 8;       // M
  std::uint64_t expansion = 32; // K
  std::uint64_t planes = 8;     // P
  std::uint64_t multiplier = 0; // N; 0 = floor(F1 / C)
  std::uint64_t reduced_planes = 4;
  std::uint64_t reduced_multiplier = 32;
  double binary_speedup = 9.0;

  std::uint64_t effective_multiplier() const;
  // Throws ValueError if any dimension is zero or the speedup is not positive.
  void validate() const;
};

struct Count {
  std::uint64_t macs = 0;
  std::uint64_t weights = 0;
};

// Row formulas. For kBitPlane the plane count and multiplier are
// inputs.planes and inputs.effective_multiplier().
Count macs_for(Method method, const FirstLayerCostInputs& inputs);

struct CostRow {
  std::string name;
  Method method = Method::kBaseline;
  bool binary = false;
  std::uint64_t macs = 0;
  std::uint64_t weights = 0;
  double ratio = 1.0;
  double speedup = 1.0;
  std::string note;
};

struct CostReport {
  FirstLayerCostInputs inputs;
  std::vector<CostRow> rows;
};

// Seven rows: baseline, DBID, BIL, thermometer, bit-plane (P, N),
// bit-plane (P_reduced, N), bit-plane (P_reduced, N_reduced).
CostReport report(const FirstLayerCostInputs& inputs);

std::string render_text(const CostReport& r);
// One JSON object per line: name, macs, weights, ratio, speedup.
std::string render_machine(const CostReport& r);
std::vector<CostRow> parse_machine(std::string_view text);

}  // namespace bpbn::cost
