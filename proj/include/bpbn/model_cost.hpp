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
#include <string>
#include <vector>

#include "bpbn/model.hpp"

namespace bpbn {

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::kSign;
  bool f1 = false;
  std::uint64_t macs = 0;  // padded taps included
};

// Analytical multiply-accumulate count of every layer the model executes.
std::vector<LayerCost> layer_costs(const ModelManifest& m);

// MACs of the input stage: the encoder plus F1 when the model runs it.
std::uint64_t input_stage_macs(const ModelManifest& m);

}  // namespace bpbn
