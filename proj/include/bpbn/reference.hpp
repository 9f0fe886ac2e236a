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
#include "bpbn/tensor.hpp"

namespace bpbn {

// One layer as seen by the float interpreter. `values` are the real
// numbers handed to the next layer (bits as -1/+1). `macs` counts every
// multiply-accumulate the layer evaluated, padded taps included.
struct ReferenceLayerTrace {
  std::string name;
  LayerKind kind = LayerKind::kSign;
  Dims dims{};
  std::vector<double> values;
  std::uint64_t macs = 0;
};

struct ReferenceResult {
  std::vector<double> logits;
  std::vector<ReferenceLayerTrace> trace;
};

// Straightforward double-precision evaluation of the whole model: +-1
// arithmetic on unpacked values, float batch norm, no fixed point and no
// packed kernels. Throws ShapeError if img does not match the model input.
ReferenceResult reference_forward(const ModelManifest& m, const ByteTensor& img);

}  // namespace bpbn
