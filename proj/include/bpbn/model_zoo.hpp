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
#include <random>

#include "bpbn/model.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn::zoo {

// Bit-plane input (P = 8, N = 1, 1x1 kernel of -1, identity affine) feeding
// a single-unit head with +1 weights. For a 1x1x1 image the logit is
// 2 * pixel - 255.
ModelManifest stub_bpie_model(Dims input = {1, 1, 1});

// First-layer-only models at the given size, for MAC accounting.
ModelManifest baseline_first_layer_model(Dims input, std::size_t kernel, std::size_t filters, std::uint64_t seed);
ModelManifest bitplane_first_layer_model(Dims input, int planes, std::size_t multiplier, std::size_t kernel,
                                         std::uint64_t seed);

enum class InputChoice { kAny, kBpie, kDbid, kThermometer, kBil, kInt8 };

struct RandomModelOptions {
  Dims input{8, 8, 3};
  InputChoice encoder = InputChoice::kAny;
  std::size_t classes = 10;
};

// Small VGG-style network: input encoder, optional F1 binary conv, pooling,
// a second binary conv, a binary dense layer and a softmax head, all with
// random weights and batch-norm tables.
ModelManifest random_model(std::uint64_t seed, const RandomModelOptions& options = {});

ByteTensor random_image(Dims dims, std::mt19937_64& rng);

}  // namespace bpbn::zoo
