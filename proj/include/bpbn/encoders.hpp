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

#include <span>
#include <vector>

#include "bpbn/binops.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn {

inline constexpr int kPixelBits = 8;

enum class PlaneSelect { kMostSignificant, kLeastSignificant };

// Bit planes of an 8-bit image. planes[c * plane_count() + i] holds bit
// bit_positions[i] of channel c as an (H, W, 1) tensor; a set pixel bit
// is stored as a set bit (-1).
struct BitPlaneStack {
  Dims source_dims{};
  std::vector<int> bit_positions;
  std::vector<PackedBitTensor> planes;

  std::size_t plane_count() const { return bit_positions.size(); }
  const PackedBitTensor& plane(std::size_t channel, std::size_t index) const {
    return planes[channel * plane_count() + index];
  }
};

BitPlaneStack bit_rearrange(const ByteTensor& img, int plane_count,
                            PlaneSelect select = PlaneSelect::kMostSignificant);

// Direct unpacking: (H, W, C*P) with channel index c * P + i, where i walks
// the kept bit positions from low to high.
PackedBitTensor encode_dbid(const ByteTensor& img, int plane_count);

// Threshold of thermometer channel j: ceil((j + 1) * 256 / (K + 1)).
int thermometer_threshold(int j, int expansion);

// (H, W, C*K); channel c * K + j is set iff pixel >= thermometer_threshold(j, K).
PackedBitTensor encode_thermometer(const ByteTensor& img, int expansion);

// DBID, then a binary 1x1 convolution to K maps, per-map fixed affine and
// sign. `pointwise` must be 1 x 1 x (C*P) x K with bn.size() == K.
PackedBitTensor encode_bil(const ByteTensor& img, int plane_count, const BinaryKernel& pointwise,
                           std::span<const FixedAffine> bn);

}  // namespace bpbn
