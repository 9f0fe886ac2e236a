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

#include <variant>
#include <vector>

#include "bpbn/binops.hpp"
#include "bpbn/encoders.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn {

enum class AffineMode { kFixed, kFloat };
enum class FuseOutput { kAccum, kSignBits };

struct BpieConfig {
  int planes = 8;
  std::size_t multiplier = 1;
  Padding padding = Padding::kSame;
  AffineMode affine_mode = AffineMode::kFixed;
  FuseOutput fuse_output = FuseOutput::kAccum;

  void validate() const;
};

// Weights of the bit-plane input block for C channels and P planes.
// kernels[c * P + i] is an (F, F, 1, N) depthwise kernel; the affine
// vectors are indexed ((c * P + i) * N + n), one entry per feature map.
struct BpieWeights {
  std::vector<BinaryKernel> kernels;
  std::vector<FloatAffine> float_affine;
  std::vector<FixedAffine> fixed_affine;

  // Folds every FloatAffine into its FixedAffine.
  static BpieWeights make(std::vector<BinaryKernel> kernels, std::vector<FloatAffine> affine);

  // Throws ShapeError unless complete for `channels` x `cfg.planes`.
  void validate(std::size_t channels, const BpieConfig& cfg) const;
};

using BpieOutput = std::variant<AccumTensor, PackedBitTensor>;

// One Q16.16 tensor of N maps per (channel, plane), in stack order.
std::vector<AccumTensor> feature_extract(const BitPlaneStack& stack, const BpieWeights& w,
                                         const BpieConfig& cfg);

// Multiplies every element by 2^bit_position with a left shift.
// Throws ValueError unless |v| < 2^24 and bit_position is in [0, 7].
AccumTensor reweight(const AccumTensor& fe, int bit_position);

// Sums the re-weighted maps of each channel's planes; output channel c * N + n.
// Sums are formed in 64 bits; OverflowError if a result leaves int32.
BpieOutput fuse(const std::vector<AccumTensor>& reweighted, std::size_t channels, const BpieConfig& cfg);

BpieOutput bpie_forward(const ByteTensor& img, const BpieWeights& w, const BpieConfig& cfg);

}  // namespace bpbn
