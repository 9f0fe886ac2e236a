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
#include <span>
#include <vector>

#include "bpbn/layer_params.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn {

// F x F x in_channels x out_maps bipolar kernel, one packed (F, F, in)
// tensor per output map, plus an integer bias per map.
struct BinaryKernel {
  std::size_t size = 1;
  std::size_t in_channels = 1;
  std::size_t out_maps = 1;
  std::vector<PackedBitTensor> weights;
  std::vector<std::int32_t> bias;

  // `values` laid out (map, ky, kx, channel). Empty bias means all zero.
  static BinaryKernel from_bipolar(std::size_t size, std::size_t in_channels, std::size_t out_maps,
                                   std::span<const std::int8_t> values,
                                   std::vector<std::int32_t> bias = {});
  // Splits a packed (out_maps, size*size, in_channels) blob into per-map tensors.
  static BinaryKernel from_packed(std::size_t size, const PackedBitTensor& blob,
                                  std::vector<std::int32_t> bias = {});
  PackedBitTensor to_packed() const;

  // Throws ShapeError/ValueError on even size or inconsistent parts.
  void validate() const;
};

// Signed 8-bit weights laid out (map, ky, kx, channel).
struct Int8Kernel {
  std::size_t size = 1;
  std::size_t in_channels = 1;
  std::size_t out_maps = 1;
  std::vector<std::int8_t> weights;
  std::vector<std::int32_t> bias;

  void validate() const;
};

inline constexpr int kQ16 = 16;
inline constexpr std::int64_t kQ16One = std::int64_t{1} << kQ16;

// Folded batch norm y = scale * x + bias with both terms in Q16.16.
struct FixedAffine {
  std::int32_t scale_q16 = static_cast<std::int32_t>(kQ16One);
  std::int32_t bias_q16 = 0;

  // scale = gamma / sigma, bias = beta - gamma * mu / sigma, rounded to
  // nearest. Throws ValueError if sigma <= 0 or either term is outside
  // (-2^15, 2^15).
  static FixedAffine from_float(const FloatAffine& p);
  static FixedAffine from_real(double scale, double bias);
  friend bool operator==(const FixedAffine&, const FixedAffine&) = default;
};

inline constexpr std::int64_t kAffineInputLimit = std::int64_t{1} << 14;

// Q16.16 value of p applied to the integer x. Throws ValueError when
// |x| > 2^14 and OverflowError if the result leaves int32.
std::int32_t affine_fixed(std::int32_t x, const FixedAffine& p);
// Applies params[c] to channel c of an integer tensor; result is Q16.16.
AccumTensor affine_fixed(const AccumTensor& x, std::span<const FixedAffine> params);

// sign(bn(x)) for integer x reduced to one comparison:
// polarity * (x >= threshold ? +1 : -1).
struct BnThreshold {
  std::int64_t threshold = 0;
  int polarity = 1;

  int apply(std::int64_t x) const {
    const int s = x >= threshold ? 1 : -1;
    return polarity * s;
  }
};

// Exact for every integer x whose float BN value is evaluated as
// FloatAffine::apply, with sign(0) = +1. Throws ValueError if gamma == 0
// or sigma <= 0.
BnThreshold fold_bn_to_threshold(const FloatAffine& p);

// x >= 0 -> +1 (bit clear), x < 0 -> -1 (bit set).
PackedBitTensor sign_to_bits(const AccumTensor& x);

// 2x2 stride-2 max pooling; H and W must be even.
AccumTensor maxpool2(const AccumTensor& x);
PackedBitTensor maxpool2(const PackedBitTensor& x);

// XNOR-popcount convolution, stride 1. Same padding fills with +1.
// Depthwise: kernel.in_channels == 1 and out map m reads input channel
// m / (out_maps / channels).
AccumTensor binary_conv2d(const PackedBitTensor& input, const BinaryKernel& kernel, Padding padding,
                          bool depthwise = false);

// Fully connected over the flattened input; output dims (1, 1, out_maps).
AccumTensor binary_dense(const PackedBitTensor& x, const BinaryKernel& kernel);

// Plain integer convolution with zero padding for the 8-bit baseline layer.
AccumTensor int8_conv2d(const ByteTensor& img, const Int8Kernel& kernel, Padding padding = Padding::kSame);

namespace testing {
// Negative control for the self-test: when enabled, sign_to_bits maps 0 to -1.
void set_sign_tie_fault(bool enabled);
bool sign_tie_fault();
}  // namespace testing

}  // namespace bpbn
