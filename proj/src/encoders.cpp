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

#include "bpbn/encoders.hpp"

#include "bpbn/error.hpp"

namespace bpbn {

namespace {

void check_planes(const ByteTensor& img, int plane_count) {
  if (plane_count < 1 || plane_count > kPixelBits) {
    throw ValueError("plane count must be in [1, 8], got " + std::to_string(plane_count));
  }
  if (img.dims.count() == 0) throw ShapeError("empty image");
  if (img.data.size() != img.dims.count()) throw ShapeError("image data does not match dims");
}

std::vector<int> kept_bits(int plane_count, PlaneSelect select) {
  std::vector<int> bits;
  const int first = select == PlaneSelect::kMostSignificant ? kPixelBits - plane_count : 0;
  for (int i = 0; i < plane_count; ++i) bits.push_back(first + i);
  return bits;
}

}  // namespace

BitPlaneStack bit_rearrange(const ByteTensor& img, int plane_count, PlaneSelect select) {
  check_planes(img, plane_count);
  const Dims& d = img.dims;
  BitPlaneStack stack{d, kept_bits(plane_count, select), {}};
  stack.planes.reserve(d.channels * stack.bit_positions.size());
  for (std::size_t c = 0; c < d.channels; ++c) {
    for (int bp : stack.bit_positions) {
      PackedBitTensor plane(Dims{d.height, d.width, 1});
      for (std::size_t p = 0; p < d.height * d.width; ++p) {
        if ((img.data[p * d.channels + c] >> bp) & 1u) plane.set_bit(p, true);
      }
      stack.planes.push_back(std::move(plane));
    }
  }
  return stack;
}

PackedBitTensor encode_dbid(const ByteTensor& img, int plane_count) {
  check_planes(img, plane_count);
  const auto bits = kept_bits(plane_count, PlaneSelect::kMostSignificant);
  const Dims& d = img.dims;
  const std::size_t p_count = bits.size();
  PackedBitTensor out(Dims{d.height, d.width, d.channels * p_count});
  for (std::size_t p = 0; p < d.height * d.width; ++p) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      const std::uint8_t v = img.data[p * d.channels + c];
      for (std::size_t i = 0; i < p_count; ++i) {
        if ((v >> bits[i]) & 1u) out.set_bit((p * d.channels + c) * p_count + i, true);
      }
    }
  }
  return out;
}

int thermometer_threshold(int j, int expansion) {
  const int num = (j + 1) * 256;
  return (num + expansion) / (expansion + 1);  // ceil(num / (K + 1))
}

PackedBitTensor encode_thermometer(const ByteTensor& img, int expansion) {
  if (expansion < 1) throw ValueError("thermometer expansion must be >= 1");
  if (img.data.size() != img.dims.count()) throw ShapeError("image data does not match dims");
  const auto k = static_cast<std::size_t>(expansion);
  std::vector<int> thresholds(k);
  for (std::size_t j = 0; j < k; ++j) thresholds[j] = thermometer_threshold(static_cast<int>(j), expansion);
  const Dims& d = img.dims;
  PackedBitTensor out(Dims{d.height, d.width, d.channels * k});
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (img.data[i] >= thresholds[j]) out.set_bit(i * k + j, true);
    }
  }
  return out;
}

PackedBitTensor encode_bil(const ByteTensor& img, int plane_count, const BinaryKernel& pointwise,
                           std::span<const FixedAffine> bn) {
  const PackedBitTensor unpacked = encode_dbid(img, plane_count);
  if (pointwise.size != 1 || pointwise.in_channels != unpacked.dims().channels) {
    throw ShapeError("BIL pointwise kernel must be 1x1x" + std::to_string(unpacked.dims().channels));
  }
  if (bn.size() != pointwise.out_maps) {
    throw ShapeError("BIL needs one affine per output map");
  }
  const AccumTensor conv = binary_conv2d(unpacked, pointwise, Padding::kSame);
  return sign_to_bits(affine_fixed(conv, bn));
}

}  // namespace bpbn
