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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bpbn {

// Rank-3 extent, row-major with channels innermost.
struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  constexpr std::size_t count() const { return height * width * channels; }
  constexpr std::size_t offset(std::size_t h, std::size_t w, std::size_t c) const {
    return (h * width + w) * channels + c;
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t elements) {
  return (elements + kWordBits - 1) / kWordBits;
}

// Bipolar {-1,+1} tensor, one bit per element. Elements are packed flat in
// raster order (h, w, c), least-significant bit first. A set bit is -1, an
// unset bit is +1. Bits past the last element are always zero.
class PackedBitTensor {
 public:
  PackedBitTensor() = default;
  // All elements +1.
  explicit PackedBitTensor(Dims dims);
  // Takes ownership of `words`; throws FormatError unless canonical.
  PackedBitTensor(Dims dims, std::vector<std::uint64_t> words);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return dims_.count(); }
  std::span<const std::uint64_t> words() const { return words_; }

  // Raw bit at flat index i (true = -1).
  bool bit(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1u; }
  bool bit(std::size_t h, std::size_t w, std::size_t c) const { return bit(dims_.offset(h, w, c)); }
  void set_bit(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i % kWordBits);
    if (v) {
      words_[i / kWordBits] |= m;
    } else {
      words_[i / kWordBits] &= ~m;
    }
  }
  int value(std::size_t i) const { return bit(i) ? -1 : 1; }

  // Same bits viewed under different dims with equal element count.
  PackedBitTensor reshaped(Dims dims) const;

  friend bool operator==(const PackedBitTensor&, const PackedBitTensor&) = default;

 private:
  Dims dims_{};
  std::vector<std::uint64_t> words_;
};

// True when every bit beyond `elements` in `words` is zero.
bool padding_is_zero(std::span<const std::uint64_t> words, std::size_t elements);

// Unsigned 8-bit image or feature tensor.
struct ByteTensor {
  Dims dims{};
  std::vector<std::uint8_t> data;

  ByteTensor() = default;
  explicit ByteTensor(Dims d, std::uint8_t fill = 0) : dims(d), data(d.count(), fill) {}
  ByteTensor(Dims d, std::vector<std::uint8_t> values);

  std::uint8_t at(std::size_t h, std::size_t w, std::size_t c) const { return data[dims.offset(h, w, c)]; }
  friend bool operator==(const ByteTensor&, const ByteTensor&) = default;
};

// Signed 32-bit integer feature maps. `frac_bits` records the fixed-point
// scale of the stored integers (0 = plain integers, 16 = Q16.16).
struct AccumTensor {
  Dims dims{};
  std::vector<std::int32_t> data;
  int frac_bits = 0;

  AccumTensor() = default;
  explicit AccumTensor(Dims d, int frac = 0) : dims(d), data(d.count(), 0), frac_bits(frac) {}
  AccumTensor(Dims d, std::vector<std::int32_t> values, int frac = 0);

  std::int32_t& at(std::size_t h, std::size_t w, std::size_t c) { return data[dims.offset(h, w, c)]; }
  std::int32_t at(std::size_t h, std::size_t w, std::size_t c) const { return data[dims.offset(h, w, c)]; }
  double real(std::size_t i) const;
  friend bool operator==(const AccumTensor&, const AccumTensor&) = default;
};

// ---------------------------------------------------------------------------
// Raw tensor files.
//
// Header (17 bytes): "BPT1", u8 dtype, u32 height, u32 width, u32 channels,
// all little-endian. Payload: packed words as u64 LE, or raw bytes, or i32 LE.

enum class DType : std::uint8_t { kPackedBit = 0, kU8 = 1, kI32 = 2 };

using AnyTensor = std::variant<PackedBitTensor, ByteTensor, AccumTensor>;

inline constexpr std::size_t kTensorHeaderBytes = 17;

DType dtype_of(const AnyTensor& t);
Dims dims_of(const AnyTensor& t);

std::vector<std::uint8_t> serialize_tensor(const AnyTensor& t);
// Throws FormatError on bad magic, unknown dtype, size mismatch or
// non-canonical packing.
AnyTensor deserialize_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, const AnyTensor& t);
AnyTensor read_tensor_file(const std::filesystem::path& path);

}  // namespace bpbn
