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

#include "bpbn/bitops.hpp"

#include <bit>

#include "bpbn/error.hpp"

namespace bpbn {

PackedBitTensor pack_bipolar(Dims dims, std::span<const std::int8_t> values) {
  if (values.size() != dims.count()) {
    throw ShapeError("pack_bipolar: " + std::to_string(values.size()) + " values for dims " +
                     to_string(dims));
  }
  std::vector<std::uint64_t> words(words_for(values.size()), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::int8_t v = values[i];
    if (v == -1) {
      words[i / kWordBits] |= std::uint64_t{1} << (i % kWordBits);
    } else if (v != 1) {
      throw ValueError("pack_bipolar: element " + std::to_string(i) + " is " + std::to_string(v) +
                       ", expected -1 or +1");
    }
  }
  return PackedBitTensor(dims, std::move(words));
}

std::vector<std::int8_t> unpack_bipolar(const PackedBitTensor& t) {
  if (!padding_is_zero(t.words(), t.size())) {
    throw FormatError("unpack_bipolar: non-canonical padding");
  }
  std::vector<std::int8_t> out(t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t.bit(i) ? -1 : 1;
  return out;
}

std::int64_t popcount_xor_dot(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                              std::size_t n) {
  const std::size_t nw = words_for(n);
  if (a.size() != nw || b.size() != nw) {
    throw ShapeError("popcount_xor_dot: operands hold " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " words, " + std::to_string(n) + " elements need " +
                     std::to_string(nw));
  }
  if (!padding_is_zero(a, n) || !padding_is_zero(b, n)) {
    throw ShapeError("popcount_xor_dot: operand padding is not zero");
  }
  std::int64_t diff = 0;
  for (std::size_t i = 0; i < nw; ++i) diff += std::popcount(a[i] ^ b[i]);
  return static_cast<std::int64_t>(n) - 2 * diff;
}

std::vector<std::uint64_t> extract_bits(std::span<const std::uint64_t> src, std::size_t src_offset,
                                        std::size_t count) {
  std::vector<std::uint64_t> out(words_for(count), 0);
  const std::size_t shift = src_offset % kWordBits;
  const std::size_t first = src_offset / kWordBits;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t lo = first + i < src.size() ? src[first + i] : 0;
    std::uint64_t w = lo >> shift;
    if (shift != 0 && first + i + 1 < src.size()) w |= src[first + i + 1] << (kWordBits - shift);
    out[i] = w;
  }
  if (const std::size_t tail = count % kWordBits; tail != 0) {
    out.back() &= (std::uint64_t{1} << tail) - 1;
  }
  return out;
}

}  // namespace bpbn
