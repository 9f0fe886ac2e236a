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

#include "bpbn/tensor.hpp"

namespace bpbn {

// Packs a tensor of -1/+1 values. Throws ValueError naming the first
// element that is neither.
PackedBitTensor pack_bipolar(Dims dims, std::span<const std::int8_t> values);

// Inverse of pack_bipolar. Throws FormatError if padding bits are set.
std::vector<std::int8_t> unpack_bipolar(const PackedBitTensor& t);

// Bipolar dot product of two packed vectors of n elements:
// n - 2 * popcount(a xor b). Both spans must hold exactly words_for(n)
// words with zero padding; otherwise ShapeError.
std::int64_t popcount_xor_dot(std::span<const std::uint64_t> a,
                              std::span<const std::uint64_t> b, std::size_t n);

// Copies `count` bits starting at bit `src_offset` of `src` into a fresh
// zero-padded word vector.
std::vector<std::uint64_t> extract_bits(std::span<const std::uint64_t> src,
                                        std::size_t src_offset, std::size_t count);

}  // namespace bpbn
