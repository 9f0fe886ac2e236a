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

#include "bpbn/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bpbn/error.hpp"

namespace bpbn {

std::string to_string(const Dims& d) {
  return "(" + std::to_string(d.height) + "," + std::to_string(d.width) + "," +
         std::to_string(d.channels) + ")";
}

bool padding_is_zero(std::span<const std::uint64_t> words, std::size_t elements) {
  const std::size_t used = words_for(elements);
  for (std::size_t i = used; i < words.size(); ++i) {
    if (words[i] != 0) return false;
  }
  const std::size_t tail = elements % kWordBits;
  if (tail == 0 || used == 0 || used > words.size()) return true;
  return (words[used - 1] >> tail) == 0;
}

PackedBitTensor::PackedBitTensor(Dims dims) : dims_(dims), words_(words_for(dims.count()), 0) {}

PackedBitTensor::PackedBitTensor(Dims dims, std::vector<std::uint64_t> words)
    : dims_(dims), words_(std::move(words)) {
  if (words_.size() != words_for(dims_.count())) {
    throw FormatError("packed tensor " + to_string(dims_) + " needs " +
                      std::to_string(words_for(dims_.count())) + " words, got " +
                      std::to_string(words_.size()));
  }
  if (!padding_is_zero(words_, dims_.count())) {
    throw FormatError("packed tensor " + to_string(dims_) + " has nonzero padding bits");
  }
}

PackedBitTensor PackedBitTensor::reshaped(Dims dims) const {
  if (dims.count() != dims_.count()) {
    throw ShapeError("cannot reshape " + to_string(dims_) + " to " + to_string(dims));
  }
  PackedBitTensor out = *this;
  out.dims_ = dims;
  return out;
}

ByteTensor::ByteTensor(Dims d, std::vector<std::uint8_t> values) : dims(d), data(std::move(values)) {
  if (data.size() != dims.count()) {
    throw ShapeError("byte tensor " + to_string(dims) + " given " + std::to_string(data.size()) +
                     " values");
  }
}

AccumTensor::AccumTensor(Dims d, std::vector<std::int32_t> values, int frac)
    : dims(d), data(std::move(values)), frac_bits(frac) {
  if (data.size() != dims.count()) {
    throw ShapeError("accum tensor " + to_string(dims) + " given " + std::to_string(data.size()) +
                     " values");
  }
}

double AccumTensor::real(std::size_t i) const {
  return static_cast<double>(data[i]) / static_cast<double>(std::int64_t{1} << frac_bits);
}

DType dtype_of(const AnyTensor& t) {
  return static_cast<DType>(t.index());
}

Dims dims_of(const AnyTensor& t) {
  return std::visit(
      [](const auto& x) -> Dims {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, PackedBitTensor>) {
          return x.dims();
        } else {
          return x.dims;
        }
      },
      t);
}

namespace {

constexpr char kMagic[4] = {'B', 'P', 'T', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t pos) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<U>(static_cast<U>(in[pos + i]) << (8 * i));
  }
  return static_cast<T>(u);
}

}  // namespace

std::vector<std::uint8_t> serialize_tensor(const AnyTensor& t) {
  const Dims d = dims_of(t);
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(static_cast<std::uint8_t>(dtype_of(t)));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.channels));
  if (const auto* p = std::get_if<PackedBitTensor>(&t)) {
    for (std::uint64_t w : p->words()) put_le<std::uint64_t>(out, w);
  } else if (const auto* b = std::get_if<ByteTensor>(&t)) {
    out.insert(out.end(), b->data.begin(), b->data.end());
  } else {
    for (std::int32_t v : std::get<AccumTensor>(t).data) put_le<std::int32_t>(out, v);
  }
  return out;
}

AnyTensor deserialize_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTensorHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a BPT1 tensor");
  }
  const std::uint8_t tag = bytes[4];
  const Dims d{get_le<std::uint32_t>(bytes, 5), get_le<std::uint32_t>(bytes, 9),
               get_le<std::uint32_t>(bytes, 13)};
  const auto payload = bytes.subspan(kTensorHeaderBytes);
  auto expect = [&](std::size_t n) {
    if (payload.size() != n) {
      throw FormatError("tensor " + to_string(d) + " payload is " + std::to_string(payload.size()) +
                        " bytes, expected " + std::to_string(n));
    }
  };
  switch (static_cast<DType>(tag)) {
    case DType::kPackedBit: {
      const std::size_t nw = words_for(d.count());
      expect(nw * 8);
      std::vector<std::uint64_t> words(nw);
      for (std::size_t i = 0; i < nw; ++i) words[i] = get_le<std::uint64_t>(payload, 8 * i);
      return PackedBitTensor(d, std::move(words));
    }
    case DType::kU8:
      expect(d.count());
      return ByteTensor(d, std::vector<std::uint8_t>(payload.begin(), payload.end()));
    case DType::kI32: {
      expect(d.count() * 4);
      std::vector<std::int32_t> v(d.count());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = get_le<std::int32_t>(payload, 4 * i);
      return AccumTensor(d, std::move(v));
    }
  }
  throw FormatError("unknown tensor dtype tag " + std::to_string(tag));
}

void write_tensor_file(const std::filesystem::path& path, const AnyTensor& t) {
  const auto bytes = serialize_tensor(t);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed: " + path.string());
}

AnyTensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_tensor(bytes);
}

}  // namespace bpbn
