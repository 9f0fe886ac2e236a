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

#include "doctest.h"

#include <cmath>

#include "bpbn/binops.hpp"
#include "bpbn/encoders.hpp"
#include "bpbn/error.hpp"
#include "oracles.hpp"

using namespace bpbn;

namespace {

ByteTensor constant(Dims d, std::uint8_t v) { return ByteTensor(d, v); }

ByteTensor random_image(oracle::Rng& rng, Dims d) {
  ByteTensor img(d);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng());
  return img;
}

// ceil((j+1) * 256 / (K+1)) evaluated in floating point.
int threshold_oracle(int j, int k) { return static_cast<int>(std::ceil((j + 1) * 256.0 / (k + 1))); }

}  // namespace

TEST_CASE("bit_rearrange: 146 sets planes 1, 4 and 7") {
  const auto s = bit_rearrange(constant({2, 3, 1}, 146), 8);
  REQUIRE(s.bit_positions == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  for (std::size_t i = 0; i < 8; ++i) {
    const bool expect = i == 1 || i == 4 || i == 7;
    for (std::size_t p = 0; p < 6; ++p) CHECK(s.plane(0, i).bit(p) == expect);
  }
}

TEST_CASE("bit_rearrange: pixel 0 sets nothing, 255 with P=4 keeps bits 4..7 all set") {
  const auto zero = bit_rearrange(constant({2, 2, 3}, 0), 8);
  for (const auto& p : zero.planes) CHECK(std::all_of(p.words().begin(), p.words().end(), [](auto w) { return w == 0; }));
  const auto high = bit_rearrange(constant({2, 2, 3}, 255), 4);
  CHECK(high.bit_positions == std::vector<int>{4, 5, 6, 7});
  CHECK(high.planes.size() == 12);
  for (const auto& p : high.planes) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(p.bit(i));
  }
}

TEST_CASE("bit_rearrange: least significant selection and range checks") {
  const auto low = bit_rearrange(constant({1, 1, 1}, 0b1010), 3, PlaneSelect::kLeastSignificant);
  CHECK(low.bit_positions == std::vector<int>{0, 1, 2});
  CHECK(!low.plane(0, 0).bit(0));
  CHECK(low.plane(0, 1).bit(0));
  CHECK_THROWS_AS(bit_rearrange(constant({1, 1, 1}, 0), 0), ValueError);
  CHECK_THROWS_AS(bit_rearrange(constant({1, 1, 1}, 0), 9), ValueError);
  CHECK_THROWS_AS(encode_dbid(constant({1, 1, 1}, 0), 9), ValueError);
}

TEST_CASE("reconstruction is exact for all 256 pixel values") {
  ByteTensor img({16, 16, 1});
  for (int p = 0; p < 256; ++p) img.data[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(p);
  const auto s = bit_rearrange(img, 8);
  for (std::size_t p = 0; p < 256; ++p) {
    int sum = 0;
    for (std::size_t i = 0; i < 8; ++i) sum += s.plane(0, i).bit(p) ? 1 << s.bit_positions[i] : 0;
    CHECK(sum == static_cast<int>(p));
  }
}

TEST_CASE("encode_dbid: 146 on a 1x1x1 image") {
  const auto t = encode_dbid(constant({1, 1, 1}, 146), 8);
  REQUIRE(t.dims() == Dims{1, 1, 8});
  const std::vector<bool> expect{false, true, false, false, true, false, false, true};
  for (std::size_t bp = 0; bp < 8; ++bp) CHECK(t.bit(bp) == expect[bp]);
}

TEST_CASE("encode_dbid matches the bit-plane stack channel by channel and reconstructs pixels") {
  oracle::Rng rng(21);
  for (int planes : {8, 5, 1}) {
    const auto img = random_image(rng, {5, 7, 3});
    const auto s = bit_rearrange(img, planes);
    const auto t = encode_dbid(img, planes);
    REQUIRE(t.dims() == Dims{5, 7, 3 * static_cast<std::size_t>(planes)});
    for (std::size_t y = 0; y < 5; ++y) {
      for (std::size_t x = 0; x < 7; ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          int sum = 0;
          for (std::size_t i = 0; i < static_cast<std::size_t>(planes); ++i) {
            const bool b = t.bit(y, x, c * planes + i);
            REQUIRE(b == s.plane(c, i).bit(y, x, 0));
            sum += b ? 1 << s.bit_positions[i] : 0;
          }
          const int kept_mask = (0xFF << (8 - planes)) & 0xFF;
          REQUIRE(sum == (img.at(y, x, c) & kept_mask));
        }
      }
    }
  }
}

TEST_CASE("thermometer thresholds and examples") {
  for (int k : {1, 7, 8, 16, 32, 255}) {
    for (int j = 0; j < k; ++j) CHECK(thermometer_threshold(j, k) == threshold_oracle(j, k));
  }
  auto set_count = [](std::uint8_t p, int k) {
    const auto t = encode_thermometer(ByteTensor({1, 1, 1}, p), k);
    int n = 0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) n += t.bit(j);
    return n;
  };
  CHECK(set_count(0, 32) == 0);
  CHECK(set_count(255, 32) == 32);
  int oracle128 = 0;
  for (int j = 0; j < 32; ++j) oracle128 += 128 >= threshold_oracle(j, 32);
  CHECK(set_count(128, 32) == oracle128);
  CHECK(oracle128 == 16);
  CHECK_THROWS_AS(encode_thermometer(ByteTensor({1, 1, 1}), 0), ValueError);
}

TEST_CASE("thermometer is monotone and matches the threshold rule for every pixel, K in {8,16,32}") {
  ByteTensor img({1, 256, 1});
  for (int p = 0; p < 256; ++p) img.data[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(p);
  for (int k : {8, 16, 32}) {
    const auto t = encode_thermometer(img, k);
    REQUIRE(t.dims() == Dims{1, 256, static_cast<std::size_t>(k)});
    int prev = -1;
    for (int p = 0; p < 256; ++p) {
      int count = 0;
      for (int j = 0; j < k; ++j) {
        const bool b = t.bit(0, static_cast<std::size_t>(p), static_cast<std::size_t>(j));
        REQUIRE(b == (p >= threshold_oracle(j, k)));
        count += b;
      }
      REQUIRE(count >= prev);
      prev = count;
    }
    CHECK(prev == k);
  }
}

TEST_CASE("encode_thermometer: K=32 on RGB gives 96 channels") {
  CHECK(encode_thermometer(ByteTensor({4, 4, 3}), 32).dims() == Dims{4, 4, 96});
}

TEST_CASE("encode_bil uniform cases") {
  const std::vector<std::int8_t> plus(8, 1);
  const auto pw = BinaryKernel::from_bipolar(1, 8, 1, plus);
  const std::vector<FixedAffine> id(1);
  CHECK(encode_bil(ByteTensor({1, 1, 1}, 255), 8, pw, id).bit(0));   // dot -8 -> -1
  CHECK(!encode_bil(ByteTensor({1, 1, 1}, 0), 8, pw, id).bit(0));    // dot +8 -> +1
  CHECK_THROWS_AS(encode_bil(ByteTensor({1, 1, 1}, 0), 4, pw, id), ShapeError);
  CHECK_THROWS_AS(encode_bil(ByteTensor({1, 1, 1}, 0), 8, pw, std::vector<FixedAffine>(2)), ShapeError);
}

TEST_CASE("encode_bil equals the float pipeline on random weights and pixels") {
  oracle::Rng rng(31);
  for (int iter = 0; iter < 50; ++iter) {
    const Dims d{1 + oracle::below(rng, 6), 1 + oracle::below(rng, 6), 1 + oracle::below(rng, 3)};
    const int planes = 1 + static_cast<int>(oracle::below(rng, 8));
    const std::size_t k = 1 + oracle::below(rng, 40);
    const std::size_t cp = d.channels * static_cast<std::size_t>(planes);
    const auto img = random_image(rng, d);
    const auto w = oracle::random_bipolar(rng, k * cp);
    std::vector<FixedAffine> bn;
    for (std::size_t m = 0; m < k; ++m) bn.push_back(FixedAffine::from_real(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -3, 3)));
    const auto got = encode_bil(img, planes, BinaryKernel::from_bipolar(1, cp, k, w), bn);
    REQUIRE(got.dims() == Dims{d.height, d.width, k});
    for (std::size_t p = 0; p < d.height * d.width; ++p) {
      for (std::size_t m = 0; m < k; ++m) {
        double acc = 0;
        for (std::size_t c = 0; c < d.channels; ++c) {
          for (int i = 0; i < planes; ++i) {
            const int bp = 8 - planes + i;
            const double x = (img.data[p * d.channels + c] >> bp) & 1 ? -1.0 : 1.0;
            acc += x * w[m * cp + c * static_cast<std::size_t>(planes) + static_cast<std::size_t>(i)];
          }
        }
        const double y = bn[m].scale_q16 / 65536.0 * acc + bn[m].bias_q16 / 65536.0;
        REQUIRE(got.bit(p * k + m) == (oracle::sgn(y) < 0));
      }
    }
  }
}

TEST_CASE("encoders are deterministic") {
  oracle::Rng rng(41);
  const auto img = random_image(rng, {6, 6, 3});
  CHECK(encode_dbid(img, 8) == encode_dbid(img, 8));
  CHECK(encode_thermometer(img, 16) == encode_thermometer(img, 16));
  CHECK(bit_rearrange(img, 4).planes == bit_rearrange(img, 4).planes);
}
