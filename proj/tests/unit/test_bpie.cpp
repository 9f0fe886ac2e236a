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

#include "bpbn/bitops.hpp"
#include "bpbn/bpie.hpp"
#include "bpbn/error.hpp"
#include "oracles.hpp"

using namespace bpbn;

namespace {

// Kernels of size f with every weight -1 and identity affine.
BpieWeights stub_weights(std::size_t channels, int planes, std::size_t n, std::size_t f) {
  std::vector<BinaryKernel> k;
  const std::vector<std::int8_t> neg(f * f * n, -1);
  for (std::size_t i = 0; i < channels * static_cast<std::size_t>(planes); ++i) {
    k.push_back(BinaryKernel::from_bipolar(f, 1, n, neg));
  }
  return BpieWeights::make(std::move(k), std::vector<FloatAffine>(channels * planes * n));
}

struct RandomBlock {
  Dims in;
  BpieConfig cfg;
  std::size_t f = 1;
  std::vector<std::vector<std::int8_t>> kernels;  // per (c, i): (n, ky, kx)
  BpieWeights weights;
};

RandomBlock random_block(oracle::Rng& rng) {
  RandomBlock b;
  b.f = 1 + 2 * oracle::below(rng, 2);
  b.in = {b.f + oracle::below(rng, 6), b.f + oracle::below(rng, 6), 1 + oracle::below(rng, 3)};
  b.cfg.planes = 1 + static_cast<int>(oracle::below(rng, 8));
  b.cfg.multiplier = 1 + oracle::below(rng, 3);
  b.cfg.padding = rng() & 1u ? Padding::kSame : Padding::kValid;
  std::vector<BinaryKernel> ks;
  std::vector<FloatAffine> affine;
  for (std::size_t s = 0; s < b.in.channels * static_cast<std::size_t>(b.cfg.planes); ++s) {
    b.kernels.push_back(oracle::random_bipolar(rng, b.cfg.multiplier * b.f * b.f));
    ks.push_back(BinaryKernel::from_bipolar(b.f, 1, b.cfg.multiplier, b.kernels.back()));
    for (std::size_t n = 0; n < b.cfg.multiplier; ++n) {
      FloatAffine p;
      p.gamma = (rng() & 1u ? -1 : 1) * oracle::uniform(rng, 0.1, 3);
      p.mu = oracle::uniform(rng, -4, 4);
      p.sigma = oracle::uniform(rng, 0.3, 4);
      p.beta = oracle::uniform(rng, -2, 2);
      affine.push_back(p);
    }
  }
  b.weights = BpieWeights::make(std::move(ks), std::move(affine));
  return b;
}

// Float pipeline: per-plane +-1 depthwise conv, float BN, weight 2^bp, sum.
std::vector<double> float_block(const RandomBlock& b, const ByteTensor& img) {
  const auto planes = static_cast<std::size_t>(b.cfg.planes);
  const std::size_t n = b.cfg.multiplier;
  const bool same = b.cfg.padding == Padding::kSame;
  const std::size_t oh = same ? b.in.height : b.in.height - b.f + 1;
  const std::size_t ow = same ? b.in.width : b.in.width - b.f + 1;
  const Dims plane_dims{b.in.height, b.in.width, 1};
  std::vector<double> out(oh * ow * b.in.channels * n, 0.0);
  for (std::size_t c = 0; c < b.in.channels; ++c) {
    for (std::size_t i = 0; i < planes; ++i) {
      const int bp = 8 - b.cfg.planes + static_cast<int>(i);
      std::vector<int> x(plane_dims.count());
      for (std::size_t p = 0; p < x.size(); ++p) x[p] = (img.data[p * b.in.channels + c] >> bp) & 1 ? -1 : 1;
      const auto conv = oracle::conv(plane_dims, x, b.kernels[c * planes + i], b.f, n, same, true, 1);
      for (std::size_t p = 0; p < oh * ow; ++p) {
        for (std::size_t k = 0; k < n; ++k) {
          const auto& aff = b.weights.float_affine[(c * planes + i) * n + k];
          out[p * b.in.channels * n + c * n + k] += std::ldexp(oracle::bn(aff, conv[p * n + k]), bp);
        }
      }
    }
  }
  return out;
}

AccumTensor scalar(std::int32_t v) { return AccumTensor({1, 1, 1}, std::vector<std::int32_t>{v}); }

ByteTensor random_image(oracle::Rng& rng, Dims d) {
  ByteTensor img(d);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng());
  return img;
}

}  // namespace

TEST_CASE("feature_extract: all -1 kernel on set and unset planes") {
  BpieConfig cfg;
  cfg.planes = 1;
  const auto w = stub_weights(1, 1, 1, 3);
  const auto set = feature_extract(bit_rearrange(ByteTensor({4, 4, 1}, 255), 1), w, cfg);
  const auto unset = feature_extract(bit_rearrange(ByteTensor({4, 4, 1}, 0), 1), w, cfg);
  REQUIRE(set.size() == 1);
  CHECK(set[0].frac_bits == 16);
  for (std::size_t y = 1; y < 3; ++y) {
    for (std::size_t x = 1; x < 3; ++x) {
      CHECK(set[0].at(y, x, 0) == 9 * 65536);
      CHECK(unset[0].at(y, x, 0) == -9 * 65536);
    }
  }
}

TEST_CASE("feature_extract agrees with the float conv + BN per map") {
  oracle::Rng rng(201);
  for (int iter = 0; iter < 100; ++iter) {
    const RandomBlock b = random_block(rng);
    const auto img = random_image(rng, b.in);
    const auto stack = bit_rearrange(img, b.cfg.planes);
    const auto fe = feature_extract(stack, b.weights, b.cfg);
    const std::size_t n = b.cfg.multiplier;
    REQUIRE(fe.size() == b.in.channels * static_cast<std::size_t>(b.cfg.planes));
    for (std::size_t s = 0; s < fe.size(); ++s) {
      const Dims pd{b.in.height, b.in.width, 1};
      const auto conv = oracle::conv(pd, oracle::values(stack.planes[s]), b.kernels[s], b.f, n,
                                     b.cfg.padding == Padding::kSame, true, 1);
      REQUIRE(fe[s].data.size() == conv.size());
      for (std::size_t i = 0; i < conv.size(); ++i) {
        const double want = oracle::bn(b.weights.float_affine[s * n + i % n], conv[i]);
        const double got = fe[s].data[i] / 65536.0;
        REQUIRE(std::abs(got - want) <= std::ldexp(1.0, -10) * std::max(1.0, std::abs(want)));
        if (std::abs(want) >= std::ldexp(1.0, -12)) REQUIRE(oracle::sgn(got) == oracle::sgn(want));
      }
    }
  }
}

TEST_CASE("feature_extract rejects incomplete weights") {
  BpieConfig cfg;
  cfg.planes = 2;
  const auto img = ByteTensor({3, 3, 2});
  const auto stack = bit_rearrange(img, 2);
  CHECK_THROWS_AS(feature_extract(stack, stub_weights(1, 2, 1, 1), cfg), ShapeError);
  cfg.planes = 3;
  CHECK_THROWS_AS(feature_extract(stack, stub_weights(2, 3, 1, 1), cfg), ShapeError);
  cfg.planes = 2;
  cfg.multiplier = 2;
  CHECK_THROWS_AS(feature_extract(stack, stub_weights(2, 2, 1, 1), cfg), ShapeError);
}

TEST_CASE("reweight examples and errors") {
  CHECK(reweight(scalar(3), 7).data[0] == 384);
  CHECK(reweight(scalar(-1), 0).data[0] == -1);
  CHECK(reweight(AccumTensor({1, 1, 1}, {5}, 16), 2).frac_bits == 16);
  CHECK_THROWS_AS(reweight(scalar(1 << 24), 1), ValueError);
  CHECK_THROWS_AS(reweight(scalar(-(1 << 24)), 1), ValueError);
  CHECK_THROWS_AS(reweight(scalar(1), 8), ValueError);
  CHECK_THROWS_AS(reweight(scalar(1), -1), ValueError);
}

TEST_CASE("reweight equals multiplication for random in-range values") {
  oracle::Rng rng(203);
  AccumTensor v({1, 1, 100000});
  for (auto& x : v.data) x = static_cast<std::int32_t>(oracle::below(rng, (1u << 25) - 1)) - ((1 << 24) - 1);
  for (int bp = 0; bp < 8; ++bp) {
    const auto r = reweight(v, bp);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      REQUIRE(static_cast<std::int64_t>(r.data[i]) == static_cast<std::int64_t>(v.data[i]) * (std::int64_t{1} << bp));
    }
  }
}

TEST_CASE("fuse: identity extraction stub reconstructs every pixel value") {
  BpieConfig cfg;
  std::vector<AccumTensor> planes;
  for (int bp = 0; bp < 8; ++bp) {
    AccumTensor fe({1, 256, 1});
    for (int p = 0; p < 256; ++p) fe.data[static_cast<std::size_t>(p)] = (p >> bp) & 1;
    planes.push_back(reweight(fe, bp));
  }
  const auto fused = std::get<AccumTensor>(fuse(planes, 1, cfg));
  for (int p = 0; p < 256; ++p) CHECK(fused.data[static_cast<std::size_t>(p)] == p);
}

TEST_CASE("fuse: zeros give zeros, order is channel-major, count is N*C for any P") {
  for (int planes : {1, 4, 8}) {
    BpieConfig cfg;
    cfg.planes = planes;
    const std::size_t c = 3;
    const std::size_t n = 2;
    std::vector<AccumTensor> zero(c * static_cast<std::size_t>(planes), AccumTensor({2, 2, n}));
    const auto z = std::get<AccumTensor>(fuse(zero, c, cfg));
    CHECK(z.dims == Dims{2, 2, c * n});
    for (auto v : z.data) CHECK(v == 0);

    std::vector<AccumTensor> tagged = zero;
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t k = 0; k < n; ++k) tagged[ch * static_cast<std::size_t>(planes)].at(1, 0, k) = static_cast<std::int32_t>(10 * ch + k);
    }
    const auto t = std::get<AccumTensor>(fuse(tagged, c, cfg));
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t k = 0; k < n; ++k) CHECK(t.at(1, 0, ch * n + k) == static_cast<std::int32_t>(10 * ch + k));
    }
  }
}

TEST_CASE("fuse matches a wide-integer sum and is linear") {
  oracle::Rng rng(205);
  for (int iter = 0; iter < 200; ++iter) {
    BpieConfig cfg;
    cfg.planes = 1 + static_cast<int>(oracle::below(rng, 8));
    const std::size_t c = 1 + oracle::below(rng, 3);
    const Dims md{1 + oracle::below(rng, 4), 1 + oracle::below(rng, 4), 1 + oracle::below(rng, 4)};
    const std::size_t stacks = c * static_cast<std::size_t>(cfg.planes);
    std::vector<AccumTensor> a(stacks, AccumTensor(md, 16));
    std::vector<AccumTensor> b(stacks, AccumTensor(md, 16));
    std::vector<AccumTensor> ab(stacks, AccumTensor(md, 16));
    for (std::size_t s = 0; s < stacks; ++s) {
      for (std::size_t i = 0; i < md.count(); ++i) {
        a[s].data[i] = static_cast<std::int32_t>(oracle::below(rng, 1u << 27)) - (1 << 26);
        b[s].data[i] = static_cast<std::int32_t>(oracle::below(rng, 1u << 27)) - (1 << 26);
        ab[s].data[i] = a[s].data[i] + b[s].data[i];
      }
    }
    const auto fa = std::get<AccumTensor>(fuse(a, c, cfg));
    const auto fb = std::get<AccumTensor>(fuse(b, c, cfg));
    const auto fab = std::get<AccumTensor>(fuse(ab, c, cfg));
    const std::size_t n = md.channels;
    for (std::size_t p = 0; p < md.height * md.width; ++p) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t k = 0; k < n; ++k) {
          __int128 want = 0;
          for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.planes); ++i) want += a[ch * cfg.planes + i].data[p * n + k];
          const std::size_t o = p * c * n + ch * n + k;
          REQUIRE(static_cast<__int128>(fa.data[o]) == want);
          REQUIRE(fab.data[o] == fa.data[o] + fb.data[o]);
        }
      }
    }
  }
}

TEST_CASE("fuse rejects int32 overflow and missing planes") {
  BpieConfig cfg;
  cfg.planes = 2;
  std::vector<AccumTensor> big(2, scalar(INT32_MAX / 2 + 1));
  CHECK_THROWS_AS(fuse(big, 1, cfg), OverflowError);
  CHECK_THROWS_AS(fuse(std::vector<AccumTensor>(3, AccumTensor({1, 1, 1})), 1, cfg), ShapeError);
}

TEST_CASE("fuse sign-bits output") {
  BpieConfig cfg;
  cfg.planes = 1;
  cfg.fuse_output = FuseOutput::kSignBits;
  const auto bits = std::get<PackedBitTensor>(fuse({AccumTensor({1, 1, 3}, {-2, 0, 2})}, 1, cfg));
  CHECK(oracle::values(bits) == std::vector<int>{-1, 1, 1});
}

TEST_CASE("bpie_forward: 1x1 stub pipeline") {
  BpieConfig cfg;
  const auto w = stub_weights(1, 8, 1, 1);
  const auto hi = std::get<AccumTensor>(bpie_forward(ByteTensor({1, 1, 1}, 255), w, cfg));
  CHECK(hi.data[0] == 255 * 65536);
  const auto lo = std::get<AccumTensor>(bpie_forward(ByteTensor({1, 1, 1}, 0), w, cfg));
  CHECK(lo.data[0] == -255 * 65536);
  // With the high four planes only, the shifts are the true positions 4..7.
  cfg.planes = 4;
  const auto high4 = std::get<AccumTensor>(bpie_forward(ByteTensor({1, 1, 1}, 255), stub_weights(1, 4, 1, 1), cfg));
  CHECK(high4.data[0] == (16 + 32 + 64 + 128) * 65536);
  // 146 = bits {1,4,7}: +1 on set planes, -1 elsewhere.
  cfg.planes = 8;
  const auto mid = std::get<AccumTensor>(bpie_forward(ByteTensor({1, 1, 1}, 146), w, cfg));
  CHECK(mid.data[0] == (146 - (255 - 146)) * 65536);
}

TEST_CASE("bpie_forward agrees in sign with the float pipeline outside the near-tie band") {
  oracle::Rng rng(207);
  std::size_t compared = 0;
  std::size_t exempt = 0;
  for (int iter = 0; iter < 200; ++iter) {
    RandomBlock b = random_block(rng);
    const auto img = random_image(rng, b.in);
    const auto fixed = std::get<AccumTensor>(bpie_forward(img, b.weights, b.cfg));
    b.cfg.affine_mode = AffineMode::kFloat;
    const auto fl = std::get<AccumTensor>(bpie_forward(img, b.weights, b.cfg));
    const auto want = float_block(b, img);
    REQUIRE(fixed.data.size() == want.size());
    REQUIRE(fixed.dims.channels == b.in.channels * b.cfg.multiplier);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (std::abs(want[i]) < std::ldexp(1.0, -8)) {
        ++exempt;
        continue;
      }
      ++compared;
      REQUIRE(oracle::sgn(fixed.data[i]) == oracle::sgn(want[i]));
      REQUIRE(oracle::sgn(fl.data[i]) == oracle::sgn(want[i]));
      // Float mode rounds once per plane: at most 255 half-ulps of Q16.16.
      REQUIRE(std::abs(fl.data[i] / 65536.0 - want[i]) <= 255.0 * std::ldexp(1.0, -17) + 1e-9);
    }
  }
  CHECK(compared > 1000);
  MESSAGE("compared " << compared << ", exempt " << exempt);
}

TEST_CASE("bpie_forward is deterministic") {
  oracle::Rng rng(209);
  const RandomBlock b = random_block(rng);
  const auto img = random_image(rng, b.in);
  CHECK(std::get<AccumTensor>(bpie_forward(img, b.weights, b.cfg)) ==
        std::get<AccumTensor>(bpie_forward(img, b.weights, b.cfg)));
}
