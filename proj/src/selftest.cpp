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

#include <cmath>
#include <random>
#include <sstream>

#include "bpbn/binops.hpp"
#include "bpbn/bitops.hpp"
#include "bpbn/bpie.hpp"
#include "bpbn/cli.hpp"
#include "bpbn/cost_model.hpp"
#include "bpbn/encoders.hpp"

namespace bpbn::cli {

namespace {

using Rng = std::mt19937_64;

std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::int8_t> random_bipolar(Rng& rng, std::size_t n) {
  std::vector<std::int8_t> v(n);
  for (auto& x : v) x = (rng() & 1u) != 0 ? -1 : 1;
  return v;
}

SuiteResult roundtrip(Rng& rng) {
  for (int iter = 0; iter < 1000; ++iter) {
    const Dims d{1 + below(rng, 9), 1 + below(rng, 9), 1 + below(rng, 9)};
    const auto v = random_bipolar(rng, d.count());
    const PackedBitTensor p = pack_bipolar(d, v);
    if (!padding_is_zero(p.words(), p.size()) || unpack_bipolar(p) != v) {
      return {"roundtrip", false, "mismatch at shape " + to_string(d)};
    }
  }
  return {"roundtrip", true, "1000 random shapes"};
}

SuiteResult reconstruction() {
  ByteTensor img(Dims{1, 256, 1});
  for (int p = 0; p < 256; ++p) img.data[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(p);
  const BitPlaneStack s = bit_rearrange(img, 8);
  const PackedBitTensor dbid = encode_dbid(img, 8);
  for (std::size_t x = 0; x < 256; ++x) {
    int sum = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      const bool bit = s.plane(0, i).bit(x);
      sum += bit ? 1 << s.bit_positions[i] : 0;
      if (dbid.bit(x * 8 + i) != bit) return {"reconstruction", false, "DBID differs at pixel " + std::to_string(x)};
    }
    if (sum != static_cast<int>(x)) return {"reconstruction", false, "pixel " + std::to_string(x)};
  }
  return {"reconstruction", true, "256 pixel values"};
}

// Direct +-1 convolution used as the oracle for the packed kernels.
std::vector<long> naive_conv(const Dims& in, const std::vector<std::int8_t>& x, const std::vector<std::int8_t>& w,
                             std::size_t f, std::size_t maps, bool same, bool depthwise) {
  const long pad = same ? static_cast<long>(f / 2) : 0;
  const std::size_t oh = same ? in.height : in.height - f + 1;
  const std::size_t ow = same ? in.width : in.width - f + 1;
  const std::size_t cin = depthwise ? 1 : in.channels;
  const std::size_t mult = depthwise ? maps / in.channels : 1;
  std::vector<long> out(oh * ow * maps);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t xo = 0; xo < ow; ++xo) {
      for (std::size_t m = 0; m < maps; ++m) {
        long acc = 0;
        for (std::size_t ky = 0; ky < f; ++ky) {
          for (std::size_t kx = 0; kx < f; ++kx) {
            const long iy = static_cast<long>(y + ky) - pad;
            const long ix = static_cast<long>(xo + kx) - pad;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(in.height) && ix < static_cast<long>(in.width);
            for (std::size_t c = 0; c < cin; ++c) {
              const std::size_t sc = depthwise ? m / mult : c;
              const long a = inside ? x[in.offset(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), sc)] : 1;
              acc += a * w[((m * f + ky) * f + kx) * cin + c];
            }
          }
        }
        out[(y * ow + xo) * maps + m] = acc;
      }
    }
  }
  return out;
}

SuiteResult kernel_equivalence(Rng& rng) {
  for (int iter = 0; iter < 300; ++iter) {
    const bool depthwise = (iter % 3) == 0;
    const bool same = (rng() & 1u) != 0;
    const std::size_t f = 1 + 2 * below(rng, 3);
    const Dims in{f + below(rng, 6), f + below(rng, 6), 1 + below(rng, depthwise ? 4 : 70)};
    const std::size_t maps = depthwise ? in.channels * (1 + below(rng, 3)) : 1 + below(rng, 4);
    const std::size_t cin = depthwise ? 1 : in.channels;
    const auto x = random_bipolar(rng, in.count());
    const auto w = random_bipolar(rng, f * f * cin * maps);
    const auto k = BinaryKernel::from_bipolar(f, cin, maps, w);
    const AccumTensor got = binary_conv2d(pack_bipolar(in, x), k, same ? Padding::kSame : Padding::kValid, depthwise);
    const auto want = naive_conv(in, x, w, f, maps, same, depthwise);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got.data[i] != want[i]) {
        return {"kernel-equivalence", false, "instance " + std::to_string(iter) + " element " + std::to_string(i)};
      }
    }
  }
  return {"kernel-equivalence", true, "300 dense/depthwise instances"};
}

SuiteResult threshold_fold(Rng& rng) {
  for (int iter = 0; iter < 1000; ++iter) {
    FloatAffine p{uniform(rng, -3.0, 3.0), uniform(rng, -12.0, 12.0), uniform(rng, 0.05, 4.0), uniform(rng, -4.0, 4.0)};
    if (std::abs(p.gamma) < 1e-6) continue;
    const BnThreshold t = fold_bn_to_threshold(p);
    for (int x = -64; x <= 64; ++x) {
      const double y = p.gamma * (x - p.mu) / p.sigma + p.beta;
      if (t.apply(x) != (y >= 0.0 ? 1 : -1)) {
        return {"threshold-fold", false, "draw " + std::to_string(iter) + " x=" + std::to_string(x)};
      }
    }
  }
  return {"threshold-fold", true, "1000 draws, x in [-64, 64]"};
}

SuiteResult sign_rule(Rng& rng) {
  const PackedBitTensor s = sign_to_bits(AccumTensor(Dims{1, 1, 3}, {-3, 0, 7}));
  if (s.value(0) != -1 || s.value(1) != 1 || s.value(2) != 1) return {"sign", false, "tie rule at zero"};
  AccumTensor r(Dims{4, 4, 5});
  for (auto& v : r.data) v = static_cast<std::int32_t>(below(rng, 21)) - 10;
  const PackedBitTensor b = sign_to_bits(r);
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    if (b.value(i) != (r.data[i] >= 0 ? 1 : -1)) return {"sign", false, "element " + std::to_string(i)};
  }
  return {"sign", true, "tie rule and elementwise rule"};
}

SuiteResult shift(Rng& rng) {
  for (int bp = 0; bp < 8; ++bp) {
    AccumTensor v(Dims{1, 1, 1000});
    for (auto& x : v.data) x = static_cast<std::int32_t>(below(rng, (1u << 25) - 1)) - ((1 << 24) - 1);
    const AccumTensor r = reweight(v, bp);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      if (static_cast<std::int64_t>(r.data[i]) != static_cast<std::int64_t>(v.data[i]) * (std::int64_t{1} << bp)) {
        return {"shift", false, "bp=" + std::to_string(bp)};
      }
    }
  }
  return {"shift", true, "8 positions x 1000 values"};
}

SuiteResult table1() {
  const auto r = cost::report({});
  const double ratios[] = {1.0, 8.0, 10.8, 32.0, 2.6, 1.3, 1.0};
  const double speedups[] = {1.0, 1.12, 0.81, 0.27, 3.42, 6.84, 9.0};
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (std::abs(r.rows[i].ratio - ratios[i]) > 0.1 || std::abs(r.rows[i].speedup - speedups[i]) > 0.02) {
      return {"table1", false, r.rows[i].name};
    }
  }
  if (r.rows[0].macs != 3538944 || r.rows[4].macs != 9289728) return {"table1", false, "MAC counts"};
  return {"table1", true, "7 rows within tolerance"};
}

}  // namespace

std::vector<SuiteResult> run_selftest(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SuiteResult> out;
  auto guarded = [&](auto&& fn, const char* name) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  guarded([&] { return roundtrip(rng); }, "roundtrip");
  guarded([&] { return reconstruction(); }, "reconstruction");
  guarded([&] { return kernel_equivalence(rng); }, "kernel-equivalence");
  guarded([&] { return threshold_fold(rng); }, "threshold-fold");
  guarded([&] { return sign_rule(rng); }, "sign");
  guarded([&] { return shift(rng); }, "shift");
  guarded([&] { return table1(); }, "table1");
  return out;
}

}  // namespace bpbn::cli
