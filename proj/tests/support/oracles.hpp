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

// Naive reference computations used as test oracles. Everything here works
// on plain +-1 / integer / double vectors and touches packed tensors only
// through the per-bit accessor, so it shares no code with the kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bpbn/layer_params.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn::oracle {

using Rng = std::mt19937_64;

inline std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::vector<std::int8_t> random_bipolar(Rng& rng, std::size_t n) {
  std::vector<std::int8_t> v(n);
  for (auto& x : v) x = (rng() & 1u) != 0 ? -1 : 1;
  return v;
}

inline std::vector<int> values(const PackedBitTensor& t) {
  std::vector<int> v(t.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.bit(i) ? -1 : 1;
  return v;
}

inline int sgn(double x) { return x >= 0 ? 1 : -1; }

inline long dot(const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Convolution over +-1 (or any integer) input. Weights are laid out
// (map, ky, kx, c) with c ranging over in.channels (dense) or 1 (depthwise).
// Padded taps read `pad_value`.
template <typename In, typename W>
std::vector<long> conv(const Dims& in, const std::vector<In>& x, const std::vector<W>& w, std::size_t f,
                       std::size_t maps, bool same, bool depthwise, long pad_value) {
  const long pad = same ? static_cast<long>(f / 2) : 0;
  const std::size_t oh = same ? in.height : in.height - f + 1;
  const std::size_t ow = same ? in.width : in.width - f + 1;
  const std::size_t cin = depthwise ? 1 : in.channels;
  const std::size_t mult = depthwise ? maps / in.channels : 1;
  std::vector<long> out(oh * ow * maps, 0);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      for (std::size_t m = 0; m < maps; ++m) {
        long acc = 0;
        for (std::size_t ky = 0; ky < f; ++ky) {
          for (std::size_t kx = 0; kx < f; ++kx) {
            const long iy = static_cast<long>(oy + ky) - pad;
            const long ix = static_cast<long>(ox + kx) - pad;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(in.height) &&
                                ix < static_cast<long>(in.width);
            for (std::size_t c = 0; c < cin; ++c) {
              const std::size_t ch = depthwise ? m / mult : c;
              const long xv = inside ? static_cast<long>(x[in.offset(static_cast<std::size_t>(iy),
                                                                     static_cast<std::size_t>(ix), ch)])
                                     : pad_value;
              acc += xv * static_cast<long>(w[((m * f + ky) * f + kx) * cin + c]);
            }
          }
        }
        out[(oy * ow + ox) * maps + m] = acc;
      }
    }
  }
  return out;
}

inline double bn(const FloatAffine& p, double x) { return p.gamma * (x - p.mu) / p.sigma + p.beta; }

}  // namespace bpbn::oracle
