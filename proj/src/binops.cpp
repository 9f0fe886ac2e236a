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

#include "bpbn/binops.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>

#include "bpbn/bitops.hpp"
#include "bpbn/error.hpp"
#include "bpbn/parallel.hpp"

namespace bpbn {

namespace {

std::atomic<bool> g_sign_tie_fault{false};

struct ConvGeometry {
  std::size_t out_h;
  std::size_t out_w;
  std::ptrdiff_t pad;
};

ConvGeometry geometry(const Dims& in, std::size_t size, Padding padding) {
  if (size % 2 == 0) throw ValueError("kernel size must be odd, got " + std::to_string(size));
  if (padding == Padding::kSame) {
    return {in.height, in.width, static_cast<std::ptrdiff_t>(size / 2)};
  }
  if (size > in.height || size > in.width) {
    throw ShapeError("valid convolution with kernel " + std::to_string(size) + " on " + to_string(in));
  }
  return {in.height - size + 1, in.width - size + 1, 0};
}

void check_bias(std::size_t maps, const std::vector<std::int32_t>& bias) {
  if (!bias.empty() && bias.size() != maps) {
    throw ShapeError("bias has " + std::to_string(bias.size()) + " entries for " +
                     std::to_string(maps) + " maps");
  }
}

std::int32_t bias_of(const std::vector<std::int32_t>& bias, std::size_t m) {
  return bias.empty() ? 0 : bias[m];
}

std::int32_t checked_i32(std::int64_t v, const char* what) {
  if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
    throw OverflowError(std::string(what) + ": value " + std::to_string(v) + " exceeds int32");
  }
  return static_cast<std::int32_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels

BinaryKernel BinaryKernel::from_bipolar(std::size_t size, std::size_t in_channels,
                                        std::size_t out_maps, std::span<const std::int8_t> values,
                                        std::vector<std::int32_t> bias) {
  const std::size_t per_map = size * size * in_channels;
  if (values.size() != per_map * out_maps) {
    throw ShapeError("kernel values: expected " + std::to_string(per_map * out_maps) + ", got " +
                     std::to_string(values.size()));
  }
  BinaryKernel k{size, in_channels, out_maps, {}, std::move(bias)};
  k.weights.reserve(out_maps);
  for (std::size_t m = 0; m < out_maps; ++m) {
    k.weights.push_back(pack_bipolar({size, size, in_channels}, values.subspan(m * per_map, per_map)));
  }
  k.validate();
  return k;
}

BinaryKernel BinaryKernel::from_packed(std::size_t size, const PackedBitTensor& blob,
                                       std::vector<std::int32_t> bias) {
  const Dims& d = blob.dims();
  if (d.width != size * size) {
    throw ShapeError("kernel blob " + to_string(d) + " does not hold " + std::to_string(size) + "x" +
                     std::to_string(size) + " taps");
  }
  BinaryKernel k{size, d.channels, d.height, {}, std::move(bias)};
  const std::size_t per_map = size * size * d.channels;
  for (std::size_t m = 0; m < d.height; ++m) {
    k.weights.emplace_back(Dims{size, size, d.channels}, extract_bits(blob.words(), m * per_map, per_map));
  }
  k.validate();
  return k;
}

PackedBitTensor BinaryKernel::to_packed() const {
  const std::size_t per_map = size * size * in_channels;
  PackedBitTensor out(Dims{out_maps, size * size, in_channels});
  for (std::size_t m = 0; m < out_maps; ++m) {
    for (std::size_t i = 0; i < per_map; ++i) out.set_bit(m * per_map + i, weights[m].bit(i));
  }
  return out;
}

void BinaryKernel::validate() const {
  if (size % 2 == 0) throw ValueError("kernel size must be odd, got " + std::to_string(size));
  if (weights.size() != out_maps) {
    throw ShapeError("kernel declares " + std::to_string(out_maps) + " maps but holds " +
                     std::to_string(weights.size()));
  }
  const Dims want{size, size, in_channels};
  for (const auto& w : weights) {
    if (w.dims() != want) {
      throw ShapeError("kernel map dims " + to_string(w.dims()) + ", expected " + to_string(want));
    }
  }
  check_bias(out_maps, bias);
}

void Int8Kernel::validate() const {
  if (size % 2 == 0) throw ValueError("kernel size must be odd, got " + std::to_string(size));
  if (weights.size() != size * size * in_channels * out_maps) {
    throw ShapeError("int8 kernel holds " + std::to_string(weights.size()) + " weights, expected " +
                     std::to_string(size * size * in_channels * out_maps));
  }
  check_bias(out_maps, bias);
}

// ---------------------------------------------------------------------------
// Affine and thresholds

FixedAffine FixedAffine::from_real(double scale, double bias) {
  constexpr double kLimit = 32768.0;
  if (!std::isfinite(scale) || !std::isfinite(bias) || std::abs(scale) >= kLimit ||
      std::abs(bias) >= kLimit) {
    throw ValueError("affine term outside Q16.16 range: scale " + std::to_string(scale) + ", bias " +
                     std::to_string(bias));
  }
  const double one = static_cast<double>(kQ16One);
  return {static_cast<std::int32_t>(std::llround(scale * one)),
          static_cast<std::int32_t>(std::llround(bias * one))};
}

FixedAffine FixedAffine::from_float(const FloatAffine& p) {
  if (!(p.sigma > 0.0)) throw ValueError("batch norm sigma must be positive");
  const double a = p.gamma / p.sigma;
  return from_real(a, p.beta - p.gamma * p.mu / p.sigma);
}

std::int32_t affine_fixed(std::int32_t x, const FixedAffine& p) {
  if (std::abs(static_cast<std::int64_t>(x)) > kAffineInputLimit) {
    throw ValueError("affine_fixed input " + std::to_string(x) + " exceeds 2^14");
  }
  const std::int64_t y = static_cast<std::int64_t>(p.scale_q16) * x + p.bias_q16;
  return checked_i32(y, "affine_fixed");
}

AccumTensor affine_fixed(const AccumTensor& x, std::span<const FixedAffine> params) {
  if (x.frac_bits != 0) throw ValueError("affine_fixed expects integer input");
  if (params.size() != x.dims.channels) {
    throw ShapeError("affine_fixed: " + std::to_string(params.size()) + " parameter sets for " +
                     std::to_string(x.dims.channels) + " channels");
  }
  AccumTensor out(x.dims, kQ16);
  const std::size_t c = x.dims.channels;
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = affine_fixed(x.data[i], params[i % c]);
  return out;
}

BnThreshold fold_bn_to_threshold(const FloatAffine& p) {
  if (p.gamma == 0.0) throw ValueError("batch norm gamma is zero");
  if (!(p.sigma > 0.0)) throw ValueError("batch norm sigma must be positive");
  const bool rising = p.gamma > 0.0;
  // The output is +1 on one side of the root of the affine map; `hit(x)` is
  // true from the threshold upward in both polarities.
  auto hit = [&](std::int64_t x) { return (p.apply(static_cast<double>(x)) >= 0.0) == rising; };

  constexpr double kClamp = 1099511627776.0;  // 2^40
  const double root = p.mu - p.beta * p.sigma / p.gamma;
  std::int64_t t = 0;
  if (!std::isfinite(root) || root >= kClamp) {
    t = static_cast<std::int64_t>(kClamp);
  } else if (root <= -kClamp) {
    t = -static_cast<std::int64_t>(kClamp);
  } else {
    t = static_cast<std::int64_t>(rising ? std::ceil(root) : std::floor(root) + 1.0);
    // Settle rounding in the root so the comparison matches the float map.
    for (int i = 0; i < 8 && hit(t - 1); ++i) --t;
    for (int i = 0; i < 8 && !hit(t); ++i) ++t;
  }
  return {t, rising ? 1 : -1};
}

// ---------------------------------------------------------------------------
// Elementwise and pooling

PackedBitTensor sign_to_bits(const AccumTensor& x) {
  const bool fault = g_sign_tie_fault.load(std::memory_order_relaxed);
  PackedBitTensor out(x.dims);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const std::int32_t v = x.data[i];
    if (v < 0 || (fault && v == 0)) out.set_bit(i, true);
  }
  return out;
}

namespace {
void check_poolable(const Dims& d) {
  if (d.height % 2 != 0 || d.width % 2 != 0) {
    throw ShapeError("maxpool2 needs even height and width, got " + to_string(d));
  }
}
}  // namespace

AccumTensor maxpool2(const AccumTensor& x) {
  check_poolable(x.dims);
  const Dims od{x.dims.height / 2, x.dims.width / 2, x.dims.channels};
  AccumTensor out(od, x.frac_bits);
  for (std::size_t h = 0; h < od.height; ++h) {
    for (std::size_t w = 0; w < od.width; ++w) {
      for (std::size_t c = 0; c < od.channels; ++c) {
        out.at(h, w, c) = std::max({x.at(2 * h, 2 * w, c), x.at(2 * h, 2 * w + 1, c),
                                    x.at(2 * h + 1, 2 * w, c), x.at(2 * h + 1, 2 * w + 1, c)});
      }
    }
  }
  return out;
}

PackedBitTensor maxpool2(const PackedBitTensor& x) {
  const Dims& d = x.dims();
  check_poolable(d);
  const Dims od{d.height / 2, d.width / 2, d.channels};
  PackedBitTensor out(od);
  for (std::size_t h = 0; h < od.height; ++h) {
    for (std::size_t w = 0; w < od.width; ++w) {
      for (std::size_t c = 0; c < od.channels; ++c) {
        // -1 survives only if all four inputs are -1.
        const bool all_neg = x.bit(2 * h, 2 * w, c) && x.bit(2 * h, 2 * w + 1, c) &&
                             x.bit(2 * h + 1, 2 * w, c) && x.bit(2 * h + 1, 2 * w + 1, c);
        if (all_neg) out.set_bit(od.offset(h, w, c), true);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convolutions

namespace {

AccumTensor dense_conv(const PackedBitTensor& input, const BinaryKernel& k, Padding padding) {
  const Dims& in = input.dims();
  const auto g = geometry(in, k.size, padding);
  const std::size_t cw = words_for(in.channels);
  const std::size_t taps = k.size * k.size;

  // One zero-padded channel vector per pixel.
  std::vector<std::uint64_t> pixels(in.height * in.width * cw);
  for (std::size_t p = 0; p < in.height * in.width; ++p) {
    const auto v = extract_bits(input.words(), p * in.channels, in.channels);
    std::copy(v.begin(), v.end(), pixels.begin() + static_cast<std::ptrdiff_t>(p * cw));
  }

  const Dims od{g.out_h, g.out_w, k.out_maps};
  AccumTensor out(od);
  const std::int64_t full = static_cast<std::int64_t>(taps * in.channels);
  parallel_for(k.out_maps, [&](std::size_t m) {
    std::vector<std::uint64_t> kw(taps * cw);
    for (std::size_t t = 0; t < taps; ++t) {
      const auto v = extract_bits(k.weights[m].words(), t * in.channels, in.channels);
      std::copy(v.begin(), v.end(), kw.begin() + static_cast<std::ptrdiff_t>(t * cw));
    }
    const std::int32_t b = bias_of(k.bias, m);
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        std::int64_t mismatches = 0;
        for (std::size_t ky = 0; ky < k.size; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - g.pad;
          for (std::size_t kx = 0; kx < k.size; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - g.pad;
            const std::uint64_t* kt = &kw[(ky * k.size + kx) * cw];
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(in.height) &&
                                ix < static_cast<std::ptrdiff_t>(in.width);
            if (inside) {
              const std::uint64_t* px = &pixels[(static_cast<std::size_t>(iy) * in.width +
                                                 static_cast<std::size_t>(ix)) * cw];
              for (std::size_t j = 0; j < cw; ++j) mismatches += std::popcount(px[j] ^ kt[j]);
            } else {
              // Padding is +1 (all bits clear).
              for (std::size_t j = 0; j < cw; ++j) mismatches += std::popcount(kt[j]);
            }
          }
        }
        out.at(oy, ox, m) = checked_i32(full - 2 * mismatches + b, "binary_conv2d");
      }
    }
  });
  return out;
}

AccumTensor depthwise_conv(const PackedBitTensor& input, const BinaryKernel& k, Padding padding) {
  const Dims& in = input.dims();
  if (k.in_channels != 1) throw ShapeError("depthwise kernel must have one input channel");
  if (in.channels == 0 || k.out_maps % in.channels != 0) {
    throw ShapeError("depthwise kernel with " + std::to_string(k.out_maps) +
                     " maps does not divide input channels " + std::to_string(in.channels));
  }
  const std::size_t mult = k.out_maps / in.channels;
  const auto g = geometry(in, k.size, padding);
  const std::size_t taps = k.size * k.size;
  const std::size_t tw = words_for(taps);

  const Dims od{g.out_h, g.out_w, k.out_maps};
  AccumTensor out(od);
  parallel_for(k.out_maps, [&](std::size_t m) {
    const std::size_t ch = m / mult;
    const auto kw = k.weights[m].words();
    const std::int32_t b = bias_of(k.bias, m);
    std::vector<std::uint64_t> window(tw);
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        std::fill(window.begin(), window.end(), 0);
        for (std::size_t ky = 0; ky < k.size; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - g.pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.height)) continue;
          for (std::size_t kx = 0; kx < k.size; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - g.pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.width)) continue;
            if (input.bit(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), ch)) {
              const std::size_t t = ky * k.size + kx;
              window[t / kWordBits] |= std::uint64_t{1} << (t % kWordBits);
            }
          }
        }
        const std::int64_t dot = popcount_xor_dot(window, kw, taps);
        out.at(oy, ox, m) = checked_i32(dot + b, "binary_conv2d");
      }
    }
  });
  return out;
}

}  // namespace

AccumTensor binary_conv2d(const PackedBitTensor& input, const BinaryKernel& kernel, Padding padding,
                          bool depthwise) {
  kernel.validate();
  if (depthwise) return depthwise_conv(input, kernel, padding);
  if (kernel.in_channels != input.dims().channels) {
    throw ShapeError("kernel expects " + std::to_string(kernel.in_channels) + " channels, input " +
                     to_string(input.dims()));
  }
  return dense_conv(input, kernel, padding);
}

AccumTensor binary_dense(const PackedBitTensor& x, const BinaryKernel& kernel) {
  kernel.validate();
  if (kernel.size != 1) throw ShapeError("binary_dense kernel must be 1x1");
  if (kernel.in_channels != x.size()) {
    throw ShapeError("binary_dense expects " + std::to_string(kernel.in_channels) + " inputs, got " +
                     std::to_string(x.size()));
  }
  AccumTensor out(Dims{1, 1, kernel.out_maps});
  parallel_for(kernel.out_maps, [&](std::size_t m) {
    const std::int64_t dot = popcount_xor_dot(x.words(), kernel.weights[m].words(), x.size());
    out.data[m] = checked_i32(dot + bias_of(kernel.bias, m), "binary_dense");
  });
  return out;
}

AccumTensor int8_conv2d(const ByteTensor& img, const Int8Kernel& k, Padding padding) {
  k.validate();
  const Dims& in = img.dims;
  if (k.in_channels != in.channels) {
    throw ShapeError("int8 kernel expects " + std::to_string(k.in_channels) + " channels, image " +
                     to_string(in));
  }
  const auto g = geometry(in, k.size, padding);
  AccumTensor out(Dims{g.out_h, g.out_w, k.out_maps});
  parallel_for(k.out_maps, [&](std::size_t m) {
    const std::int8_t* wm = &k.weights[m * k.size * k.size * in.channels];
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        std::int64_t acc = bias_of(k.bias, m);
        for (std::size_t ky = 0; ky < k.size; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - g.pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.height)) continue;
          for (std::size_t kx = 0; kx < k.size; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - g.pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.width)) continue;
            const std::uint8_t* px = &img.data[in.offset(static_cast<std::size_t>(iy),
                                                         static_cast<std::size_t>(ix), 0)];
            const std::int8_t* wt = wm + (ky * k.size + kx) * in.channels;
            for (std::size_t c = 0; c < in.channels; ++c) acc += std::int64_t{px[c]} * wt[c];
          }
        }
        out.at(oy, ox, m) = checked_i32(acc, "int8_conv2d");
      }
    }
  });
  return out;
}

namespace testing {
void set_sign_tie_fault(bool enabled) { g_sign_tie_fault.store(enabled); }
bool sign_tie_fault() { return g_sign_tie_fault.load(); }
}  // namespace testing

}  // namespace bpbn
