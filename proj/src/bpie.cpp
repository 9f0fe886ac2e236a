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

#include "bpbn/bpie.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "bpbn/error.hpp"
#include "bpbn/parallel.hpp"

namespace bpbn {

namespace {
constexpr std::int64_t kReweightLimit = std::int64_t{1} << 24;
}

void BpieConfig::validate() const {
  if (planes < 1 || planes > kPixelBits) {
    throw ValueError("plane count must be in [1, 8], got " + std::to_string(planes));
  }
  if (multiplier < 1) throw ValueError("depth multiplier must be >= 1");
}

BpieWeights BpieWeights::make(std::vector<BinaryKernel> kernels, std::vector<FloatAffine> affine) {
  BpieWeights w{std::move(kernels), std::move(affine), {}};
  w.fixed_affine.reserve(w.float_affine.size());
  for (const auto& p : w.float_affine) w.fixed_affine.push_back(FixedAffine::from_float(p));
  return w;
}

void BpieWeights::validate(std::size_t channels, const BpieConfig& cfg) const {
  const std::size_t planes = channels * static_cast<std::size_t>(cfg.planes);
  if (kernels.size() != planes) {
    throw ShapeError("bit-plane block needs " + std::to_string(planes) + " kernels, has " +
                     std::to_string(kernels.size()));
  }
  for (const auto& k : kernels) {
    k.validate();
    if (k.in_channels != 1 || k.out_maps != cfg.multiplier) {
      throw ShapeError("bit-plane kernel must be (F, F, 1, " + std::to_string(cfg.multiplier) + ")");
    }
  }
  const std::size_t maps = planes * cfg.multiplier;
  if (float_affine.size() != maps || fixed_affine.size() != maps) {
    throw ShapeError("bit-plane block needs " + std::to_string(maps) + " affine entries");
  }
}

std::vector<AccumTensor> feature_extract(const BitPlaneStack& stack, const BpieWeights& w,
                                         const BpieConfig& cfg) {
  cfg.validate();
  if (stack.plane_count() != static_cast<std::size_t>(cfg.planes)) {
    throw ShapeError("stack has " + std::to_string(stack.plane_count()) + " planes, config " +
                     std::to_string(cfg.planes));
  }
  w.validate(stack.source_dims.channels, cfg);
  const std::size_t n = cfg.multiplier;
  std::vector<AccumTensor> out(stack.planes.size());
  for (std::size_t s = 0; s < stack.planes.size(); ++s) {
    const AccumTensor conv = binary_conv2d(stack.planes[s], w.kernels[s], cfg.padding, true);
    if (cfg.affine_mode == AffineMode::kFixed) {
      out[s] = affine_fixed(conv, std::span(w.fixed_affine).subspan(s * n, n));
      continue;
    }
    AccumTensor fe(conv.dims, kQ16);
    for (std::size_t i = 0; i < conv.data.size(); ++i) {
      const double y = w.float_affine[s * n + i % n].apply(conv.data[i]) * static_cast<double>(kQ16One);
      if (!(std::abs(y) < 2147483647.0)) throw OverflowError("float affine result exceeds Q16.16 range");
      fe.data[i] = static_cast<std::int32_t>(std::llround(y));
    }
    out[s] = std::move(fe);
  }
  return out;
}

AccumTensor reweight(const AccumTensor& fe, int bit_position) {
  if (bit_position < 0 || bit_position >= kPixelBits) {
    throw ValueError("bit position must be in [0, 7], got " + std::to_string(bit_position));
  }
  AccumTensor out(fe.dims, fe.frac_bits);
  for (std::size_t i = 0; i < fe.data.size(); ++i) {
    const std::int32_t v = fe.data[i];
    if (std::abs(static_cast<std::int64_t>(v)) >= kReweightLimit) {
      throw ValueError("reweight input " + std::to_string(v) + " leaves no shift headroom");
    }
    out.data[i] = v << bit_position;
  }
  return out;
}

BpieOutput fuse(const std::vector<AccumTensor>& reweighted, std::size_t channels, const BpieConfig& cfg) {
  cfg.validate();
  const auto planes = static_cast<std::size_t>(cfg.planes);
  if (channels == 0 || reweighted.size() != channels * planes) {
    throw ShapeError("fuse expects " + std::to_string(channels * planes) + " plane stacks, got " +
                     std::to_string(reweighted.size()));
  }
  const Dims& md = reweighted.front().dims;
  const int frac = reweighted.front().frac_bits;
  for (const auto& r : reweighted) {
    if (r.dims != md || r.frac_bits != frac) throw ShapeError("fuse inputs disagree in shape");
  }
  const std::size_t n = md.channels;
  const Dims od{md.height, md.width, channels * n};
  AccumTensor out(od, frac);
  const std::size_t pixels = md.height * md.width;
  parallel_for(channels, [&](std::size_t c) {
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t k = 0; k < n; ++k) {
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < planes; ++i) acc += reweighted[c * planes + i].data[p * n + k];
        if (acc < std::numeric_limits<std::int32_t>::min() || acc > std::numeric_limits<std::int32_t>::max()) {
          throw OverflowError("fused value " + std::to_string(acc) + " exceeds int32");
        }
        out.data[p * od.channels + c * n + k] = static_cast<std::int32_t>(acc);
      }
    }
  });
  if (cfg.fuse_output == FuseOutput::kSignBits) return sign_to_bits(out);
  return out;
}

BpieOutput bpie_forward(const ByteTensor& img, const BpieWeights& w, const BpieConfig& cfg) {
  cfg.validate();
  const BitPlaneStack stack = bit_rearrange(img, cfg.planes);
  std::vector<AccumTensor> fe = feature_extract(stack, w, cfg);
  for (std::size_t s = 0; s < fe.size(); ++s) {
    fe[s] = reweight(fe[s], stack.bit_positions[s % stack.plane_count()]);
  }
  return fuse(fe, img.dims.channels, cfg);
}

}  // namespace bpbn
