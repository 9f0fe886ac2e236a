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

// Float interpreter used as the correctness oracle for the production
// engine. It deliberately avoids every packed kernel: weights and inputs are
// expanded to doubles and each layer is the textbook loop.

#include "bpbn/reference.hpp"

#include <algorithm>
#include <cmath>

namespace bpbn {

namespace {

struct Map {
  Dims dims{};
  std::vector<double> v;

  double at(std::size_t h, std::size_t w, std::size_t c) const { return v[dims.offset(h, w, c)]; }
};

// +-1 view of a packed blob, read straight from the words.
std::vector<double> bipolar(const PackedBitTensor& t) {
  const auto words = t.words();
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ((words[i / 64] >> (i % 64)) & 1u) ? -1.0 : 1.0;
  return out;
}

std::vector<double> blob_bipolar(const ModelManifest& m, const std::string& name) {
  return bipolar(std::get<PackedBitTensor>(m.find_blob(name)->tensor));
}

std::vector<double> blob_ints(const ModelManifest& m, const std::string& name, std::size_t n) {
  if (name.empty()) return std::vector<double>(n, 0.0);
  const auto& data = std::get<AccumTensor>(m.find_blob(name)->tensor).data;
  return {data.begin(), data.end()};
}

double bn(const FloatAffine& p, double x) { return p.gamma * (x - p.mu) / p.sigma + p.beta; }

double sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Convolution over `in` with weights laid out (map, ky, kx, c_in).
// Out-of-image taps read `pad_value`. Depthwise maps read channel
// m / (maps / C) with a single-channel kernel.
Map conv(const Map& in, const std::vector<double>& w, const std::vector<double>& bias, std::size_t size,
         std::size_t maps, Padding padding, bool depthwise, double pad_value, std::uint64_t& macs) {
  const std::size_t pad = padding == Padding::kSame ? size / 2 : 0;
  const std::size_t oh = padding == Padding::kSame ? in.dims.height : in.dims.height - size + 1;
  const std::size_t ow = padding == Padding::kSame ? in.dims.width : in.dims.width - size + 1;
  const std::size_t cin = depthwise ? 1 : in.dims.channels;
  const std::size_t mult = depthwise ? maps / in.dims.channels : 1;
  Map out{{oh, ow, maps}, std::vector<double>(oh * ow * maps)};
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      for (std::size_t m = 0; m < maps; ++m) {
        double acc = bias[m];
        for (std::size_t ky = 0; ky < size; ++ky) {
          for (std::size_t kx = 0; kx < size; ++kx) {
            const long iy = static_cast<long>(y + ky) - static_cast<long>(pad);
            const long ix = static_cast<long>(x + kx) - static_cast<long>(pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(in.dims.height) &&
                                ix < static_cast<long>(in.dims.width);
            for (std::size_t c = 0; c < cin; ++c) {
              const std::size_t src_c = depthwise ? m / mult : c;
              const double a = inside ? in.at(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix), src_c) : pad_value;
              acc += a * w[((m * size + ky) * size + kx) * cin + c];
              ++macs;
            }
          }
        }
        out.v[out.dims.offset(y, x, m)] = acc;
      }
    }
  }
  return out;
}

Map bit_planes(const Map& img, int planes) {
  const auto p = static_cast<std::size_t>(planes);
  Map out{{img.dims.height, img.dims.width, img.dims.channels * p}, {}};
  for (double px : img.v) {
    const auto value = static_cast<unsigned>(px);
    for (std::size_t i = 0; i < p; ++i) {
      const unsigned bit = 8 - p + i;
      out.v.push_back(((value >> bit) & 1u) ? -1.0 : 1.0);
    }
  }
  return out;
}

}  // namespace

ReferenceResult reference_forward(const ModelManifest& m, const ByteTensor& img) {
  if (img.dims != m.input) {
    throw ShapeError("image " + to_string(img.dims) + " does not match model input " + to_string(m.input));
  }
  m.validate();
  ReferenceResult result;
  Map cur{img.dims, std::vector<double>(img.data.begin(), img.data.end())};
  const std::vector<FloatAffine>* pending = nullptr;

  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const LayerSpec& l = m.layers[li];
    const bool next_is_sign = li + 1 < m.layers.size() && m.layers[li + 1].kind == LayerKind::kSign;
    std::uint64_t macs = 0;
    Map next;
    const std::vector<FloatAffine>* next_pending = nullptr;

    // Conv/dense outputs: batch norm now, or leave it to the sign layer.
    auto apply_affine = [&](Map& x) {
      if (l.affine.empty()) return;
      if (next_is_sign) {
        next_pending = &l.affine;
        return;
      }
      for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] = bn(l.affine[i % x.dims.channels], x.v[i]);
    };

    switch (l.kind) {
      case LayerKind::kBpieInput: {
        const std::size_t c_count = cur.dims.channels;
        const auto planes = static_cast<std::size_t>(l.planes);
        const std::size_t n = l.multiplier;
        const auto w = blob_bipolar(m, l.weights);
        const auto bias = blob_ints(m, l.bias, c_count * planes * n);
        const std::size_t taps = l.kernel * l.kernel;
        std::vector<double> fused;
        Dims fd{};
        for (std::size_t c = 0; c < c_count; ++c) {
          for (std::size_t i = 0; i < planes; ++i) {
            const int bit = 8 - l.planes + static_cast<int>(i);
            Map plane{{cur.dims.height, cur.dims.width, 1}, {}};
            for (std::size_t p = 0; p < cur.dims.height * cur.dims.width; ++p) {
              const auto value = static_cast<unsigned>(cur.v[p * c_count + c]);
              plane.v.push_back(((value >> bit) & 1u) ? -1.0 : 1.0);
            }
            const std::size_t first = (c * planes + i) * n;
            const std::vector<double> wk(w.begin() + static_cast<long>(first * taps),
                                         w.begin() + static_cast<long>((first + n) * taps));
            const std::vector<double> bk(bias.begin() + static_cast<long>(first),
                                         bias.begin() + static_cast<long>(first + n));
            const Map fe = conv(plane, wk, bk, l.kernel, n, l.padding, true, 1.0, macs);
            if (fused.empty()) {
              fd = {fe.dims.height, fe.dims.width, c_count * n};
              fused.assign(fd.count(), 0.0);
            }
            for (std::size_t p = 0; p < fe.dims.height * fe.dims.width; ++p) {
              for (std::size_t k = 0; k < n; ++k) {
                fused[p * fd.channels + c * n + k] += bn(l.affine[first + k], fe.v[p * n + k]) * std::ldexp(1.0, bit);
              }
            }
          }
        }
        next = {fd, std::move(fused)};
        if (l.fused_output == FusedOutputKind::kSignBits) {
          for (double& v : next.v) v = sgn(v);
        }
        break;
      }
      case LayerKind::kDbidInput:
        next = bit_planes(cur, l.planes);
        break;
      case LayerKind::kThermometerInput: {
        const auto k = static_cast<std::size_t>(l.expansion);
        next = {{cur.dims.height, cur.dims.width, cur.dims.channels * k}, {}};
        for (double px : cur.v) {
          for (std::size_t j = 0; j < k; ++j) {
            const double t = std::ceil(static_cast<double>((j + 1) * 256) / static_cast<double>(k + 1));
            next.v.push_back(px >= t ? -1.0 : 1.0);
          }
        }
        break;
      }
      case LayerKind::kBilInput: {
        const Map unpacked = bit_planes(cur, l.planes);
        const auto k = static_cast<std::size_t>(l.expansion);
        next = conv(unpacked, blob_bipolar(m, l.weights), std::vector<double>(k, 0.0), 1, k, Padding::kSame,
                    false, 1.0, macs);
        for (std::size_t i = 0; i < next.v.size(); ++i) next.v[i] = sgn(bn(l.affine[i % k], next.v[i]));
        break;
      }
      case LayerKind::kInt8Conv: {
        const auto& wt = std::get<AccumTensor>(m.find_blob(l.weights)->tensor).data;
        const std::vector<double> w(wt.begin(), wt.end());
        next = conv(cur, w, blob_ints(m, l.bias, l.maps), l.kernel, l.maps, l.padding, false, 0.0, macs);
        apply_affine(next);
        break;
      }
      case LayerKind::kBinaryConv:
      case LayerKind::kBinaryDepthwiseConv: {
        const bool dw = l.kind == LayerKind::kBinaryDepthwiseConv;
        const std::size_t maps = dw ? cur.dims.channels * l.multiplier : l.maps;
        next = conv(cur, blob_bipolar(m, l.weights), blob_ints(m, l.bias, maps), l.kernel, maps, l.padding, dw,
                    1.0, macs);
        apply_affine(next);
        break;
      }
      case LayerKind::kMaxPool2: {
        const Dims od{cur.dims.height / 2, cur.dims.width / 2, cur.dims.channels};
        next = {od, std::vector<double>(od.count())};
        for (std::size_t y = 0; y < od.height; ++y) {
          for (std::size_t x = 0; x < od.width; ++x) {
            for (std::size_t c = 0; c < od.channels; ++c) {
              next.v[od.offset(y, x, c)] = std::max({cur.at(2 * y, 2 * x, c), cur.at(2 * y, 2 * x + 1, c),
                                                     cur.at(2 * y + 1, 2 * x, c), cur.at(2 * y + 1, 2 * x + 1, c)});
            }
          }
        }
        break;
      }
      case LayerKind::kSign: {
        next = cur;
        for (std::size_t i = 0; i < next.v.size(); ++i) {
          const double x = pending ? bn((*pending)[i % cur.dims.channels], next.v[i]) : next.v[i];
          next.v[i] = sgn(x);
        }
        break;
      }
      case LayerKind::kBinaryDense:
      case LayerKind::kSoftmaxHead: {
        const auto w = blob_bipolar(m, l.weights);
        const auto bias = blob_ints(m, l.bias, l.maps);
        const std::size_t n_in = cur.v.size();
        next = {{1, 1, l.maps}, std::vector<double>(l.maps)};
        for (std::size_t u = 0; u < l.maps; ++u) {
          double acc = bias[u];
          for (std::size_t i = 0; i < n_in; ++i) {
            acc += w[u * n_in + i] * cur.v[i];
            ++macs;
          }
          next.v[u] = acc;
        }
        if (l.kind == LayerKind::kSoftmaxHead) {
          if (!l.affine.empty()) {
            for (std::size_t u = 0; u < l.maps; ++u) next.v[u] = bn(l.affine[u], next.v[u]);
          }
          result.logits = next.v;
        } else {
          apply_affine(next);
        }
        break;
      }
    }
    result.trace.push_back({l.name, l.kind, next.dims, next.v, macs});
    cur = std::move(next);
    pending = next_pending;
  }
  return result;
}

}  // namespace bpbn
