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

#include "bpbn/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "bpbn/binops.hpp"
#include "bpbn/bitops.hpp"
#include "bpbn/bpie.hpp"
#include "bpbn/encoders.hpp"
#include "bpbn/error.hpp"

namespace bpbn {

std::vector<double> to_real(const AnyTensor& t) {
  std::vector<double> out;
  if (const auto* p = std::get_if<PackedBitTensor>(&t)) {
    out.reserve(p->size());
    for (std::size_t i = 0; i < p->size(); ++i) out.push_back(p->value(i));
  } else if (const auto* b = std::get_if<ByteTensor>(&t)) {
    out.assign(b->data.begin(), b->data.end());
  } else {
    const auto& a = std::get<AccumTensor>(t);
    out.reserve(a.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) out.push_back(a.real(i));
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - top);
  for (double& v : p) v /= sum;
  return p;
}

struct Engine::Prepared {
  BpieWeights bpie;
  BpieConfig bpie_cfg;
  BinaryKernel binary;
  Int8Kernel int8;
  std::vector<FixedAffine> fixed;       // affine applied in Q16.16
  std::vector<BnThreshold> thresholds;  // affine folded into the following sign
  std::vector<FloatAffine> head_affine;
};

namespace {

const AnyTensor& blob_tensor(const ModelManifest& m, const std::string& name) {
  return m.find_blob(name)->tensor;
}

std::vector<std::int32_t> bias_values(const ModelManifest& m, const LayerSpec& l) {
  if (l.bias.empty()) return {};
  return std::get<AccumTensor>(blob_tensor(m, l.bias)).data;
}

BinaryKernel kernel_from_blob(const ModelManifest& m, const LayerSpec& l, std::size_t size) {
  return BinaryKernel::from_packed(size, std::get<PackedBitTensor>(blob_tensor(m, l.weights)), bias_values(m, l));
}

void prepare_affine(const LayerSpec& l, bool next_is_sign, std::vector<BnThreshold>& thresholds,
                    std::vector<FixedAffine>& fixed) {
  if (l.affine.empty()) return;
  if (next_is_sign) {
    for (const auto& a : l.affine) thresholds.push_back(fold_bn_to_threshold(a));
  } else {
    for (const auto& a : l.affine) fixed.push_back(FixedAffine::from_float(a));
  }
}

struct Activation {
  AnyTensor value;
  const std::vector<BnThreshold>* pending = nullptr;
};

AccumTensor finish_affine(AccumTensor x, const std::vector<FixedAffine>& fixed) {
  if (fixed.empty()) return x;
  return affine_fixed(x, fixed);
}

}  // namespace

Engine::Engine(ModelManifest model) : model_(std::move(model)) {
  model_.validate();
  const auto shapes = model_.shapes();
  for (std::size_t i = 0; i < model_.layers.size(); ++i) {
    const LayerSpec& l = model_.layers[i];
    const Dims in = i == 0 ? model_.input : shapes[i - 1].dims;
    const bool next_is_sign = i + 1 < model_.layers.size() && model_.layers[i + 1].kind == LayerKind::kSign;
    auto p = std::make_unique<Prepared>();
    switch (l.kind) {
      case LayerKind::kBpieInput: {
        p->bpie_cfg = {l.planes, l.multiplier, l.padding, AffineMode::kFixed,
                       l.fused_output == FusedOutputKind::kAccum ? FuseOutput::kAccum : FuseOutput::kSignBits};
        const BinaryKernel all = kernel_from_blob(model_, l, l.kernel);
        std::vector<BinaryKernel> per_plane;
        const std::size_t n = l.multiplier;
        for (std::size_t s = 0; s * n < all.out_maps; ++s) {
          BinaryKernel k{l.kernel, 1, n, {}, {}};
          k.weights.assign(all.weights.begin() + static_cast<std::ptrdiff_t>(s * n),
                           all.weights.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
          if (!all.bias.empty()) {
            k.bias.assign(all.bias.begin() + static_cast<std::ptrdiff_t>(s * n),
                          all.bias.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
          }
          per_plane.push_back(std::move(k));
        }
        p->bpie = BpieWeights::make(std::move(per_plane), l.affine);
        p->bpie.validate(in.channels, p->bpie_cfg);
        break;
      }
      case LayerKind::kBilInput:
        p->binary = kernel_from_blob(model_, l, 1);
        for (const auto& a : l.affine) p->fixed.push_back(FixedAffine::from_float(a));
        break;
      case LayerKind::kInt8Conv: {
        const auto& w = std::get<AccumTensor>(blob_tensor(model_, l.weights));
        p->int8 = {l.kernel, in.channels, l.maps, {}, bias_values(model_, l)};
        p->int8.weights.reserve(w.data.size());
        for (std::int32_t v : w.data) p->int8.weights.push_back(static_cast<std::int8_t>(v));
        prepare_affine(l, next_is_sign, p->thresholds, p->fixed);
        break;
      }
      case LayerKind::kBinaryConv:
      case LayerKind::kBinaryDepthwiseConv:
        p->binary = kernel_from_blob(model_, l, l.kernel);
        prepare_affine(l, next_is_sign, p->thresholds, p->fixed);
        break;
      case LayerKind::kBinaryDense:
        p->binary = kernel_from_blob(model_, l, 1);
        prepare_affine(l, next_is_sign, p->thresholds, p->fixed);
        break;
      case LayerKind::kSoftmaxHead:
        p->binary = kernel_from_blob(model_, l, 1);
        p->head_affine = l.affine;
        break;
      case LayerKind::kDbidInput:
      case LayerKind::kThermometerInput:
      case LayerKind::kMaxPool2:
      case LayerKind::kSign:
        break;
    }
    prepared_.push_back(std::move(p));
  }
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

InferenceResult Engine::run(const ByteTensor& img, bool trace) const {
  if (img.dims != model_.input) {
    throw ShapeError("image " + to_string(img.dims) + " does not match model input " + to_string(model_.input));
  }
  InferenceResult result;
  Activation act{img, nullptr};
  for (std::size_t i = 0; i < model_.layers.size(); ++i) {
    const LayerSpec& l = model_.layers[i];
    const Prepared& p = *prepared_[i];
    Activation next;
    switch (l.kind) {
      case LayerKind::kBpieInput:
        next.value = std::visit([](auto&& v) -> AnyTensor { return std::move(v); },
                                bpie_forward(std::get<ByteTensor>(act.value), p.bpie, p.bpie_cfg));
        break;
      case LayerKind::kDbidInput:
        next.value = encode_dbid(std::get<ByteTensor>(act.value), l.planes);
        break;
      case LayerKind::kThermometerInput:
        next.value = encode_thermometer(std::get<ByteTensor>(act.value), l.expansion);
        break;
      case LayerKind::kBilInput:
        next.value = encode_bil(std::get<ByteTensor>(act.value), l.planes, p.binary, p.fixed);
        break;
      case LayerKind::kInt8Conv:
        next.value = int8_conv2d(std::get<ByteTensor>(act.value), p.int8, l.padding);
        break;
      case LayerKind::kBinaryConv:
      case LayerKind::kBinaryDepthwiseConv:
        next.value = finish_affine(binary_conv2d(std::get<PackedBitTensor>(act.value), p.binary, l.padding,
                                                 l.kind == LayerKind::kBinaryDepthwiseConv),
                                   p.fixed);
        break;
      case LayerKind::kBinaryDense:
        next.value = finish_affine(binary_dense(std::get<PackedBitTensor>(act.value), p.binary), p.fixed);
        break;
      case LayerKind::kMaxPool2:
        next.value = std::visit(
            [](const auto& v) -> AnyTensor {
              if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ByteTensor>) {
                throw ShapeError("maxpool2 on raw bytes");
              } else {
                return maxpool2(v);
              }
            },
            act.value);
        break;
      case LayerKind::kSign: {
        const auto& x = std::get<AccumTensor>(act.value);
        if (act.pending != nullptr) {
          PackedBitTensor bits(x.dims);
          const std::size_t c = x.dims.channels;
          for (std::size_t e = 0; e < x.data.size(); ++e) {
            if ((*act.pending)[e % c].apply(x.data[e]) < 0) bits.set_bit(e, true);
          }
          next.value = std::move(bits);
        } else {
          next.value = sign_to_bits(x);
        }
        break;
      }
      case LayerKind::kSoftmaxHead: {
        const std::size_t units = p.binary.out_maps;
        result.logits.resize(units);
        for (std::size_t u = 0; u < units; ++u) {
          double dot = 0.0;
          if (const auto* bits = std::get_if<PackedBitTensor>(&act.value)) {
            dot = static_cast<double>(popcount_xor_dot(bits->words(), p.binary.weights[u].words(), bits->size()));
          } else {
            const auto& x = std::get<AccumTensor>(act.value);
            std::int64_t acc = 0;
            for (std::size_t e = 0; e < x.data.size(); ++e) {
              acc += p.binary.weights[u].bit(e) ? -std::int64_t{x.data[e]} : std::int64_t{x.data[e]};
            }
            dot = static_cast<double>(acc) / static_cast<double>(std::int64_t{1} << x.frac_bits);
          }
          result.logits[u] = p.head_affine.empty() ? dot : p.head_affine[u].apply(dot);
        }
        break;
      }
    }
    if (!p.thresholds.empty()) next.pending = &p.thresholds;
    // The head's output is the logits vector itself.
    if (trace && l.kind != LayerKind::kSoftmaxHead) result.trace.push_back({l.name, l.kind, next.value});
    act = std::move(next);
  }
  result.probabilities = softmax(result.logits);
  return result;
}

InferenceResult run_inference(const ModelManifest& m, const ByteTensor& img, ExecPath path, bool trace) {
  if (path == ExecPath::kProduction) return Engine(m).run(img, trace);
  ReferenceResult ref = reference_forward(m, img);
  InferenceResult r;
  r.logits = std::move(ref.logits);
  r.probabilities = softmax(r.logits);
  if (trace) r.reference_trace = std::move(ref.trace);
  return r;
}

}  // namespace bpbn
