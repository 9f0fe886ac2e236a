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

#include "bpbn/model_zoo.hpp"

#include <string>
#include <vector>

#include "bpbn/binops.hpp"
#include "bpbn/bitops.hpp"

namespace bpbn::zoo {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

PackedBitTensor random_bits(Dims d, std::mt19937_64& rng) {
  std::vector<std::int8_t> v(d.count());
  for (auto& x : v) x = (rng() & 1u) != 0 ? -1 : 1;
  return pack_bipolar(d, v);
}

FloatAffine random_affine(std::mt19937_64& rng, double mu_range) {
  const double sign = (rng() & 1u) != 0 ? -1.0 : 1.0;
  return {sign * uniform(rng, 0.2, 2.0), uniform(rng, -mu_range, mu_range), uniform(rng, 0.5, 2.0),
          uniform(rng, -2.0, 2.0)};
}

std::vector<FloatAffine> random_affines(std::mt19937_64& rng, std::size_t n, double mu_range) {
  std::vector<FloatAffine> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_affine(rng, mu_range));
  return out;
}

LayerSpec layer(LayerKind kind, std::string name) {
  LayerSpec l;
  l.kind = kind;
  l.name = std::move(name);
  return l;
}

}  // namespace

ByteTensor random_image(Dims dims, std::mt19937_64& rng) {
  ByteTensor img(dims);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xffu);
  return img;
}

ModelManifest stub_bpie_model(Dims input) {
  ModelManifest m;
  m.name = "bpie-identity-stub";
  m.input = input;
  m.first_layer_mode = FirstLayerMode::kSkipF1;

  const std::size_t maps = input.channels * 8;
  PackedBitTensor w(Dims{maps, 1, 1});
  for (std::size_t i = 0; i < maps; ++i) w.set_bit(i, true);
  m.add_blob("bpie.w", w);
  LayerSpec bpie = layer(LayerKind::kBpieInput, "bpie");
  bpie.planes = 8;
  bpie.multiplier = 1;
  bpie.kernel = 1;
  bpie.weights = "bpie.w";
  bpie.affine.assign(maps, FloatAffine{});
  m.layers.push_back(bpie);

  m.add_blob("head.w", PackedBitTensor(Dims{1, 1, input.count()}));
  LayerSpec head = layer(LayerKind::kSoftmaxHead, "head");
  head.maps = 1;
  head.weights = "head.w";
  m.layers.push_back(head);
  m.validate();
  return m;
}

ModelManifest baseline_first_layer_model(Dims input, std::size_t kernel, std::size_t filters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelManifest m;
  m.name = "baseline-first-layer";
  m.input = input;
  m.first_layer_mode = FirstLayerMode::kWithF1;
  AccumTensor w(Dims{filters, kernel * kernel, input.channels});
  for (auto& v : w.data) v = static_cast<std::int32_t>(pick(rng, 256)) - 128;
  m.add_blob("f1.w", w);
  LayerSpec f1 = layer(LayerKind::kInt8Conv, "f1");
  f1.f1 = true;
  f1.kernel = kernel;
  f1.maps = filters;
  f1.weights = "f1.w";
  m.layers.push_back(f1);
  m.add_blob("head.w", random_bits(Dims{1, 1, input.height * input.width * filters}, rng));
  LayerSpec head = layer(LayerKind::kSoftmaxHead, "head");
  head.maps = 1;
  head.weights = "head.w";
  m.layers.push_back(head);
  m.validate();
  return m;
}

ModelManifest bitplane_first_layer_model(Dims input, int planes, std::size_t multiplier, std::size_t kernel,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelManifest m;
  m.name = "bitplane-first-layer";
  m.input = input;
  m.first_layer_mode = FirstLayerMode::kSkipF1;
  const std::size_t maps = input.channels * static_cast<std::size_t>(planes) * multiplier;
  m.add_blob("bpie.w", random_bits(Dims{maps, kernel * kernel, 1}, rng));
  LayerSpec bpie = layer(LayerKind::kBpieInput, "bpie");
  bpie.planes = planes;
  bpie.multiplier = multiplier;
  bpie.kernel = kernel;
  bpie.weights = "bpie.w";
  bpie.fused_output = FusedOutputKind::kSignBits;
  bpie.affine = random_affines(rng, maps, 3.0);
  m.layers.push_back(bpie);
  m.add_blob("head.w", random_bits(Dims{1, 1, input.height * input.width * input.channels * multiplier}, rng));
  LayerSpec head = layer(LayerKind::kSoftmaxHead, "head");
  head.maps = 1;
  head.weights = "head.w";
  m.layers.push_back(head);
  m.validate();
  return m;
}

ModelManifest random_model(std::uint64_t seed, const RandomModelOptions& options) {
  std::mt19937_64 rng(seed);
  ModelManifest m;
  m.name = "random-" + std::to_string(seed);
  m.input = options.input;
  const Dims in = options.input;

  InputChoice enc = options.encoder;
  if (enc == InputChoice::kAny) enc = static_cast<InputChoice>(1 + pick(rng, 5));

  std::size_t channels = 0;
  bool with_f1 = (rng() & 1u) != 0;
  switch (enc) {
    case InputChoice::kBpie: {
      LayerSpec l = layer(LayerKind::kBpieInput, "input");
      l.planes = (rng() & 1u) != 0 ? 8 : 4;
      l.multiplier = 1 + pick(rng, 2);
      l.kernel = 3;
      l.fused_output = (rng() & 1u) != 0 ? FusedOutputKind::kSignBits : FusedOutputKind::kAccum;
      const std::size_t maps = in.channels * static_cast<std::size_t>(l.planes) * l.multiplier;
      m.add_blob("input.w", random_bits(Dims{maps, 9, 1}, rng));
      l.weights = "input.w";
      l.affine = random_affines(rng, maps, 3.0);
      m.layers.push_back(l);
      if (l.fused_output == FusedOutputKind::kAccum) m.layers.push_back(layer(LayerKind::kSign, "input.sign"));
      channels = in.channels * l.multiplier;
      break;
    }
    case InputChoice::kDbid: {
      LayerSpec l = layer(LayerKind::kDbidInput, "input");
      l.planes = (rng() & 1u) != 0 ? 8 : 4;
      m.layers.push_back(l);
      channels = in.channels * static_cast<std::size_t>(l.planes);
      break;
    }
    case InputChoice::kThermometer: {
      LayerSpec l = layer(LayerKind::kThermometerInput, "input");
      l.expansion = (rng() & 1u) != 0 ? 16 : 8;
      m.layers.push_back(l);
      channels = in.channels * static_cast<std::size_t>(l.expansion);
      break;
    }
    case InputChoice::kBil: {
      LayerSpec l = layer(LayerKind::kBilInput, "input");
      l.planes = 8;
      l.expansion = 16;
      m.add_blob("input.w", random_bits(Dims{16, 1, in.channels * 8}, rng));
      l.weights = "input.w";
      l.affine = random_affines(rng, 16, 4.0);
      m.layers.push_back(l);
      channels = 16;
      break;
    }
    case InputChoice::kInt8:
    case InputChoice::kAny: {
      LayerSpec l = layer(LayerKind::kInt8Conv, "input");
      l.f1 = true;
      l.kernel = 3;
      l.maps = 8;
      AccumTensor w(Dims{8, 9, in.channels});
      for (auto& v : w.data) v = static_cast<std::int32_t>(pick(rng, 256)) - 128;
      m.add_blob("input.w", w);
      l.weights = "input.w";
      l.affine = random_affines(rng, 8, 3000.0);
      for (auto& a : l.affine) a.sigma *= 1000.0;
      m.layers.push_back(l);
      m.layers.push_back(layer(LayerKind::kSign, "input.sign"));
      channels = 8;
      with_f1 = true;
      break;
    }
  }
  m.first_layer_mode = with_f1 ? FirstLayerMode::kWithF1 : FirstLayerMode::kSkipF1;

  auto conv_block = [&](const std::string& name, bool f1) {
    LayerSpec l = layer(LayerKind::kBinaryConv, name);
    l.f1 = f1;
    l.kernel = 3;
    l.maps = 8;
    m.add_blob(name + ".w", random_bits(Dims{8, 9, channels}, rng));
    l.weights = name + ".w";
    l.affine = random_affines(rng, 8, 6.0);
    m.layers.push_back(l);
    m.layers.push_back(layer(LayerKind::kSign, name + ".sign"));
    channels = 8;
  };
  if (with_f1 && enc != InputChoice::kInt8) conv_block("f1", true);
  m.layers.push_back(layer(LayerKind::kMaxPool2, "pool1"));
  conv_block("conv2", false);

  const std::size_t flat = (in.height / 2) * (in.width / 2) * channels;
  LayerSpec dense = layer(LayerKind::kBinaryDense, "fc1");
  dense.maps = 16;
  m.add_blob("fc1.w", random_bits(Dims{16, 1, flat}, rng));
  dense.weights = "fc1.w";
  dense.affine = random_affines(rng, 16, 8.0);
  m.layers.push_back(dense);
  m.layers.push_back(layer(LayerKind::kSign, "fc1.sign"));

  LayerSpec head = layer(LayerKind::kSoftmaxHead, "head");
  head.maps = options.classes;
  m.add_blob("head.w", random_bits(Dims{options.classes, 1, 16}, rng));
  head.weights = "head.w";
  for (std::size_t u = 0; u < options.classes; ++u) {
    head.affine.push_back({uniform(rng, 0.05, 0.5), 0.0, 1.0, uniform(rng, -0.5, 0.5)});
  }
  m.layers.push_back(head);
  m.validate();
  return m;
}

}  // namespace bpbn::zoo
