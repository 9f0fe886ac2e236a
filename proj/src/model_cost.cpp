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

#include "bpbn/model_cost.hpp"

namespace bpbn {

std::vector<LayerCost> layer_costs(const ModelManifest& m) {
  m.validate();
  const auto shapes = m.shapes();
  std::vector<LayerCost> out;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const LayerSpec& l = m.layers[i];
    const Dims in = i == 0 ? m.input : shapes[i - 1].dims;
    const Dims od = shapes[i].dims;
    const std::uint64_t taps = l.kernel * l.kernel;
    std::uint64_t macs = 0;
    switch (l.kind) {
      case LayerKind::kBpieInput:
        // One depthwise kernel per (channel, plane, map).
        macs = od.height * od.width * in.channels * static_cast<std::uint64_t>(l.planes) * l.multiplier * taps;
        break;
      case LayerKind::kBilInput:
        macs = od.height * od.width * od.channels * in.channels * static_cast<std::uint64_t>(l.planes);
        break;
      case LayerKind::kInt8Conv:
      case LayerKind::kBinaryConv:
        macs = od.count() * taps * in.channels;
        break;
      case LayerKind::kBinaryDepthwiseConv:
        macs = od.count() * taps;
        break;
      case LayerKind::kBinaryDense:
      case LayerKind::kSoftmaxHead:
        macs = od.channels * in.count();
        break;
      case LayerKind::kDbidInput:
      case LayerKind::kThermometerInput:
      case LayerKind::kMaxPool2:
      case LayerKind::kSign:
        break;
    }
    out.push_back({l.name, l.kind, l.f1, macs});
  }
  return out;
}

std::uint64_t input_stage_macs(const ModelManifest& m) {
  const auto costs = layer_costs(m);
  std::uint64_t total = costs.front().macs;
  for (std::size_t i = 1; i < costs.size(); ++i) {
    if (costs[i].f1) total += costs[i].macs;
  }
  return total;
}

}  // namespace bpbn
