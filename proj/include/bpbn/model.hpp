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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpbn/error.hpp"
#include "bpbn/layer_params.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn {

enum class LayerKind {
  kBpieInput,
  kDbidInput,
  kBilInput,
  kThermometerInput,
  kInt8Conv,
  kBinaryConv,
  kBinaryDepthwiseConv,
  kMaxPool2,
  kSign,
  kBinaryDense,
  kSoftmaxHead,
};

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view s);

bool is_input_kind(LayerKind kind);

enum class FirstLayerMode { kWithF1, kSkipF1 };
std::string_view to_string(FirstLayerMode mode);

enum class FusedOutputKind { kAccum, kSignBits };

// One entry of the layer list. Which fields are meaningful depends on kind:
//   bpie-input          planes, multiplier, kernel, padding, fused_output,
//                       weights (C*P*N, F*F, 1), bias?, affine[C*P*N]
//   dbid-input          planes
//   thermometer-input   expansion
//   bil-input           planes, expansion, weights (K, 1, C*P), affine[K]
//   int8-conv           kernel, maps, padding, weights i32 (maps, F*F, C),
//                       bias?, affine? (must then be followed by sign)
//   binary-conv         kernel, maps, padding, weights (maps, F*F, C), bias?, affine?
//   binary-depthwise-conv kernel, multiplier, padding, weights (C*mult, F*F, 1), bias?, affine?
//   binary-dense        maps, weights (maps, 1, inputs), bias?, affine?
//   softmax-head        maps, weights (maps, 1, inputs), affine?
//   maxpool2, sign      no parameters
struct LayerSpec {
  LayerKind kind = LayerKind::kSign;
  std::string name;
  bool f1 = false;

  int planes = 0;
  int expansion = 0;
  std::size_t kernel = 1;
  std::size_t maps = 0;
  std::size_t multiplier = 0;
  Padding padding = Padding::kSame;
  FusedOutputKind fused_output = FusedOutputKind::kAccum;

  std::string weights;
  std::string bias;
  std::vector<FloatAffine> affine;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class ActivationKind { kBytes, kBits, kValues, kLogits };

// Shape of what a layer hands to the next one.
struct ActivationShape {
  Dims dims{};
  ActivationKind kind = ActivationKind::kBytes;
};

struct Blob {
  std::string name;
  std::vector<std::uint8_t> bytes;  // tensor file image
  AnyTensor tensor;
};

enum class ModelErrorCode { kIo, kBadMagic, kVersion, kMalformed, kMissingBlob, kShape, kDigest };

std::string_view to_string(ModelErrorCode code);

class ModelError : public Error {
 public:
  ModelError(ModelErrorCode code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ModelErrorCode code() const { return code_; }

 private:
  ModelErrorCode code_;
};

inline constexpr std::uint16_t kModelVersion = 1;

class ModelManifest {
 public:
  std::string name;
  Dims input{};
  FirstLayerMode first_layer_mode = FirstLayerMode::kSkipF1;
  std::vector<LayerSpec> layers;

  // Blobs keep insertion order, which is also their order in the file.
  void add_blob(std::string blob_name, AnyTensor tensor);
  const Blob* find_blob(std::string_view blob_name) const;
  const std::vector<Blob>& blobs() const { return blobs_; }

  // Checks blob references, blob shapes and the shape chain. Throws
  // ModelError with kMissingBlob or kShape.
  void validate() const;

  // Output shape of every layer, in order. Assumes validate() passed.
  std::vector<ActivationShape> shapes() const;

  // Index of the layer tagged as F1, if any.
  std::optional<std::size_t> f1_layer() const;

 private:
  std::vector<Blob> blobs_;
};

// Container: "BPBN", u16 version, u32 metadata length, UTF-8 JSON
// metadata, then the blobs back to back. Integers are little-endian.
std::vector<std::uint8_t> serialize_model(const ModelManifest& m);
ModelManifest parse_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelManifest& m, const std::filesystem::path& path);
ModelManifest load_model(const std::filesystem::path& path);

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace bpbn
