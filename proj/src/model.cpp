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

#include "bpbn/model.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace bpbn {

using nlohmann::json;

namespace {

struct KindName {
  LayerKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 11> kKindNames{{
    {LayerKind::kBpieInput, "bpie-input"},
    {LayerKind::kDbidInput, "dbid-input"},
    {LayerKind::kBilInput, "bil-input"},
    {LayerKind::kThermometerInput, "thermometer-input"},
    {LayerKind::kInt8Conv, "int8-conv"},
    {LayerKind::kBinaryConv, "binary-conv"},
    {LayerKind::kBinaryDepthwiseConv, "binary-depthwise-conv"},
    {LayerKind::kMaxPool2, "maxpool2"},
    {LayerKind::kSign, "sign"},
    {LayerKind::kBinaryDense, "binary-dense"},
    {LayerKind::kSoftmaxHead, "softmax-head"},
}};

[[noreturn]] void fail(ModelErrorCode code, const std::string& what) { throw ModelError(code, what); }

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::optional<LayerKind> parse_layer_kind(std::string_view s) {
  for (const auto& k : kKindNames) {
    if (k.name == s) return k.kind;
  }
  return std::nullopt;
}

bool is_input_kind(LayerKind kind) {
  switch (kind) {
    case LayerKind::kBpieInput:
    case LayerKind::kDbidInput:
    case LayerKind::kBilInput:
    case LayerKind::kThermometerInput:
    case LayerKind::kInt8Conv:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(FirstLayerMode mode) {
  return mode == FirstLayerMode::kWithF1 ? "with-F1" : "skip-F1";
}

std::string_view to_string(ModelErrorCode code) {
  switch (code) {
    case ModelErrorCode::kIo: return "io error";
    case ModelErrorCode::kBadMagic: return "bad magic";
    case ModelErrorCode::kVersion: return "version mismatch";
    case ModelErrorCode::kMalformed: return "malformed model";
    case ModelErrorCode::kMissingBlob: return "missing blob";
    case ModelErrorCode::kShape: return "shape inconsistency";
    case ModelErrorCode::kDigest: return "digest failure";
  }
  return "model error";
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

void ModelManifest::add_blob(std::string blob_name, AnyTensor tensor) {
  if (find_blob(blob_name) != nullptr) {
    fail(ModelErrorCode::kMalformed, "duplicate blob '" + blob_name + "'");
  }
  auto bytes = serialize_tensor(tensor);
  blobs_.push_back({std::move(blob_name), std::move(bytes), std::move(tensor)});
}

const Blob* ModelManifest::find_blob(std::string_view blob_name) const {
  for (const auto& b : blobs_) {
    if (b.name == blob_name) return &b;
  }
  return nullptr;
}

std::optional<std::size_t> ModelManifest::f1_layer() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].f1) return i;
  }
  return std::nullopt;
}

namespace {

class ShapeChecker {
 public:
  explicit ShapeChecker(const ModelManifest& m) : m_(m) {}

  std::vector<ActivationShape> run(bool check_blobs) {
    check_blobs_ = check_blobs;
    std::vector<ActivationShape> out;
    if (m_.input.count() == 0) fail(ModelErrorCode::kShape, "model input dims are empty");
    if (m_.layers.empty()) fail(ModelErrorCode::kShape, "model has no layers");
    ActivationShape cur{m_.input, ActivationKind::kBytes};
    std::set<std::string> names;
    for (std::size_t i = 0; i < m_.layers.size(); ++i) {
      const LayerSpec& l = m_.layers[i];
      if (!names.insert(l.name).second) fail(ModelErrorCode::kMalformed, "duplicate layer name '" + l.name + "'");
      const bool first = i == 0;
      if (first != is_input_kind(l.kind)) {
        fail(ModelErrorCode::kShape, where(l) + (first ? "first layer must be an input encoder or int8-conv"
                                                       : "input encoders are only allowed first"));
      }
      const bool next_is_sign = i + 1 < m_.layers.size() && m_.layers[i + 1].kind == LayerKind::kSign;
      if (l.kind == LayerKind::kSoftmaxHead && i + 1 != m_.layers.size()) {
        fail(ModelErrorCode::kShape, where(l) + "softmax-head must be the last layer");
      }
      cur = step(l, cur, next_is_sign);
      out.push_back(cur);
    }
    if (m_.layers.back().kind != LayerKind::kSoftmaxHead) {
      fail(ModelErrorCode::kShape, "model must end with softmax-head");
    }
    check_f1();
    return out;
  }

 private:
  static std::string where(const LayerSpec& l) {
    return "layer '" + l.name + "' (" + std::string(to_string(l.kind)) + "): ";
  }

  const Blob& blob(const LayerSpec& l, const std::string& ref, DType dtype, Dims dims) const {
    const Blob* b = m_.find_blob(ref);
    if (ref.empty() || b == nullptr) {
      fail(ModelErrorCode::kMissingBlob, where(l) + "blob '" + ref + "' not found");
    }
    if (dtype_of(b->tensor) != dtype || dims_of(b->tensor) != dims) {
      fail(ModelErrorCode::kShape, where(l) + "blob '" + ref + "' is " + to_string(dims_of(b->tensor)) +
                                       " dtype " + std::to_string(static_cast<int>(dtype_of(b->tensor))) +
                                       ", expected " + to_string(dims) + " dtype " +
                                       std::to_string(static_cast<int>(dtype)));
    }
    return *b;
  }

  std::int64_t bias_bound(const LayerSpec& l, std::size_t maps) const {
    if (l.bias.empty()) return 0;
    const Blob& b = blob(l, l.bias, DType::kI32, Dims{1, 1, maps});
    std::int64_t worst = 0;
    for (std::int32_t v : std::get<AccumTensor>(b.tensor).data) worst = std::max<std::int64_t>(worst, std::llabs(v));
    return worst;
  }

  void check_affine(const LayerSpec& l, std::size_t maps, bool required, bool folded_to_threshold) const {
    if (l.affine.empty()) {
      if (required) fail(ModelErrorCode::kShape, where(l) + "affine table is required");
      return;
    }
    if (l.affine.size() != maps) {
      fail(ModelErrorCode::kShape, where(l) + "affine table has " + std::to_string(l.affine.size()) +
                                       " entries for " + std::to_string(maps) + " maps");
    }
    for (const auto& p : l.affine) {
      if (!(p.sigma > 0.0) || !std::isfinite(p.gamma) || !std::isfinite(p.mu) || !std::isfinite(p.beta)) {
        fail(ModelErrorCode::kMalformed, where(l) + "affine needs finite parameters and sigma > 0");
      }
      if (folded_to_threshold && p.gamma == 0.0) {
        fail(ModelErrorCode::kMalformed, where(l) + "affine gamma is zero");
      }
      if (!folded_to_threshold) {
        const double a = p.gamma / p.sigma;
        const double b = p.beta - p.gamma * p.mu / p.sigma;
        if (std::abs(a) >= 32768.0 || std::abs(b) >= 32768.0) {
          fail(ModelErrorCode::kMalformed, where(l) + "affine not representable in Q16.16");
        }
      }
    }
  }

  void check_kernel(const LayerSpec& l, const Dims& in) const {
    if (l.kernel % 2 == 0) fail(ModelErrorCode::kShape, where(l) + "kernel size must be odd");
    if (l.padding == Padding::kValid && (l.kernel > in.height || l.kernel > in.width)) {
      fail(ModelErrorCode::kShape, where(l) + "kernel larger than input " + to_string(in));
    }
  }

  static Dims conv_out(const LayerSpec& l, const Dims& in, std::size_t maps) {
    if (l.padding == Padding::kSame) return {in.height, in.width, maps};
    return {in.height - l.kernel + 1, in.width - l.kernel + 1, maps};
  }

  void expect(const LayerSpec& l, const ActivationShape& cur, ActivationKind kind) const {
    if (cur.kind != kind) {
      static constexpr const char* kNames[] = {"bytes", "bits", "values", "logits"};
      fail(ModelErrorCode::kShape, where(l) + "expects " + kNames[static_cast<int>(kind)] + " input, got " +
                                       kNames[static_cast<int>(cur.kind)]);
    }
  }

  // A layer whose affine runs through affine_fixed must keep |x| <= 2^14.
  void check_affine_input(const LayerSpec& l, std::int64_t bound) const {
    if (bound > (std::int64_t{1} << 14)) {
      fail(ModelErrorCode::kShape, where(l) + "pre-affine range " + std::to_string(bound) + " exceeds 2^14");
    }
  }

  ActivationShape step(const LayerSpec& l, const ActivationShape& cur, bool next_is_sign) const {
    const Dims in = cur.dims;
    const auto planes = static_cast<std::size_t>(std::max(l.planes, 0));
    switch (l.kind) {
      case LayerKind::kBpieInput: {
        expect(l, cur, ActivationKind::kBytes);
        if (l.planes < 1 || l.planes > 8) fail(ModelErrorCode::kMalformed, where(l) + "planes must be in [1, 8]");
        if (l.multiplier < 1) fail(ModelErrorCode::kMalformed, where(l) + "multiplier must be >= 1");
        check_kernel(l, in);
        const std::size_t maps = in.channels * planes * l.multiplier;
        if (check_blobs_) {
          blob(l, l.weights, DType::kPackedBit, Dims{maps, l.kernel * l.kernel, 1});
          check_affine_input(l, static_cast<std::int64_t>(l.kernel * l.kernel) + bias_bound(l, maps));
        }
        check_affine(l, maps, true, false);
        const Dims od = conv_out(l, in, in.channels * l.multiplier);
        return {od, l.fused_output == FusedOutputKind::kSignBits ? ActivationKind::kBits : ActivationKind::kValues};
      }
      case LayerKind::kDbidInput:
        expect(l, cur, ActivationKind::kBytes);
        if (l.planes < 1 || l.planes > 8) fail(ModelErrorCode::kMalformed, where(l) + "planes must be in [1, 8]");
        return {{in.height, in.width, in.channels * planes}, ActivationKind::kBits};
      case LayerKind::kThermometerInput:
        expect(l, cur, ActivationKind::kBytes);
        if (l.expansion < 1) fail(ModelErrorCode::kMalformed, where(l) + "expansion must be >= 1");
        return {{in.height, in.width, in.channels * static_cast<std::size_t>(l.expansion)}, ActivationKind::kBits};
      case LayerKind::kBilInput: {
        expect(l, cur, ActivationKind::kBytes);
        if (l.planes < 1 || l.planes > 8) fail(ModelErrorCode::kMalformed, where(l) + "planes must be in [1, 8]");
        if (l.expansion < 1) fail(ModelErrorCode::kMalformed, where(l) + "expansion must be >= 1");
        const auto k = static_cast<std::size_t>(l.expansion);
        if (check_blobs_) blob(l, l.weights, DType::kPackedBit, Dims{k, 1, in.channels * planes});
        check_affine(l, k, true, false);
        return {{in.height, in.width, k}, ActivationKind::kBits};
      }
      case LayerKind::kInt8Conv: {
        expect(l, cur, ActivationKind::kBytes);
        check_kernel(l, in);
        if (l.maps < 1) fail(ModelErrorCode::kMalformed, where(l) + "maps must be >= 1");
        if (check_blobs_) {
          const Blob& w = blob(l, l.weights, DType::kI32, Dims{l.maps, l.kernel * l.kernel, in.channels});
          for (std::int32_t v : std::get<AccumTensor>(w.tensor).data) {
            if (v < -128 || v > 127) fail(ModelErrorCode::kMalformed, where(l) + "int8 weight out of range");
          }
          bias_bound(l, l.maps);
        }
        if (!l.affine.empty() && !next_is_sign) {
          fail(ModelErrorCode::kShape, where(l) + "int8-conv affine must be followed by sign");
        }
        check_affine(l, l.maps, false, true);
        return {conv_out(l, in, l.maps), ActivationKind::kValues};
      }
      case LayerKind::kBinaryConv:
      case LayerKind::kBinaryDepthwiseConv: {
        expect(l, cur, ActivationKind::kBits);
        check_kernel(l, in);
        const bool dw = l.kind == LayerKind::kBinaryDepthwiseConv;
        if (dw && l.multiplier < 1) fail(ModelErrorCode::kMalformed, where(l) + "multiplier must be >= 1");
        if (!dw && l.maps < 1) fail(ModelErrorCode::kMalformed, where(l) + "maps must be >= 1");
        const std::size_t maps = dw ? in.channels * l.multiplier : l.maps;
        const std::size_t fan_in = l.kernel * l.kernel * (dw ? 1 : in.channels);
        if (check_blobs_) {
          blob(l, l.weights, DType::kPackedBit, Dims{maps, l.kernel * l.kernel, dw ? 1 : in.channels});
          const std::int64_t bound = static_cast<std::int64_t>(fan_in) + bias_bound(l, maps);
          if (!l.affine.empty() && !next_is_sign) check_affine_input(l, bound);
        }
        check_affine(l, maps, false, next_is_sign);
        return {conv_out(l, in, maps), ActivationKind::kValues};
      }
      case LayerKind::kMaxPool2:
        if (cur.kind != ActivationKind::kBits && cur.kind != ActivationKind::kValues) {
          fail(ModelErrorCode::kShape, where(l) + "expects bits or values");
        }
        if (in.height % 2 != 0 || in.width % 2 != 0) {
          fail(ModelErrorCode::kShape, where(l) + "needs even height and width, got " + to_string(in));
        }
        return {{in.height / 2, in.width / 2, in.channels}, cur.kind};
      case LayerKind::kSign:
        expect(l, cur, ActivationKind::kValues);
        return {in, ActivationKind::kBits};
      case LayerKind::kBinaryDense: {
        expect(l, cur, ActivationKind::kBits);
        if (l.maps < 1) fail(ModelErrorCode::kMalformed, where(l) + "maps must be >= 1");
        if (check_blobs_) {
          blob(l, l.weights, DType::kPackedBit, Dims{l.maps, 1, in.count()});
          const std::int64_t bound = static_cast<std::int64_t>(in.count()) + bias_bound(l, l.maps);
          if (!l.affine.empty() && !next_is_sign) check_affine_input(l, bound);
        }
        check_affine(l, l.maps, false, next_is_sign);
        return {{1, 1, l.maps}, ActivationKind::kValues};
      }
      case LayerKind::kSoftmaxHead: {
        if (cur.kind != ActivationKind::kBits && cur.kind != ActivationKind::kValues) {
          fail(ModelErrorCode::kShape, where(l) + "expects bits or values");
        }
        if (l.maps < 1) fail(ModelErrorCode::kMalformed, where(l) + "maps must be >= 1");
        if (check_blobs_) blob(l, l.weights, DType::kPackedBit, Dims{l.maps, 1, in.count()});
        if (!l.bias.empty()) fail(ModelErrorCode::kMalformed, where(l) + "softmax-head takes no bias blob");
        check_affine(l, l.maps, false, true);
        return {{1, 1, l.maps}, ActivationKind::kLogits};
      }
    }
    fail(ModelErrorCode::kMalformed, where(l) + "unknown layer kind");
  }

  void check_f1() const {
    std::size_t tagged = 0;
    for (const auto& l : m_.layers) tagged += l.f1 ? 1 : 0;
    if (m_.first_layer_mode == FirstLayerMode::kSkipF1) {
      if (tagged != 0) fail(ModelErrorCode::kShape, "skip-F1 model has a layer tagged f1");
      if (m_.layers.front().kind == LayerKind::kInt8Conv) {
        fail(ModelErrorCode::kShape, "an int8-conv first layer is F1 and cannot be skipped");
      }
      return;
    }
    if (tagged != 1) fail(ModelErrorCode::kShape, "with-F1 model needs exactly one layer tagged f1");
    const std::size_t at = *m_.f1_layer();
    const LayerKind k = m_.layers[at].kind;
    // An encoder that emits values is binarized by a sign layer before F1.
    const std::size_t after_input = m_.layers.size() > 1 && m_.layers[1].kind == LayerKind::kSign ? 2 : 1;
    const bool ok = (at == 0 && k == LayerKind::kInt8Conv) || (at == after_input && k == LayerKind::kBinaryConv);
    if (!ok) fail(ModelErrorCode::kShape, "F1 must be the int8-conv first layer or a binary-conv right after the input encoder");
  }

  const ModelManifest& m_;
  bool check_blobs_ = true;
};

}  // namespace

void ModelManifest::validate() const { ShapeChecker(*this).run(true); }

std::vector<ActivationShape> ModelManifest::shapes() const { return ShapeChecker(*this).run(false); }

// ---------------------------------------------------------------------------
// Metadata document

namespace {

constexpr char kModelMagic[4] = {'B', 'P', 'B', 'N'};

std::string_view padding_name(Padding p) { return p == Padding::kSame ? "same" : "valid"; }

json layer_to_json(const LayerSpec& l) {
  json j;
  j["kind"] = std::string(to_string(l.kind));
  j["name"] = l.name;
  if (l.f1) j["role"] = "f1";
  switch (l.kind) {
    case LayerKind::kBpieInput:
      j["planes"] = l.planes;
      j["multiplier"] = l.multiplier;
      j["kernel"] = l.kernel;
      j["padding"] = padding_name(l.padding);
      j["fused_output"] = l.fused_output == FusedOutputKind::kAccum ? "accum" : "sign-bits";
      break;
    case LayerKind::kDbidInput:
      j["planes"] = l.planes;
      break;
    case LayerKind::kThermometerInput:
      j["expansion"] = l.expansion;
      break;
    case LayerKind::kBilInput:
      j["planes"] = l.planes;
      j["expansion"] = l.expansion;
      break;
    case LayerKind::kInt8Conv:
    case LayerKind::kBinaryConv:
      j["kernel"] = l.kernel;
      j["maps"] = l.maps;
      j["padding"] = padding_name(l.padding);
      break;
    case LayerKind::kBinaryDepthwiseConv:
      j["kernel"] = l.kernel;
      j["multiplier"] = l.multiplier;
      j["padding"] = padding_name(l.padding);
      break;
    case LayerKind::kBinaryDense:
    case LayerKind::kSoftmaxHead:
      j["maps"] = l.maps;
      break;
    case LayerKind::kMaxPool2:
    case LayerKind::kSign:
      break;
  }
  if (!l.weights.empty()) j["weights"] = l.weights;
  if (!l.bias.empty()) j["bias"] = l.bias;
  if (!l.affine.empty()) {
    json table = json::array();
    for (const auto& p : l.affine) table.push_back({p.gamma, p.mu, p.sigma, p.beta});
    j["affine"] = std::move(table);
  }
  return j;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec l;
  const auto kind = parse_layer_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ModelErrorCode::kMalformed, "unknown layer kind '" + j.at("kind").get<std::string>() + "'");
  l.kind = *kind;
  l.name = j.at("name").get<std::string>();
  const std::string role = field<std::string>(j, "role", "");
  if (!role.empty() && role != "f1") fail(ModelErrorCode::kMalformed, "unknown layer role '" + role + "'");
  l.f1 = role == "f1";
  l.planes = field<int>(j, "planes", 0);
  l.expansion = field<int>(j, "expansion", 0);
  l.kernel = field<std::size_t>(j, "kernel", 1);
  l.maps = field<std::size_t>(j, "maps", 0);
  l.multiplier = field<std::size_t>(j, "multiplier", 0);
  const std::string pad = field<std::string>(j, "padding", "same");
  if (pad != "same" && pad != "valid") fail(ModelErrorCode::kMalformed, "unknown padding '" + pad + "'");
  l.padding = pad == "same" ? Padding::kSame : Padding::kValid;
  const std::string fused = field<std::string>(j, "fused_output", "accum");
  if (fused != "accum" && fused != "sign-bits") fail(ModelErrorCode::kMalformed, "unknown fused_output '" + fused + "'");
  l.fused_output = fused == "accum" ? FusedOutputKind::kAccum : FusedOutputKind::kSignBits;
  l.weights = field<std::string>(j, "weights", "");
  l.bias = field<std::string>(j, "bias", "");
  if (const auto it = j.find("affine"); it != j.end()) {
    for (const auto& row : *it) {
      if (row.size() != 4) fail(ModelErrorCode::kMalformed, "affine rows need 4 numbers");
      l.affine.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>()});
    }
  }
  return l;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelManifest& m) {
  m.validate();
  json meta;
  meta["format"] = "bpbn-model";
  meta["name"] = m.name;
  meta["input"] = {m.input.height, m.input.width, m.input.channels};
  meta["first_layer_mode"] = std::string(to_string(m.first_layer_mode));
  json layers = json::array();
  for (const auto& l : m.layers) layers.push_back(layer_to_json(l));
  meta["layers"] = std::move(layers);

  std::vector<std::uint8_t> payload;
  json table = json::array();
  for (const auto& b : m.blobs()) {
    table.push_back({{"name", b.name},
                     {"offset", payload.size()},
                     {"length", b.bytes.size()},
                     {"sha256", sha256_hex(b.bytes)}});
    payload.insert(payload.end(), b.bytes.begin(), b.bytes.end());
  }
  meta["blobs"] = std::move(table);
  meta["payload_sha256"] = sha256_hex(payload);

  const std::string doc = meta.dump(1);
  std::vector<std::uint8_t> out(kModelMagic, kModelMagic + 4);
  put_u16(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(doc.size()));
  out.insert(out.end(), doc.begin(), doc.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ModelManifest parse_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    fail(ModelErrorCode::kBadMagic, "missing BPBN header");
  }
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kModelVersion) {
    fail(ModelErrorCode::kVersion, "file version " + std::to_string(version) + ", engine supports " +
                                       std::to_string(kModelVersion));
  }
  std::uint32_t doc_len = 0;
  for (int i = 0; i < 4; ++i) doc_len |= static_cast<std::uint32_t>(bytes[6 + i]) << (8 * i);
  if (bytes.size() - 10 < doc_len) fail(ModelErrorCode::kMalformed, "metadata length exceeds file");
  const auto doc = bytes.subspan(10, doc_len);
  const auto payload = bytes.subspan(10 + doc_len);

  json meta;
  try {
    meta = json::parse(doc.begin(), doc.end());
  } catch (const json::exception& e) {
    fail(ModelErrorCode::kMalformed, std::string("metadata is not valid JSON: ") + e.what());
  }

  ModelManifest m;
  try {
    if (meta.at("format").get<std::string>() != "bpbn-model") fail(ModelErrorCode::kMalformed, "unknown format tag");
    m.name = meta.at("name").get<std::string>();
    const auto& in = meta.at("input");
    if (in.size() != 3) fail(ModelErrorCode::kMalformed, "input must list 3 dims");
    m.input = {in[0].get<std::size_t>(), in[1].get<std::size_t>(), in[2].get<std::size_t>()};
    const std::string mode = meta.at("first_layer_mode").get<std::string>();
    if (mode != "with-F1" && mode != "skip-F1") fail(ModelErrorCode::kMalformed, "unknown first_layer_mode '" + mode + "'");
    m.first_layer_mode = mode == "with-F1" ? FirstLayerMode::kWithF1 : FirstLayerMode::kSkipF1;
    for (const auto& l : meta.at("layers")) m.layers.push_back(layer_from_json(l));

    if (sha256_hex(payload) != meta.at("payload_sha256").get<std::string>()) {
      fail(ModelErrorCode::kDigest, "payload digest does not match");
    }
    std::size_t expected_offset = 0;
    for (const auto& entry : meta.at("blobs")) {
      const auto name = entry.at("name").get<std::string>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      if (offset != expected_offset || offset + length > payload.size()) {
        fail(ModelErrorCode::kMalformed, "blob '" + name + "' has a bad offset/length");
      }
      expected_offset += length;
      const auto slice = payload.subspan(offset, length);
      if (sha256_hex(slice) != entry.at("sha256").get<std::string>()) {
        fail(ModelErrorCode::kDigest, "blob '" + name + "' digest does not match");
      }
      try {
        m.add_blob(name, deserialize_tensor(slice));
      } catch (const FormatError& e) {
        fail(ModelErrorCode::kMalformed, "blob '" + name + "': " + e.what());
      }
    }
    if (expected_offset != payload.size()) fail(ModelErrorCode::kMalformed, "trailing bytes after blobs");
  } catch (const json::exception& e) {
    fail(ModelErrorCode::kMalformed, std::string("metadata: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const ModelManifest& m, const std::filesystem::path& path) {
  const auto bytes = serialize_model(m);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ModelErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ModelErrorCode::kIo, "write failed: " + path.string());
}

ModelManifest load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ModelErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_model(bytes);
}

}  // namespace bpbn
