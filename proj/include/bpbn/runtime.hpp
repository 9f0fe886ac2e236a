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

#include <memory>
#include <string>
#include <vector>

#include "bpbn/model.hpp"
#include "bpbn/reference.hpp"
#include "bpbn/tensor.hpp"

namespace bpbn {

enum class ExecPath { kProduction, kReference };

// Output of one production layer: bytes, packed bits or integer/Q16.16 maps.
struct LayerTrace {
  std::string name;
  LayerKind kind = LayerKind::kSign;
  AnyTensor output;
};

// Real-valued view of a traced tensor (bits as -1/+1, accumulators scaled
// by their fractional bits).
std::vector<double> to_real(const AnyTensor& t);

struct InferenceResult {
  std::vector<double> logits;
  std::vector<double> probabilities;
  std::vector<LayerTrace> trace;                    // production, when requested
  std::vector<ReferenceLayerTrace> reference_trace; // reference, when requested
};

std::vector<double> softmax(const std::vector<double>& logits);

// Production executor. Construction decodes every weight blob into packed
// kernels and folds affine tables; afterwards the engine is immutable and
// may be shared between threads.
class Engine {
 public:
  explicit Engine(ModelManifest model);
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) noexcept;

  const ModelManifest& model() const { return model_; }

  // Throws ShapeError if img dims differ from the model input.
  InferenceResult run(const ByteTensor& img, bool trace = false) const;

 private:
  struct Prepared;
  ModelManifest model_;
  std::vector<std::unique_ptr<Prepared>> prepared_;
};

InferenceResult run_inference(const ModelManifest& m, const ByteTensor& img, ExecPath path,
                              bool trace = false);

}  // namespace bpbn
