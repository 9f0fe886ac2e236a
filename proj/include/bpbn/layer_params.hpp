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

namespace bpbn {

enum class Padding { kSame, kValid };

// Batch-norm parameters in real arithmetic: gamma * (x - mu) / sigma + beta.
struct FloatAffine {
  double gamma = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
  double beta = 0.0;

  double apply(double x) const { return gamma * (x - mu) / sigma + beta; }
  friend bool operator==(const FloatAffine&, const FloatAffine&) = default;
};

}  // namespace bpbn
