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

#include <filesystem>

#include "bpbn/tensor.hpp"

namespace bpbn {

// Binary PGM (P5, one channel) or PPM (P6, three channels) with maxval 255.
// Anything else raises FormatError.
ByteTensor read_pnm(const std::filesystem::path& path);

// Writes P5 for one channel and P6 for three; other channel counts are a
// ShapeError.
void write_pnm(const std::filesystem::path& path, const ByteTensor& img);

}  // namespace bpbn
