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

#include "bpbn/image_io.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "bpbn/error.hpp"

namespace bpbn {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string token(std::istream& in) {
  std::string t;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch) != 0) {
      if (!t.empty()) break;
      continue;
    }
    t.push_back(static_cast<char>(ch));
  }
  return t;
}

std::size_t number(std::istream& in, const std::filesystem::path& path) {
  const std::string t = token(in);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError(path.string() + ": bad PNM header field '" + t + "'");
  }
  return std::stoul(t);
}

}  // namespace

ByteTensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string magic = token(in);
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError(path.string() + ": only binary PGM (P5) and PPM (P6) are supported");
  }
  const std::size_t width = number(in, path);
  const std::size_t height = number(in, path);
  const std::size_t maxval = number(in, path);
  if (maxval != 255) {
    throw FormatError(path.string() + ": unsupported depth, maxval " + std::to_string(maxval) + " (need 255)");
  }
  if (width == 0 || height == 0) throw FormatError(path.string() + ": empty image");
  ByteTensor img(Dims{height, width, channels});
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.data.size()) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const ByteTensor& img) {
  const std::size_t c = img.dims.channels;
  if (c != 1 && c != 3) throw ShapeError("PNM output needs 1 or 3 channels, got " + std::to_string(c));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << (c == 1 ? "P5" : "P6") << "\n" << img.dims.width << " " << img.dims.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace bpbn
