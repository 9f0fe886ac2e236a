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

#include "bpbn/cost_model.hpp"

#include <cstdio>
#include <sstream>

#include "bpbn/error.hpp"
#include "json.hpp"

namespace bpbn::cost {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kDbid: return "dbid";
    case Method::kBil: return "bil";
    case Method::kThermometer: return "thermometer";
    case Method::kBitPlane: return "bitplane";
  }
  return "unknown";
}

std::uint64_t FirstLayerCostInputs::effective_multiplier() const {
  return multiplier != 0 ? multiplier : filters / channels;
}

void FirstLayerCostInputs::validate() const {
  for (std::uint64_t v : {height, width, channels, kernel, filters, bits, expansion, planes, reduced_planes,
                          reduced_multiplier}) {
    if (v == 0) throw ValueError("cost inputs must be positive");
  }
  if (effective_multiplier() == 0) throw ValueError("depth multiplier resolves to zero (F1 < C)");
  if (!(binary_speedup > 0.0)) throw ValueError("binary speedup must be positive");
}

Count macs_for(Method method, const FirstLayerCostInputs& in) {
  in.validate();
  const std::uint64_t hw = in.height * in.width;
  const std::uint64_t f2 = in.kernel * in.kernel;
  const std::uint64_t c = in.channels;
  const std::uint64_t m = in.bits;
  const std::uint64_t k = in.expansion;
  const std::uint64_t f1 = in.filters;
  const std::uint64_t n = in.effective_multiplier();
  switch (method) {
    case Method::kBaseline:
      return {hw * c * f2 * f1, c * f2 * f1};
    case Method::kDbid:
      return {hw * c * m * f2 * f1, c * m * k + f2 * f1 * k};
    case Method::kBil:
      return {hw * k * (c * m + f2 * f1), c * k * f2 * f1};
    case Method::kThermometer:
      return {hw * c * k * f2 * f1, c * f2 * n * m};
    case Method::kBitPlane:
      return {hw * c * in.planes * f2 * n, c * in.planes * f2 * n};
  }
  throw ValueError("unknown cost method");
}

CostReport report(const FirstLayerCostInputs& inputs) {
  inputs.validate();
  CostReport r{inputs, {}};
  const double base = static_cast<double>(macs_for(Method::kBaseline, inputs).macs);
  auto add = [&](std::string name, Method method, const FirstLayerCostInputs& in, std::string note = {}) {
    const Count cnt = macs_for(method, in);
    CostRow row{std::move(name), method, method != Method::kBaseline, cnt.macs, cnt.weights, 1.0, 1.0,
                std::move(note)};
    row.ratio = static_cast<double>(cnt.macs) / base;
    row.speedup = row.binary ? inputs.binary_speedup / row.ratio : 1.0;
    r.rows.push_back(std::move(row));
    return &r.rows.back();
  };
  const std::uint64_t n1 = inputs.effective_multiplier();
  add("baseline", Method::kBaseline, inputs);
  add("dbid", Method::kDbid, inputs, "weights printed as CMK + F^2 F1 K");
  add("bil", Method::kBil, inputs);
  add("thermometer", Method::kThermometer, inputs, "weights printed as C F^2 N1 M");

  FirstLayerCostInputs full = inputs;
  full.multiplier = n1;
  add("bitplane(P=" + std::to_string(full.planes) + ",N=" + std::to_string(n1) + ")", Method::kBitPlane, full);

  FirstLayerCostInputs reduced = full;
  reduced.planes = inputs.reduced_planes;
  CostRow* row = add("bitplane(P=" + std::to_string(reduced.planes) + ",N=" + std::to_string(n1) + ")",
                     Method::kBitPlane, reduced, "weights printed as C M F^2 N1");
  row->weights = inputs.channels * inputs.bits * inputs.kernel * inputs.kernel * n1;

  FirstLayerCostInputs small = reduced;
  small.multiplier = inputs.reduced_multiplier;
  add("bitplane(P=" + std::to_string(small.planes) + ",N=" + std::to_string(small.multiplier) + ")",
      Method::kBitPlane, small);
  return r;
}

std::string render_text(const CostReport& r) {
  std::ostringstream os;
  const auto& in = r.inputs;
  os << "first layer cost: H=" << in.height << " W=" << in.width << " C=" << in.channels << " F=" << in.kernel
     << " F1=" << in.filters << " M=" << in.bits << " K=" << in.expansion
     << " binary_speedup=" << in.binary_speedup << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-6s %14s %10s %9s %9s\n", "method", "type", "macs", "weights", "ratio",
                "speedup");
  os << line;
  int mark = 0;
  std::vector<std::string> notes;
  for (const auto& row : r.rows) {
    std::string name = row.name;
    if (!row.note.empty()) {
      name += " [" + std::to_string(++mark) + "]";
      notes.push_back(row.note);
    }
    std::snprintf(line, sizeof line, "%-24s %-6s %14llu %10llu %8.4fx %8.4fx\n", name.c_str(),
                  row.binary ? "1-bit" : "8-bit", static_cast<unsigned long long>(row.macs),
                  static_cast<unsigned long long>(row.weights), row.ratio, row.speedup);
    os << line;
  }
  for (std::size_t i = 0; i < notes.size(); ++i) os << "[" << i + 1 << "] " << notes[i] << "\n";
  return os.str();
}

std::string render_machine(const CostReport& r) {
  std::string out;
  for (const auto& row : r.rows) {
    nlohmann::json j{{"name", row.name}, {"macs", row.macs}, {"weights", row.weights},
                     {"ratio", row.ratio}, {"speedup", row.speedup}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<CostRow> parse_machine(std::string_view text) {
  std::vector<CostRow> rows;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CostRow row;
      row.name = j.at("name").get<std::string>();
      row.macs = j.at("macs").get<std::uint64_t>();
      row.weights = j.at("weights").get<std::uint64_t>();
      row.ratio = j.at("ratio").get<double>();
      row.speedup = j.at("speedup").get<double>();
      row.binary = row.name != "baseline";
      rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad cost record: ") + e.what());
    }
  }
  return rows;
}

}  // namespace bpbn::cost
