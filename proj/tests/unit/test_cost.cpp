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

#include "doctest.h"

#include <cmath>

#include "bpbn/cost_model.hpp"
#include "bpbn/error.hpp"
#include "bpbn/model_cost.hpp"
#include "bpbn/model_zoo.hpp"
#include "bpbn/reference.hpp"

using namespace bpbn;
using namespace bpbn::cost;

TEST_CASE("MAC examples at the default dims") {
  const FirstLayerCostInputs in;
  CHECK(macs_for(Method::kBaseline, in).macs == 32ull * 32 * 3 * 9 * 128);
  CHECK(macs_for(Method::kBaseline, in).macs == 3538944ull);
  CHECK(in.effective_multiplier() == 42);
  CHECK(macs_for(Method::kBitPlane, in).macs == 32ull * 32 * 3 * 8 * 9 * 42);
  CHECK(macs_for(Method::kBitPlane, in).macs == 9289728ull);
  CHECK(macs_for(Method::kDbid, in).macs == 8 * macs_for(Method::kBaseline, in).macs);
}

TEST_CASE("report rows at the default dims") {
  const auto r = report(FirstLayerCostInputs{});
  REQUIRE(r.rows.size() == 7);
  const std::vector<double> ratio{1.0, 8.0, 98.0 / 9.0, 32.0, 2.625, 1.3125, 1.0};
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(r.rows[i].ratio == doctest::Approx(ratio[i]).epsilon(1e-12));
    CHECK(r.rows[i].speedup == doctest::Approx(i == 0 ? 1.0 : 9.0 / ratio[i]).epsilon(1e-12));
  }
  CHECK(r.rows[4].name == "bitplane(P=8,N=42)");
  CHECK(r.rows[5].name == "bitplane(P=4,N=42)");
  CHECK(r.rows[6].name == "bitplane(P=4,N=32)");
  CHECK(r.rows[6].ratio == 1.0);
  // Weight formulas as printed.
  CHECK(r.rows[0].weights == 3 * 9 * 128);
  CHECK(r.rows[1].weights == 3 * 8 * 32 + 9 * 128 * 32);
  CHECK(r.rows[2].weights == 3 * 32 * 9 * 128);
  CHECK(r.rows[3].weights == 3 * 9 * 42 * 8);
  CHECK(r.rows[4].weights == 3 * 8 * 9 * 42);
  CHECK(r.rows[5].weights == 3 * 8 * 9 * 42);
  CHECK(r.rows[6].weights == 3 * 4 * 9 * 32);
}

TEST_CASE("binary speedup of one gives 1/ratio") {
  FirstLayerCostInputs in;
  in.binary_speedup = 1.0;
  for (const auto& row : report(in).rows) CHECK(row.speedup == doctest::Approx(1.0 / row.ratio));
}

TEST_CASE("custom C=1 recomputes the ratios") {
  FirstLayerCostInputs in;
  in.channels = 1;
  const auto r = report(in);
  CHECK(in.effective_multiplier() == 128);
  const double base = 32.0 * 32 * 1 * 9 * 128;
  CHECK(r.rows[0].macs == base);
  CHECK(r.rows[2].ratio == doctest::Approx(32.0 * 32 * 32 * (8 + 9 * 128) / base));
  CHECK(r.rows[4].ratio == doctest::Approx(8.0));
  CHECK(r.rows[6].ratio == doctest::Approx(4.0 * 32 / 128));
}

TEST_CASE("MACs strictly increase in every dimension the formula uses") {
  struct Dim {
    const char* name;
    std::uint64_t FirstLayerCostInputs::*field;
  };
  const Dim dims[] = {{"H", &FirstLayerCostInputs::height}, {"W", &FirstLayerCostInputs::width},
                      {"C", &FirstLayerCostInputs::channels}, {"F", &FirstLayerCostInputs::kernel},
                      {"F1", &FirstLayerCostInputs::filters}, {"M", &FirstLayerCostInputs::bits},
                      {"K", &FirstLayerCostInputs::expansion}, {"P", &FirstLayerCostInputs::planes},
                      {"N", &FirstLayerCostInputs::multiplier}};
  // Which dims each formula contains.
  const std::vector<std::pair<Method, std::string>> uses{
      {Method::kBaseline, "H W C F F1"},   {Method::kDbid, "H W C F F1 M"}, {Method::kBil, "H W C F F1 M K"},
      {Method::kThermometer, "H W C F F1 K"}, {Method::kBitPlane, "H W C F P N"}};
  FirstLayerCostInputs base;
  base.multiplier = 42;
  for (const auto& [method, names] : uses) {
    for (const auto& d : dims) {
      FirstLayerCostInputs up = base;
      up.*d.field += 1;
      const auto a = macs_for(method, base).macs;
      const auto b = macs_for(method, up).macs;
      const bool contains = (" " + names + " ").find(std::string(" ") + d.name + " ") != std::string::npos;
      if (contains) {
        CHECK_MESSAGE(b > a, to_string(method) << " in " << d.name);
      } else {
        CHECK_MESSAGE(b == a, to_string(method) << " in " << d.name);
      }
    }
  }
}

TEST_CASE("invalid inputs are rejected") {
  FirstLayerCostInputs in;
  in.height = 0;
  CHECK_THROWS_AS(report(in), ValueError);
  in = {};
  in.filters = 2;  // F1 < C leaves N = 0
  CHECK_THROWS_AS(macs_for(Method::kBitPlane, in), ValueError);
  in = {};
  in.binary_speedup = 0;
  CHECK_THROWS_AS(report(in), ValueError);
}

TEST_CASE("machine format round trips through the parser") {
  FirstLayerCostInputs in;
  in.height = 17;
  in.binary_speedup = 7.25;
  const auto r = report(in);
  const auto rows = parse_machine(render_machine(r));
  REQUIRE(rows.size() == r.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].name == r.rows[i].name);
    CHECK(rows[i].macs == r.rows[i].macs);
    CHECK(rows[i].weights == r.rows[i].weights);
    CHECK(rows[i].ratio == r.rows[i].ratio);
    CHECK(rows[i].speedup == r.rows[i].speedup);
  }
  CHECK_THROWS_AS(parse_machine("{\"name\": 1}\n"), FormatError);
}

TEST_CASE("text report lists every row and the footnotes") {
  const auto text = render_text(report(FirstLayerCostInputs{}));
  for (const char* name : {"baseline", "dbid", "bil", "thermometer", "bitplane(P=8,N=42)", "bitplane(P=4,N=42)",
                           "bitplane(P=4,N=32)", "CMK + F^2 F1 K"}) {
    CHECK(text.find(name) != std::string::npos);
  }
}

TEST_CASE("analytic layer costs equal the reference interpreter counters") {
  std::mt19937_64 rng(401);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto m = zoo::random_model(seed);
    const auto costs = layer_costs(m);
    const auto ref = reference_forward(m, zoo::random_image(m.input, rng));
    REQUIRE(costs.size() == ref.trace.size());
    for (std::size_t i = 0; i < costs.size(); ++i) CHECK(costs[i].macs == ref.trace[i].macs);
  }
}

TEST_CASE("first-layer models: counters match macs_for for baseline and ours") {
  std::mt19937_64 rng(403);
  const FirstLayerCostInputs in;
  const auto base = zoo::baseline_first_layer_model({32, 32, 3}, 3, 128, 1);
  const auto ours = zoo::bitplane_first_layer_model({32, 32, 3}, 8, 42, 3, 1);
  const auto rb = reference_forward(base, zoo::random_image(base.input, rng));
  const auto ro = reference_forward(ours, zoo::random_image(ours.input, rng));
  CHECK(rb.trace[0].macs == macs_for(Method::kBaseline, in).macs);
  CHECK(ro.trace[0].macs == macs_for(Method::kBitPlane, in).macs);
  CHECK(input_stage_macs(base) == 3538944ull);
  CHECK(input_stage_macs(ours) == 9289728ull);
  FirstLayerCostInputs reduced = in;
  reduced.planes = 4;
  reduced.multiplier = 32;
  const auto small = zoo::bitplane_first_layer_model({32, 32, 3}, 4, 32, 3, 1);
  CHECK(input_stage_macs(small) == macs_for(Method::kBitPlane, reduced).macs);
  CHECK(input_stage_macs(small) == input_stage_macs(base));
}

TEST_CASE("skip-F1 models execute no F1 layer") {
  zoo::RandomModelOptions opt;
  opt.encoder = zoo::InputChoice::kBpie;
  bool saw_skip = false;
  bool saw_with = false;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = zoo::random_model(seed, opt);
    const auto costs = layer_costs(m);
    const bool any_f1 = std::any_of(costs.begin(), costs.end(), [](const auto& c) { return c.f1; });
    if (m.first_layer_mode == FirstLayerMode::kSkipF1) {
      saw_skip = true;
      CHECK(!any_f1);
      CHECK(input_stage_macs(m) == costs.front().macs);
    } else {
      saw_with = true;
      CHECK(any_f1);
      CHECK(input_stage_macs(m) > costs.front().macs);
    }
  }
  CHECK(saw_skip);
  CHECK(saw_with);
}
