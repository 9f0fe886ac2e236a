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

#include "bpbn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bpbn/binops.hpp"
#include "bpbn/bitops.hpp"
#include "bpbn/cost_model.hpp"
#include "bpbn/encoders.hpp"
#include "bpbn/error.hpp"
#include "bpbn/image_io.hpp"
#include "bpbn/model.hpp"
#include "bpbn/model_cost.hpp"
#include "bpbn/model_zoo.hpp"
#include "bpbn/runtime.hpp"

namespace bpbn::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt_real(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_real(v[i]);
  return s;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double top2_gap(const std::vector<double>& v) {
  if (v.size() < 2) return INFINITY;
  std::vector<double> s = v;
  std::partial_sort(s.begin(), s.begin() + 2, s.end(), std::greater<>());
  return s[0] - s[1];
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string image;
  std::string method = "bitplane";
  int planes = 8;
  int expansion = 32;
  std::string out;
  std::string weights;
  std::uint64_t seed = 1;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const ByteTensor img = read_pnm(a.image);
  if (a.method == "bitplane") {
    const BitPlaneStack s = bit_rearrange(img, a.planes);
    fs::create_directories(a.out);
    for (std::size_t c = 0; c < img.dims.channels; ++c) {
      for (std::size_t i = 0; i < s.plane_count(); ++i) {
        const fs::path p = fs::path(a.out) / ("c" + std::to_string(c) + "_bit" + std::to_string(s.bit_positions[i]) + ".bpt");
        write_tensor_file(p, s.plane(c, i));
      }
    }
    out << "wrote " << s.planes.size() << " plane tensors to " << a.out << "\n";
    return kExitOk;
  }
  PackedBitTensor t;
  if (a.method == "dbid") {
    t = encode_dbid(img, a.planes);
  } else if (a.method == "thermometer") {
    t = encode_thermometer(img, a.expansion);
  } else {
    const std::size_t in_ch = img.dims.channels * static_cast<std::size_t>(a.planes);
    const auto k = static_cast<std::size_t>(a.expansion);
    PackedBitTensor blob;
    if (!a.weights.empty()) {
      blob = std::get<PackedBitTensor>(read_tensor_file(a.weights));
    } else {
      std::mt19937_64 rng(a.seed);
      blob = PackedBitTensor(Dims{k, 1, in_ch});
      for (std::size_t i = 0; i < blob.size(); ++i) blob.set_bit(i, (rng() & 1u) != 0);
    }
    const BinaryKernel pw = BinaryKernel::from_packed(1, blob);
    const std::vector<FixedAffine> identity(pw.out_maps);
    t = encode_bil(img, a.planes, pw, identity);
  }
  write_tensor_file(a.out, t);
  out << "wrote " << to_string(t.dims()) << " tensor to " << a.out << "\n";
  return kExitOk;
}

int cmd_export_planes(const std::string& image, std::size_t channel, const std::string& out_dir, std::ostream& out) {
  const ByteTensor img = read_pnm(image);
  if (channel >= img.dims.channels) {
    throw ValueError("channel " + std::to_string(channel) + " out of range for " + std::to_string(img.dims.channels) +
                     "-channel image");
  }
  const BitPlaneStack s = bit_rearrange(img, 8);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < 8; ++i) {
    const PackedBitTensor& plane = s.plane(channel, i);
    ByteTensor vis(Dims{img.dims.height, img.dims.width, 1});
    for (std::size_t p = 0; p < vis.data.size(); ++p) vis.data[p] = plane.bit(p) ? 255 : 0;
    write_pnm(fs::path(out_dir) / ("bit" + std::to_string(s.bit_positions[i]) + ".pgm"), vis);
  }
  out << "wrote 8 bit planes of channel " << channel << " to " << out_dir << "\n";
  return kExitOk;
}

void print_production_trace(const InferenceResult& r, std::ostream& out) {
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& t = r.trace[i];
    const auto bytes = serialize_tensor(t.output);
    out << "trace " << i << " " << t.name << " " << to_string(t.kind) << " " << to_string(dims_of(t.output))
        << " sha256=" << sha256_hex(bytes).substr(0, 16) << "\n";
  }
}

void print_reference_trace(const InferenceResult& r, std::ostream& out) {
  for (std::size_t i = 0; i < r.reference_trace.size(); ++i) {
    const auto& t = r.reference_trace[i];
    double sum = 0.0;
    for (double v : t.values) sum += v;
    out << "trace " << i << " " << t.name << " " << to_string(t.kind) << " " << to_string(t.dims)
        << " macs=" << t.macs << " sum=" << fmt_real(sum) << "\n";
  }
}

int cmd_infer(const std::string& model_path, const std::string& image_path, const std::string& path, bool trace,
              std::ostream& out, std::ostream& err) {
  ModelManifest m;
  try {
    m = load_model(model_path);
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitModelLoad;
  }
  ByteTensor img;
  try {
    img = read_pnm(image_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  if (img.dims != m.input) {
    err << "error: image " << to_string(img.dims) << " does not match model input " << to_string(m.input) << "\n";
    return kExitShape;
  }
  try {
    std::optional<InferenceResult> prod;
    std::optional<InferenceResult> ref;
    if (path != "reference") prod = run_inference(m, img, ExecPath::kProduction, trace);
    if (path != "production") ref = run_inference(m, img, ExecPath::kReference, trace);
    auto block = [&](const char* name, const InferenceResult& r, bool production) {
      out << "path: " << name << "\n";
      out << "logits: " << join(r.logits) << "\n";
      out << "argmax: " << argmax(r.logits) << "\n";
      if (trace) production ? print_production_trace(r, out) : print_reference_trace(r, out);
    };
    if (prod) block("production", *prod, true);
    if (ref) block("reference", *ref, false);
    if (prod && ref) {
      double worst = 0.0;
      for (std::size_t i = 0; i < prod->logits.size(); ++i) {
        worst = std::max(worst, std::abs(prod->logits[i] - ref->logits[i]));
      }
      out << "max_abs_diff: " << fmt_real(worst) << "\n";
      out << "argmax_agree: " << (argmax(prod->logits) == argmax(ref->logits) ? "yes" : "no") << "\n";
      out << "reference_top2_gap: " << fmt_real(top2_gap(ref->logits)) << "\n";
    }
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct CostArgs {
  std::string preset;
  std::string format = "text";
  cost::FirstLayerCostInputs in;
};

int cmd_make_model(const std::string& preset, std::uint64_t seed, const std::string& encoder, const std::string& out_path,
                   std::ostream& out) {
  ModelManifest m;
  if (preset == "stub") {
    m = zoo::stub_bpie_model();
  } else if (preset == "random") {
    zoo::RandomModelOptions opt;
    static const std::pair<const char*, zoo::InputChoice> kChoices[] = {
        {"any", zoo::InputChoice::kAny},         {"bpie", zoo::InputChoice::kBpie},
        {"dbid", zoo::InputChoice::kDbid},       {"thermometer", zoo::InputChoice::kThermometer},
        {"bil", zoo::InputChoice::kBil},         {"int8", zoo::InputChoice::kInt8}};
    for (const auto& [name, choice] : kChoices) {
      if (encoder == name) opt.encoder = choice;
    }
    m = zoo::random_model(seed, opt);
  } else if (preset == "table1-baseline") {
    m = zoo::baseline_first_layer_model({32, 32, 3}, 3, 128, seed);
  } else {
    m = zoo::bitplane_first_layer_model({32, 32, 3}, 8, 42, 3, seed);
  }
  save_model(m, out_path);
  out << "wrote model '" << m.name << "' (" << m.layers.size() << " layers, input " << to_string(m.input)
      << ", input-stage MACs " << input_stage_macs(m) << ") to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bit-plane input binarization engine for binary neural networks", "bpbn"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a PGM/PPM image into binary tensors");
  encode->add_option("image", enc.image, "Input image (binary PGM/PPM)")->required()->check(CLI::ExistingFile);
  encode->add_option("--method", enc.method, "Encoder")
      ->check(CLI::IsMember({"bitplane", "dbid", "bil", "thermometer"}));
  encode->add_option("--planes,-P", enc.planes, "Bit planes kept (most significant first)")->check(CLI::Range(1, 8));
  encode->add_option("--expansion,-K", enc.expansion, "Expansion channels (bil, thermometer)")
      ->check(CLI::PositiveNumber);
  encode->add_option("--out,-o", enc.out, "Output file, or directory for bitplane")->required();
  encode->add_option("--weights", enc.weights, "BIL pointwise weights tensor (K, 1, C*P)")->check(CLI::ExistingFile);
  encode->add_option("--seed", enc.seed, "Seed for random BIL weights");

  std::string ex_image;
  std::string ex_out;
  std::size_t ex_channel = 0;
  auto* exp = app.add_subcommand("export-planes", "Write the 8 bit planes of one channel as PGM images");
  exp->add_option("image", ex_image, "Input image")->required()->check(CLI::ExistingFile);
  exp->add_option("--channel,-c", ex_channel, "Channel index");
  exp->add_option("--out,-o", ex_out, "Output directory")->required();

  std::string in_model;
  std::string in_image;
  std::string in_path = "production";
  bool in_trace = false;
  auto* infer = app.add_subcommand("infer", "Run a model on an image and print logits");
  infer->add_option("model", in_model, "Model file")->required();
  infer->add_option("image", in_image, "Input image")->required();
  infer->add_option("--path", in_path, "Execution path")->check(CLI::IsMember({"production", "reference", "both"}));
  infer->add_flag("--trace", in_trace, "Print per-layer trace");

  CostArgs ca;
  auto* costc = app.add_subcommand("cost", "First-layer MAC/weight report");
  costc->add_option("--preset", ca.preset, "Load the default 32x32x3 / F1=128 dims")->check(CLI::IsMember({"table1"}));
  costc->add_option("--format", ca.format, "Output format")->check(CLI::IsMember({"text", "machine"}));
  std::vector<CLI::Option*> dims{
      costc->add_option("--height", ca.in.height), costc->add_option("--width", ca.in.width),
      costc->add_option("--channels", ca.in.channels), costc->add_option("--kernel", ca.in.kernel),
      costc->add_option("--filters", ca.in.filters), costc->add_option("--bits", ca.in.bits),
      costc->add_option("--expansion", ca.in.expansion), costc->add_option("--planes", ca.in.planes),
      costc->add_option("--multiplier", ca.in.multiplier),
      costc->add_option("--reduced-planes", ca.in.reduced_planes),
      costc->add_option("--reduced-multiplier", ca.in.reduced_multiplier),
      costc->add_option("--binary-speedup", ca.in.binary_speedup)};

  std::uint64_t st_seed = 1;
  std::string st_fault;
  auto* selftest = app.add_subcommand("selftest", "Run the built-in property suites");
  selftest->add_option("--seed", st_seed, "Seed for randomized suites");
  selftest->add_option("--inject-fault", st_fault, "Negative control")->check(CLI::IsMember({"sign-tie"}))->group("");

  std::string mm_preset = "random";
  std::string mm_out;
  std::string mm_encoder = "any";
  std::uint64_t mm_seed = 1;
  auto* make = app.add_subcommand("make-model", "Write a demo model file");
  make->add_option("--preset", mm_preset)->check(CLI::IsMember({"stub", "random", "table1-baseline", "table1-bitplane"}));
  make->add_option("--encoder", mm_encoder)->check(CLI::IsMember({"any", "bpie", "dbid", "thermometer", "bil", "int8"}));
  make->add_option("--seed", mm_seed);
  make->add_option("--out,-o", mm_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*encode) return cmd_encode(enc, out);
    if (*exp) return cmd_export_planes(ex_image, ex_channel, ex_out, out);
    if (*infer) return cmd_infer(in_model, in_image, in_path, in_trace, out, err);
    if (*costc) {
      const bool explicit_dims = std::any_of(dims.begin(), dims.end(), [](auto* o) { return o->count() > 0; });
      if (!ca.preset.empty() && explicit_dims) {
        err << "error: --preset table1 cannot be combined with explicit dimension flags\n";
        return kExitFailure;
      }
      const auto r = cost::report(ca.in);
      out << (ca.format == "machine" ? cost::render_machine(r) : cost::render_text(r));
      return kExitOk;
    }
    if (*selftest) {
      testing::set_sign_tie_fault(st_fault == "sign-tie");
      const auto results = run_selftest(st_seed);
      testing::set_sign_tie_fault(false);
      std::vector<std::string> failed;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        if (!r.passed) failed.push_back(r.name);
      }
      if (failed.empty()) {
        out << "selftest: all " << results.size() << " suites passed (seed " << st_seed << ")\n";
        return kExitOk;
      }
      out << "selftest: failed:";
      for (const auto& f : failed) out << " " << f;
      out << "\n";
      return kExitFailure;
    }
    if (*make) return cmd_make_model(mm_preset, mm_seed, mm_encoder, mm_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace bpbn::cli
