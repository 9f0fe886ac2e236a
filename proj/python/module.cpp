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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bpbn/binops.hpp"
#include "bpbn/bitops.hpp"
#include "bpbn/bpie.hpp"
#include "bpbn/cost_model.hpp"
#include "bpbn/encoders.hpp"
#include "bpbn/error.hpp"
#include "bpbn/model.hpp"
#include "bpbn/model_cost.hpp"
#include "bpbn/model_zoo.hpp"
#include "bpbn/runtime.hpp"

namespace py = pybind11;
using namespace bpbn;

namespace {

using I8Array = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Dims dims3(const py::buffer_info& info) {
  if (info.ndim != 3) throw ShapeError("expected an (H, W, C) array");
  return {static_cast<std::size_t>(info.shape[0]), static_cast<std::size_t>(info.shape[1]),
          static_cast<std::size_t>(info.shape[2])};
}

ByteTensor to_bytes(const U8Array& a) {
  const auto info = a.request();
  const Dims d = dims3(info);
  const auto* p = static_cast<const std::uint8_t*>(info.ptr);
  return ByteTensor(d, std::vector<std::uint8_t>(p, p + d.count()));
}

py::array_t<std::int8_t> bipolar_array(const PackedBitTensor& t) {
  const Dims& d = t.dims();
  py::array_t<std::int8_t> out({d.height, d.width, d.channels});
  auto* p = out.mutable_data();
  for (std::size_t i = 0; i < t.size(); ++i) p[i] = static_cast<std::int8_t>(t.value(i));
  return out;
}

py::array_t<std::uint64_t> words_array(const PackedBitTensor& t) {
  const auto w = t.words();
  return py::array_t<std::uint64_t>(static_cast<py::ssize_t>(w.size()), w.data());
}

py::tuple dims_tuple(const Dims& d) { return py::make_tuple(d.height, d.width, d.channels); }

py::object tensor_to_py(const AnyTensor& t) {
  if (const auto* b = std::get_if<PackedBitTensor>(&t)) return bipolar_array(*b);
  const auto values = to_real(t);
  const Dims d = dims_of(t);
  py::array_t<double> out({d.height, d.width, d.channels});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_bpbn, m) {
  m.doc() = "Bit-plane input binarization engine for binary neural networks";

  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ModelError>(m, "ModelError", error.ptr());

  py::class_<PackedBitTensor>(m, "PackedBitTensor")
      .def_property_readonly("dims", [](const PackedBitTensor& t) { return dims_tuple(t.dims()); })
      .def_property_readonly("words", &words_array)
      .def("to_numpy", &bipolar_array)
      .def("__len__", &PackedBitTensor::size)
      .def("__eq__", [](const PackedBitTensor& a, const PackedBitTensor& b) { return a == b; });

  m.def(
      "pack_bipolar",
      [](const I8Array& a) {
        const auto info = a.request();
        const Dims d = dims3(info);
        const auto* p = static_cast<const std::int8_t*>(info.ptr);
        return pack_bipolar(d, std::span<const std::int8_t>(p, d.count()));
      },
      py::arg("values"), "Pack an (H, W, C) array of +1/-1 into 64-bit words (bit 1 = -1).");
  m.def("unpack_bipolar", &bipolar_array, py::arg("tensor"));
  m.def(
      "from_words",
      [](py::tuple dims, py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> words) {
        const Dims d{dims[0].cast<std::size_t>(), dims[1].cast<std::size_t>(), dims[2].cast<std::size_t>()};
        const auto* p = words.data();
        return PackedBitTensor(d, std::vector<std::uint64_t>(p, p + words.size()));
      },
      py::arg("dims"), py::arg("words"));
  m.def(
      "popcount_xor_dot",
      [](const PackedBitTensor& a, const PackedBitTensor& b) {
        if (a.size() != b.size()) throw ShapeError("operands differ in element count");
        return popcount_xor_dot(a.words(), b.words(), a.size());
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "bit_rearrange",
      [](const U8Array& img, int planes) {
        const auto s = bit_rearrange(to_bytes(img), planes);
        const Dims& d = s.source_dims;
        py::array_t<std::uint8_t> out({d.channels, s.plane_count(), d.height, d.width});
        auto* p = out.mutable_data();
        for (const auto& plane : s.planes) {
          for (std::size_t i = 0; i < plane.size(); ++i) *p++ = plane.bit(i);
        }
        return py::make_tuple(out, s.bit_positions);
      },
      py::arg("image"), py::arg("planes") = 8,
      "Returns (bits[C, P, H, W], bit_positions) keeping the P most significant planes.");
  m.def(
      "encode_dbid", [](const U8Array& img, int planes) { return bipolar_array(encode_dbid(to_bytes(img), planes)); },
      py::arg("image"), py::arg("planes") = 8);
  m.def(
      "encode_thermometer",
      [](const U8Array& img, int k) { return bipolar_array(encode_thermometer(to_bytes(img), k)); },
      py::arg("image"), py::arg("expansion") = 32);

  m.def(
      "bpie_forward",
      [](const U8Array& img, const I8Array& kernels, int planes, std::size_t multiplier, std::vector<double> gamma,
         std::vector<double> mu, std::vector<double> sigma, std::vector<double> beta, bool fixed) {
        const ByteTensor b = to_bytes(img);
        const auto kinfo = kernels.request();
        if (kinfo.ndim != 3 || kinfo.shape[1] != kinfo.shape[2]) throw ShapeError("kernels must be (maps, F, F)");
        const auto f = static_cast<std::size_t>(kinfo.shape[1]);
        const std::size_t stacks = b.dims.channels * static_cast<std::size_t>(planes);
        if (static_cast<std::size_t>(kinfo.shape[0]) != stacks * multiplier) {
          throw ShapeError("kernels need C * P * N maps");
        }
        const auto* kp = static_cast<const std::int8_t*>(kinfo.ptr);
        std::vector<BinaryKernel> ks;
        for (std::size_t s = 0; s < stacks; ++s) {
          ks.push_back(BinaryKernel::from_bipolar(
              f, 1, multiplier, std::span<const std::int8_t>(kp + s * multiplier * f * f, multiplier * f * f)));
        }
        std::vector<FloatAffine> aff;
        for (std::size_t i = 0; i < gamma.size(); ++i) aff.push_back({gamma[i], mu.at(i), sigma.at(i), beta.at(i)});
        BpieConfig cfg;
        cfg.planes = planes;
        cfg.multiplier = multiplier;
        cfg.affine_mode = fixed ? AffineMode::kFixed : AffineMode::kFloat;
        const auto out = bpie_forward(b, BpieWeights::make(std::move(ks), std::move(aff)), cfg);
        return tensor_to_py(std::get<AccumTensor>(out));
      },
      py::arg("image"), py::arg("kernels"), py::arg("planes"), py::arg("multiplier"), py::arg("gamma"),
      py::arg("mu"), py::arg("sigma"), py::arg("beta"), py::arg("fixed") = true,
      "Fused bit-plane block output as real values, shape (H, W, C*N).");

  m.def(
      "cost_report",
      [](py::kwargs kw) {
        cost::FirstLayerCostInputs in;
        for (const auto& [key, value] : kw) {
          const auto k = key.cast<std::string>();
          if (k == "binary_speedup") {
            in.binary_speedup = value.cast<double>();
            continue;
          }
          static const std::pair<const char*, std::uint64_t cost::FirstLayerCostInputs::*> kFields[] = {
              {"height", &cost::FirstLayerCostInputs::height},       {"width", &cost::FirstLayerCostInputs::width},
              {"channels", &cost::FirstLayerCostInputs::channels},   {"kernel", &cost::FirstLayerCostInputs::kernel},
              {"filters", &cost::FirstLayerCostInputs::filters},     {"bits", &cost::FirstLayerCostInputs::bits},
              {"expansion", &cost::FirstLayerCostInputs::expansion}, {"planes", &cost::FirstLayerCostInputs::planes},
              {"multiplier", &cost::FirstLayerCostInputs::multiplier},
              {"reduced_planes", &cost::FirstLayerCostInputs::reduced_planes},
              {"reduced_multiplier", &cost::FirstLayerCostInputs::reduced_multiplier}};
          bool found = false;
          for (const auto& [name, field] : kFields) {
            if (k == name) {
              in.*field = value.cast<std::uint64_t>();
              found = true;
            }
          }
          if (!found) throw py::key_error("unknown cost input '" + k + "'");
        }
        py::list rows;
        for (const auto& r : cost::report(in).rows) {
          py::dict d;
          d["name"] = r.name;
          d["macs"] = r.macs;
          d["weights"] = r.weights;
          d["ratio"] = r.ratio;
          d["speedup"] = r.speedup;
          rows.append(d);
        }
        return rows;
      },
      "First-layer cost rows; keyword arguments override the default dims.");

  py::class_<ModelManifest>(m, "Model")
      .def_readonly("name", &ModelManifest::name)
      .def_property_readonly("input", [](const ModelManifest& mm) { return dims_tuple(mm.input); })
      .def_property_readonly("first_layer_mode",
                             [](const ModelManifest& mm) { return std::string(to_string(mm.first_layer_mode)); })
      .def_property_readonly("layers",
                             [](const ModelManifest& mm) {
                               py::list out;
                               for (const auto& l : mm.layers) out.append(py::make_tuple(l.name, std::string(to_string(l.kind))));
                               return out;
                             })
      .def("layer_macs",
           [](const ModelManifest& mm) {
             py::list out;
             for (const auto& c : layer_costs(mm)) out.append(py::make_tuple(c.name, c.macs));
             return out;
           })
      .def("to_bytes", [](const ModelManifest& mm) {
        const auto b = serialize_model(mm);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      });

  m.def("load_model", [](const std::string& path) { return load_model(path); }, py::arg("path"));
  m.def(
      "parse_model",
      [](const py::bytes& data) {
        const std::string s = data;
        return parse_model(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      },
      py::arg("data"));
  m.def("save_model", [](const ModelManifest& mm, const std::string& path) { save_model(mm, path); },
        py::arg("model"), py::arg("path"));
  m.def("stub_model", [](py::tuple d) {
    return zoo::stub_bpie_model({d[0].cast<std::size_t>(), d[1].cast<std::size_t>(), d[2].cast<std::size_t>()});
  }, py::arg("input") = py::make_tuple(1, 1, 1));
  m.def("random_model", [](std::uint64_t seed) { return zoo::random_model(seed); }, py::arg("seed"));

  m.def(
      "run_inference",
      [](const ModelManifest& mm, const U8Array& img, const std::string& path, bool trace) {
        if (path != "production" && path != "reference") throw py::value_error("path must be production or reference");
        InferenceResult r;
        {
          const ByteTensor b = to_bytes(img);
          py::gil_scoped_release release;
          r = run_inference(mm, b, path == "production" ? ExecPath::kProduction : ExecPath::kReference, trace);
        }
        py::dict out;
        out["logits"] = r.logits;
        out["probabilities"] = r.probabilities;
        if (trace) {
          py::list layers;
          for (const auto& t : r.trace) layers.append(py::make_tuple(t.name, tensor_to_py(t.output)));
          for (const auto& t : r.reference_trace) {
            py::array_t<double> v({t.dims.height, t.dims.width, t.dims.channels});
            std::copy(t.values.begin(), t.values.end(), v.mutable_data());
            layers.append(py::make_tuple(t.name, v));
          }
          out["trace"] = layers;
        }
        return out;
      },
      py::arg("model"), py::arg("image"), py::arg("path") = "production", py::arg("trace") = false);
}
