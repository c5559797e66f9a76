// Copyright 2026 The SegGraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seggraph/container.hpp"
#include "seggraph/errors.hpp"
#include "seggraph/metrics.hpp"
#include "seggraph/model_gradcheck.hpp"
#include "seggraph/pipeline.hpp"
#include "seggraph/report.hpp"
#include "seggraph/train.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace seggraph;

namespace {

template <typename T>
py::array_t<T> to_array(const std::vector<T>& values, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> vec3_array(const std::vector<Vec3>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = v[i][k];
  }
  return out;
}

std::vector<int32_t> as_labels(const py::array_t<int64_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw ShapeError("labels must be one-dimensional");
  std::vector<int32_t> out(a.size());
  for (py::ssize_t i = 0; i < a.size(); ++i) out[i] = static_cast<int32_t>(a.data()[i]);
  return out;
}

py::object optional_float(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict report_dict(const EvalReport& r) {
  py::list per_class;
  for (const auto& iou : r.per_class_iou) per_class.append(optional_float(iou));
  py::dict d;
  d["miou"] = r.miou;
  d["per_class_iou"] = per_class;
  d["small_miou"] = optional_float(r.small_miou);
  d["large_miou"] = optional_float(r.large_miou);
  d["point_accuracy"] = r.point_accuracy;
  return d;
}

py::array blob_to_array(const Blob& b) {
  std::vector<py::ssize_t> shape(b.dims.begin(), b.dims.end());
  switch (b.dtype) {
    case DType::kF32: return to_array(b.as_f32(), shape);
    case DType::kU32: return to_array(b.as_u32(), shape);
    case DType::kU16: return to_array(b.as_u16(), shape);
    case DType::kU8: return to_array(b.as_u8(), shape);
  }
  throw FormatError("unknown dtype");
}

template <typename T>
std::vector<T> flat(const py::array& a) {
  const auto c = py::array_t<T, py::array::c_style | py::array::forcecast>::ensure(a);
  return {c.data(), c.data() + c.size()};
}

Blob array_to_blob(const py::array& a) {
  std::vector<uint32_t> dims(a.shape(), a.shape() + a.ndim());
  const py::dtype dt = a.dtype();
  if (dt.equal(py::dtype::of<float>())) return Blob::f32(dims, flat<float>(a));
  if (dt.equal(py::dtype::of<uint32_t>())) return Blob::u32(dims, flat<uint32_t>(a));
  if (dt.equal(py::dtype::of<uint16_t>())) return Blob::u16(dims, flat<uint16_t>(a));
  if (dt.equal(py::dtype::of<uint8_t>())) return Blob::u8(dims, flat<uint8_t>(a));
  throw FormatError("blobs hold float32, uint32, uint16 or uint8 arrays");
}

AblationFlags ablation_from_kwargs(const py::dict& kw) {
  AblationFlags f;
  for (const auto& [key, value] : kw) {
    const std::string k = py::str(key);
    const bool v = value.cast<bool>();
    if (k == "use_segments") f.use_segments = v;
    else if (k == "segment_encoder") f.segment_encoder = v;
    else if (k == "quality_unpool") f.quality_unpool = v;
    else if (k == "overlap_edges") f.overlap_edges = v;
    else if (k == "adjacency_edges") f.adjacency_edges = v;
    else throw ConfigError("unknown ablation flag: " + k);
  }
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SegGraph few-shot 3D part segmentation core";

  static py::exception<Error> error(m, "SegGraphError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  m.def(
      "mean_iou",
      [](const py::array_t<int64_t, py::array::c_style | py::array::forcecast>& pred,
         const py::array_t<int64_t, py::array::c_style | py::array::forcecast>& gt, int k) {
        EvalReport r = mean_iou(as_labels(pred), as_labels(gt), k);
        small_part_breakdown(r);
        return report_dict(r);
      },
      py::arg("pred"), py::arg("gt"), py::arg("num_classes"));

  m.def("view_quality", &view_quality, py::arg("normal"), py::arg("point"), py::arg("camera"));

  m.def(
      "read_blob", [](const std::string& path) { return blob_to_array(read_blob(path)); },
      py::arg("path"));
  m.def(
      "write_blob",
      [](const std::string& path, const py::array& a) { write_blob(path, array_to_blob(a)); },
      py::arg("path"), py::arg("array"));

  m.def(
      "synthesize_shape",
      [](uint64_t seed, int index, int points, int parts) {
        SynthConfig c;
        c.seed = seed;
        c.points_per_shape = points;
        c.parts_per_shape = parts;
        c.num_shapes = index + 1;
        c.validate();
        const RawShape raw = synthesize_raw_shape(c, index);
        py::dict d;
        d["name"] = raw.name;
        d["positions"] = vec3_array(raw.cloud.positions);
        d["normals"] = vec3_array(raw.cloud.normals);
        d["labels"] = to_array(raw.cloud.labels, {static_cast<py::ssize_t>(raw.cloud.size())});
        d["class_names"] = raw.class_names;
        d["num_views"] = raw.cameras.size();
        return d;
      },
      py::arg("seed") = 0, py::arg("index") = 0, py::arg("points") = 1000,
      py::arg("parts") = 4);

  m.def(
      "write_synthetic_corpus",
      [](const std::string& out, uint64_t seed, int num_shapes, int train_shapes, int points) {
        SynthConfig c;
        c.seed = seed;
        c.num_shapes = num_shapes;
        c.train_shapes = train_shapes;
        c.points_per_shape = points;
        c.validate();
        CorpusIndex index;
        index.category = c.category;
        index.num_classes = c.parts_per_shape;
        index.class_names = synth_class_names();
        index.provenance = {{"source", "synthetic"}, {"seed", seed}};
        fs::create_directories(out);
        for (int i = 0; i < num_shapes; ++i) {
          const RawShape raw = synthesize_raw_shape(c, i);
          write_raw_shape(fs::path(out) / raw.name, raw);
          write_artifacts(fs::path(out) / raw.name, preprocess_shape(raw));
          index.shapes.push_back({raw.name, raw.split});
        }
        write_corpus_index(out, index);
      },
      py::arg("out"), py::arg("seed") = 0, py::arg("num_shapes") = 28,
      py::arg("train_shapes") = 8, py::arg("points") = 1000);

  m.def(
      "validate",
      [](const std::string& dir) { return validate_shape_dir(dir); }, py::arg("shape_dir"));

  m.def(
      "shape_summary",
      [](const std::string& dir) {
        const ShapeArtifacts s = read_artifacts(dir);
        py::dict d;
        d["name"] = s.name;
        d["num_points"] = s.cloud.size();
        d["num_segments"] = s.segments.size();
        d["overlap_edges"] = s.graph.overlap_edges.size();
        d["adjacency_edges"] = s.graph.adjacency_edges.size();
        d["channels"] = s.features.channels;
        return d;
      },
      py::arg("shape_dir"));

  m.def(
      "train",
      [](const std::string& corpus, const std::string& out, uint64_t seed, int epochs, int shots,
         int channels, const py::dict& ablation) {
        TrainConfig c;
        c.seed = seed;
        c.epochs = epochs;
        c.shots = shots;
        c.channels = channels;
        c.ablation = ablation_from_kwargs(ablation);
        const std::vector<ShapeArtifacts> shapes = load_split(corpus, "train");
        TrainedModel model;
        {
          py::gil_scoped_release release;
          model = train_fewshot(c, shapes);
        }
        save_checkpoint(out, {model.config, model.params, {{"seed", seed}, {"epochs", epochs}}});
        return model.loss_curve;
      },
      py::arg("corpus"), py::arg("out"), py::arg("seed") = 0, py::arg("epochs") = 100,
      py::arg("shots") = 8, py::arg("channels") = 96, py::arg("ablation") = py::dict());

  m.def(
      "predict",
      [](const std::string& checkpoint, const std::string& shape_dir) {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        const ShapeArtifacts shape = read_artifacts(shape_dir);
        const Prediction p = predict_labels(ckpt.model, ckpt.params, shape);
        return to_array(p.labels, {static_cast<py::ssize_t>(p.labels.size())});
      },
      py::arg("checkpoint"), py::arg("shape_dir"));

  m.def(
      "gradcheck_ops",
      [](uint64_t seed) {
        py::dict d;
        for (const nn::OpCheck& c : nn::op_gradcheck_suite(seed)) d[py::str(c.op)] = c.result.max_rel_error;
        return d;
      },
      py::arg("seed") = 0);

  m.def(
      "parse_seed_list", [](const std::string& s) { return parse_seed_list(s); }, py::arg("text"));
}
