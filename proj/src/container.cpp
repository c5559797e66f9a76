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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace seggraph {

using nlohmann::json;

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::kF32:
    case DType::kU32:
      return 4;
    case DType::kU16:
      return 2;
    case DType::kU8:
      return 1;
  }
  throw FormatError("unknown dtype code " + std::to_string(static_cast<int>(dtype)));
}

const char* dtype_name(DType dtype) {
  switch (dtype) {
    case DType::kF32:
      return "f32";
    case DType::kU32:
      return "u32";
    case DType::kU16:
      return "u16";
    case DType::kU8:
      return "u8";
  }
  return "?";
}

std::size_t Blob::element_count() const {
  std::size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

namespace {

constexpr char kMagic[4] = {'S', 'G', 'B', '1'};

template <typename T>
void put_le(std::vector<uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, uint32_t,
                               std::conditional_t<sizeof(T) == 2, uint16_t, uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<uint8_t>(bits >> (8 * b)));
}

template <typename T>
T get_le(const uint8_t* p) {
  using U = std::conditional_t<sizeof(T) == 4, uint32_t,
                               std::conditional_t<sizeof(T) == 2, uint16_t, uint8_t>>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(U(p[b]) << (8 * b));
  return std::bit_cast<T>(bits);
}

template <typename T>
Blob make_blob(DType dtype, std::vector<uint32_t> dims, std::span<const T> values) {
  Blob blob;
  blob.dtype = dtype;
  blob.dims = std::move(dims);
  if (blob.element_count() != values.size()) {
    throw ShapeError("blob dims hold " + std::to_string(blob.element_count()) + " elements, got " +
                     std::to_string(values.size()));
  }
  blob.payload.reserve(values.size() * sizeof(T));
  for (T v : values) put_le(blob.payload, v);
  return blob;
}

template <typename T>
std::vector<T> blob_values(const Blob& blob, DType expected) {
  if (blob.dtype != expected) {
    throw FormatError(std::string("blob has dtype ") + dtype_name(blob.dtype) + ", expected " +
                      dtype_name(expected));
  }
  std::vector<T> out(blob.element_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_le<T>(&blob.payload[i * sizeof(T)]);
  return out;
}

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string dims_string(const std::vector<uint32_t>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? ", " : "") + std::to_string(dims[i]);
  return s + ")";
}

}  // namespace

Blob Blob::f32(std::vector<uint32_t> dims, std::span<const float> values) {
  return make_blob(DType::kF32, std::move(dims), values);
}
Blob Blob::u32(std::vector<uint32_t> dims, std::span<const uint32_t> values) {
  return make_blob(DType::kU32, std::move(dims), values);
}
Blob Blob::u16(std::vector<uint32_t> dims, std::span<const uint16_t> values) {
  return make_blob(DType::kU16, std::move(dims), values);
}
Blob Blob::u8(std::vector<uint32_t> dims, std::span<const uint8_t> values) {
  return make_blob(DType::kU8, std::move(dims), values);
}

std::vector<float> Blob::as_f32() const { return blob_values<float>(*this, DType::kF32); }
std::vector<uint32_t> Blob::as_u32() const { return blob_values<uint32_t>(*this, DType::kU32); }
std::vector<uint16_t> Blob::as_u16() const { return blob_values<uint16_t>(*this, DType::kU16); }
std::vector<uint8_t> Blob::as_u8() const { return payload; }

std::vector<uint8_t> encode_blob(const Blob& blob) {
  if (blob.dims.size() > 255) throw FormatError("blob has more than 255 dimensions");
  if (blob.payload.size() != blob.element_count() * dtype_size(blob.dtype)) {
    throw FormatError("blob payload size does not match its dims");
  }
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  out.push_back(static_cast<uint8_t>(blob.dtype));
  out.push_back(static_cast<uint8_t>(blob.dims.size()));
  for (uint32_t d : blob.dims) put_le(out, d);
  out.insert(out.end(), blob.payload.begin(), blob.payload.end());
  return out;
}

namespace {

BlobHeader decode_header(std::span<const uint8_t> bytes, const std::string& origin,
                         std::size_t* header_size) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(origin + ": missing SGB1 magic");
  }
  BlobHeader header;
  if (bytes[4] > 3) throw FormatError(origin + ": unknown dtype code " + std::to_string(bytes[4]));
  header.dtype = static_cast<DType>(bytes[4]);
  const std::size_t ndims = bytes[5];
  *header_size = 6 + 4 * ndims;
  if (bytes.size() < *header_size) throw FormatError(origin + ": truncated header");
  for (std::size_t i = 0; i < ndims; ++i) header.dims.push_back(get_le<uint32_t>(&bytes[6 + 4 * i]));
  return header;
}

}  // namespace

Blob decode_blob(std::span<const uint8_t> bytes, const std::string& origin) {
  std::size_t offset = 0;
  BlobHeader header = decode_header(bytes, origin, &offset);
  Blob blob;
  blob.dtype = header.dtype;
  blob.dims = std::move(header.dims);
  const std::size_t expected = blob.element_count() * dtype_size(blob.dtype);
  if (bytes.size() - offset != expected) {
    throw FormatError(origin + ": payload has " + std::to_string(bytes.size() - offset) +
                      " bytes, header " + dims_string(blob.dims) + " needs " +
                      std::to_string(expected));
  }
  blob.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return blob;
}

static void write_bytes_atomic(const fs::path& path, std::span<const uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_blob(const fs::path& path, const Blob& blob) {
  const std::vector<uint8_t> bytes = encode_blob(blob);
  write_bytes_atomic(path, bytes);
}

Blob read_blob(const fs::path& path) { return decode_blob(read_file(path), path.string()); }

BlobHeader read_blob_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<uint8_t> head(6);
  in.read(reinterpret_cast<char*>(head.data()), 6);
  if (in.gcount() == 6) {
    head.resize(6 + 4 * static_cast<std::size_t>(head[5]));
    in.read(reinterpret_cast<char*>(head.data() + 6), static_cast<std::streamsize>(head.size() - 6));
  }
  std::size_t offset = 0;
  BlobHeader header = decode_header(head, path.string(), &offset);
  in.seekg(0, std::ios::end);
  const auto total = static_cast<std::size_t>(in.tellg());
  std::size_t count = 1;
  for (uint32_t d : header.dims) count *= d;
  if (total != offset + count * dtype_size(header.dtype)) {
    throw FormatError(path.string() + ": file size does not match header " +
                      dims_string(header.dims));
  }
  return header;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_bytes_atomic(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path manifest_path(const fs::path& dir) { return dir / "manifest.json"; }

json load_manifest(const fs::path& dir) {
  const json m = read_json(manifest_path(dir));
  if (m.value("schema_version", 0) != kSchemaVersion) {
    throw FormatError(manifest_path(dir).string() + ": unsupported schema_version");
  }
  return m;
}

std::vector<float> to_f32(std::span<const Vec3> v) {
  std::vector<float> out;
  out.reserve(v.size() * 3);
  for (const Vec3& p : v) {
    for (int c = 0; c < 3; ++c) out.push_back(static_cast<float>(p[c]));
  }
  return out;
}

std::vector<Vec3> from_f32(const Blob& blob, std::size_t n, const std::string& what) {
  if (blob.dims != std::vector<uint32_t>{static_cast<uint32_t>(n), 3}) {
    throw FormatError(what + " has dims " + dims_string(blob.dims) + ", expected (" +
                      std::to_string(n) + ", 3)");
  }
  const std::vector<float> v = blob.as_f32();
  std::vector<Vec3> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = Vec3(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
  return out;
}

Blob edges_blob(const std::vector<Edge>& edges) {
  std::vector<uint32_t> flat;
  flat.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    flat.push_back(a);
    flat.push_back(b);
  }
  return Blob::u32({static_cast<uint32_t>(edges.size()), 2}, flat);
}

std::vector<Edge> edges_from(const Blob& blob, const std::string& what) {
  if (blob.dims.size() != 2 || blob.dims[1] != 2) throw FormatError(what + " must be E x 2");
  const std::vector<uint32_t> flat = blob.as_u32();
  std::vector<Edge> out(blob.dims[0]);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {flat[2 * i], flat[2 * i + 1]};
  return out;
}

Blob blob_at(const fs::path& dir, const json& manifest, const std::string& key) {
  const json& blobs = manifest.at("blobs");
  if (!blobs.contains(key)) throw FormatError((dir / "manifest.json").string() + ": no blob " + key);
  return read_blob(dir / blobs.at(key).get<std::string>());
}

const char* const kDerivedBlobs[] = {"segments",       "segment_points", "overlap_edges",
                                     "adjacency_edges", "point_features", "view_count"};

}  // namespace

json camera_to_json(const CameraView& camera) {
  return {{"view_id", camera.view_id},
          {"position", vec_json(camera.position)},
          {"look_at", vec_json(camera.look_at)},
          {"up", vec_json(camera.up)},
          {"focal", camera.focal},
          {"principal_point", json::array({camera.principal_point.x(), camera.principal_point.y()})},
          {"resolution", json::array({camera.resolution.width, camera.resolution.height})}};
}

CameraView camera_from_json(const json& j) {
  CameraView cam;
  cam.view_id = j.at("view_id").get<int>();
  cam.position = vec_from(j.at("position"));
  cam.look_at = vec_from(j.at("look_at"));
  cam.up = vec_from(j.at("up"));
  cam.focal = j.at("focal").get<double>();
  cam.principal_point = Vec2(j.at("principal_point").at(0).get<double>(),
                             j.at("principal_point").at(1).get<double>());
  cam.resolution = {j.at("resolution").at(0).get<int>(), j.at("resolution").at(1).get<int>()};
  cam.validate();
  return cam;
}

Blob labels_blob(std::span<const int32_t> labels) {
  std::vector<uint32_t> raw(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    raw[i] = labels[i] < 0 ? kNoLabel : static_cast<uint32_t>(labels[i]);
  }
  return Blob::u32({static_cast<uint32_t>(labels.size())}, raw);
}

std::vector<int32_t> labels_from_blob(const Blob& blob) {
  if (blob.dims.size() != 1) throw FormatError("labels blob must be one-dimensional");
  const std::vector<uint32_t> raw = blob.as_u32();
  std::vector<int32_t> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = raw[i] == kNoLabel ? kIgnoreLabel : static_cast<int32_t>(raw[i]);
  }
  return out;
}

void write_raw_shape(const fs::path& dir, const RawShape& shape) {
  shape.cloud.validate();
  if (shape.masks.size() != shape.cameras.size() || shape.grids.size() != shape.cameras.size()) {
    throw ConfigError(shape.name + ": cameras, mask stacks and feature grids must align");
  }
  fs::create_directories(dir);
  const std::size_t n = shape.cloud.size();
  const auto n32 = static_cast<uint32_t>(n);
  json blobs = json::object();
  auto put = [&](const std::string& key, const Blob& blob) {
    const std::string file = key + ".sgb";
    write_blob(dir / file, blob);
    blobs[key] = file;
  };
  put("positions", Blob::f32({n32, 3}, to_f32(shape.cloud.positions)));
  put("normals", Blob::f32({n32, 3}, to_f32(shape.cloud.normals)));
  if (shape.cloud.has_colors()) put("colors", Blob::f32({n32, 3}, to_f32(shape.cloud.colors)));
  if (shape.cloud.has_labels()) put("labels", labels_blob(shape.cloud.labels));

  int channels = shape.grids.empty() ? 0 : shape.grids.front().channels;
  int patch = shape.grids.empty() ? kDefaultPatchSize : shape.grids.front().patch_size;
  json cameras = json::array();
  for (std::size_t v = 0; v < shape.cameras.size(); ++v) {
    const CameraView& cam = shape.cameras[v];
    const MaskStack& stack = shape.masks[v];
    const PatchFeatureGrid& grid = shape.grids[v];
    if (stack.view_id != cam.view_id || grid.view_id != cam.view_id) {
      throw ConfigError(shape.name + ": view ids of masks/features do not match camera " +
                        std::to_string(cam.view_id));
    }
    if (grid.channels != channels || grid.patch_size != patch) {
      throw ConfigError(shape.name + ": feature grids disagree on channels or patch size");
    }
    grid.validate(cam.resolution);
    cameras.push_back(camera_to_json(cam));
    const auto w = static_cast<uint32_t>(cam.resolution.width);
    const auto h = static_cast<uint32_t>(cam.resolution.height);
    std::vector<uint8_t> flat;
    flat.reserve(stack.masks.size() * w * h);
    for (const auto& mask : stack.masks) {
      if (mask.size() != static_cast<std::size_t>(w) * h) throw ShapeError("mask size mismatch");
      for (uint8_t px : mask) flat.push_back(px ? 1 : 0);
    }
    put("masks_" + std::to_string(v),
        Blob::u8({static_cast<uint32_t>(stack.masks.size()), h, w}, flat));
    put("features_" + std::to_string(v),
        Blob::f32({static_cast<uint32_t>(grid.rows), static_cast<uint32_t>(grid.cols),
                   static_cast<uint32_t>(grid.channels)},
                  grid.data));
  }

  json manifest = {{"schema_version", kSchemaVersion},
                   {"name", shape.name},
                   {"category", shape.cloud.category},
                   {"K", shape.cloud.num_classes},
                   {"class_names", shape.class_names},
                   {"num_points", n},
                   {"num_views", shape.cameras.size()},
                   {"C_in", channels},
                   {"patch_size", patch},
                   {"split", shape.split},
                   {"cameras", cameras},
                   {"blobs", blobs},
                   {"provenance", shape.provenance}};
  write_text_atomic(manifest_path(dir), dump(manifest));
}

RawShape read_raw_shape(const fs::path& dir) {
  const json m = load_manifest(dir);
  RawShape shape;
  shape.name = m.at("name").get<std::string>();
  shape.split = m.value("split", "test");
  shape.class_names = m.value("class_names", std::vector<std::string>{});
  shape.provenance = m.value("provenance", json::object());
  const std::size_t n = m.at("num_points").get<std::size_t>();
  const json& blobs = m.at("blobs");
  PointCloud& cloud = shape.cloud;
  cloud.category = m.value("category", "");
  cloud.num_classes = m.at("K").get<int>();
  cloud.positions = from_f32(blob_at(dir, m, "positions"), n, "positions");
  cloud.normals = from_f32(blob_at(dir, m, "normals"), n, "normals");
  if (blobs.contains("colors")) cloud.colors = from_f32(blob_at(dir, m, "colors"), n, "colors");
  if (blobs.contains("labels")) {
    cloud.labels = labels_from_blob(blob_at(dir, m, "labels"));
    if (cloud.labels.size() != n) throw FormatError(dir.string() + ": labels count mismatch");
  }
  cloud.validate();

  const int channels = m.at("C_in").get<int>();
  const int patch = m.at("patch_size").get<int>();
  for (std::size_t v = 0; v < m.at("cameras").size(); ++v) {
    const CameraView cam = camera_from_json(m.at("cameras").at(v));
    shape.cameras.push_back(cam);

    const Blob masks = blob_at(dir, m, "masks_" + std::to_string(v));
    const auto w = static_cast<uint32_t>(cam.resolution.width);
    const auto h = static_cast<uint32_t>(cam.resolution.height);
    if (masks.dims.size() != 3 || masks.dims[1] != h || masks.dims[2] != w) {
      throw FormatError(dir.string() + ": masks_" + std::to_string(v) + " has dims " +
                        dims_string(masks.dims));
    }
    MaskStack stack;
    stack.view_id = cam.view_id;
    stack.resolution = cam.resolution;
    const std::size_t px = static_cast<std::size_t>(w) * h;
    for (uint32_t k = 0; k < masks.dims[0]; ++k) {
      stack.masks.emplace_back(masks.payload.begin() + static_cast<std::ptrdiff_t>(k * px),
                               masks.payload.begin() + static_cast<std::ptrdiff_t>((k + 1) * px));
    }
    shape.masks.push_back(std::move(stack));

    const Blob features = blob_at(dir, m, "features_" + std::to_string(v));
    if (features.dims.size() != 3 || static_cast<int>(features.dims[2]) != channels) {
      throw FormatError(dir.string() + ": features_" + std::to_string(v) + " has dims " +
                        dims_string(features.dims));
    }
    PatchFeatureGrid grid;
    grid.view_id = cam.view_id;
    grid.rows = static_cast<int>(features.dims[0]);
    grid.cols = static_cast<int>(features.dims[1]);
    grid.channels = channels;
    grid.patch_size = patch;
    grid.data = features.as_f32();
    grid.validate(cam.resolution);
    shape.grids.push_back(std::move(grid));
  }
  return shape;
}

void write_artifacts(const fs::path& dir, const ShapeArtifacts& artifacts) {
  json m = load_manifest(dir);
  json& blobs = m["blobs"];
  auto put = [&](const std::string& key, const Blob& blob) {
    const std::string file = key + ".sgb";
    write_blob(dir / file, blob);
    blobs[key] = file;
  };
  const SegmentSet& segs = artifacts.segments;
  std::vector<uint32_t> table;
  std::vector<uint32_t> members;
  for (const Segment& s : segs.segments) {
    table.push_back(static_cast<uint32_t>(s.view_id));
    table.push_back(static_cast<uint32_t>(s.point_ids.size()));
    members.insert(members.end(), s.point_ids.begin(), s.point_ids.end());
  }
  put("segments", Blob::u32({static_cast<uint32_t>(segs.size()), 2}, table));
  put("segment_points", Blob::u32({static_cast<uint32_t>(members.size())}, members));
  put("overlap_edges", edges_blob(artifacts.graph.overlap_edges));
  put("adjacency_edges", edges_blob(artifacts.graph.adjacency_edges));
  const PointFeatureBank& bank = artifacts.features;
  std::vector<float> feats(bank.features.begin(), bank.features.end());
  put("point_features", Blob::f32({static_cast<uint32_t>(bank.num_points),
                                   static_cast<uint32_t>(bank.channels)},
                                  feats));
  put("view_count", Blob::u32({static_cast<uint32_t>(bank.num_points)}, bank.view_count));
  write_text_atomic(manifest_path(dir), dump(m));
}

bool has_artifacts(const fs::path& dir) {
  const json m = load_manifest(dir);
  for (const char* key : kDerivedBlobs) {
    if (!m.at("blobs").contains(key)) return false;
  }
  return true;
}

ShapeArtifacts read_artifacts(const fs::path& dir) {
  const json m = load_manifest(dir);
  if (!has_artifacts(dir)) {
    throw ConfigError(dir.string() + ": shape is not preprocessed (run `seggraph preprocess`)");
  }
  const RawShape raw = read_raw_shape(dir);
  ShapeArtifacts out;
  out.name = raw.name;
  out.cloud = raw.cloud;
  out.cameras = raw.cameras;
  const std::size_t n = out.cloud.size();

  const Blob table = blob_at(dir, m, "segments");
  if (table.dims.size() != 2 || table.dims[1] != 2) throw FormatError("segments must be S x 2");
  const std::vector<uint32_t> rows = table.as_u32();
  const std::vector<uint32_t> members = blob_at(dir, m, "segment_points").as_u32();
  std::size_t offset = 0;
  for (uint32_t s = 0; s < table.dims[0]; ++s) {
    Segment seg;
    seg.view_id = static_cast<int>(rows[2 * s]);
    const uint32_t count = rows[2 * s + 1];
    if (offset + count > members.size()) throw FormatError("segment_points is too short");
    seg.point_ids.assign(members.begin() + static_cast<std::ptrdiff_t>(offset),
                         members.begin() + static_cast<std::ptrdiff_t>(offset + count));
    offset += count;
    bool found = false;
    for (const CameraView& cam : out.cameras) {
      if (cam.view_id == seg.view_id) {
        seg.camera_position = cam.position;
        found = true;
      }
    }
    if (!found) throw FormatError("segment references unknown view " + std::to_string(seg.view_id));
    out.segments.segments.push_back(std::move(seg));
  }
  if (offset != members.size()) throw FormatError("segment_points has trailing entries");
  out.segments.rebuild(out.cloud);

  out.graph.node_count = static_cast<uint32_t>(out.segments.size());
  out.graph.overlap_edges = edges_from(blob_at(dir, m, "overlap_edges"), "overlap_edges");
  out.graph.adjacency_edges = edges_from(blob_at(dir, m, "adjacency_edges"), "adjacency_edges");
  out.graph.validate(&out.segments);

  const Blob feats = blob_at(dir, m, "point_features");
  if (feats.dims.size() != 2 || feats.dims[0] != n) throw FormatError("point_features dims mismatch");
  out.features.num_points = n;
  out.features.channels = static_cast<int>(feats.dims[1]);
  const std::vector<float> f = feats.as_f32();
  out.features.features.assign(f.begin(), f.end());
  out.features.view_count = blob_at(dir, m, "view_count").as_u32();
  if (out.features.view_count.size() != n) throw FormatError("view_count dims mismatch");
  return out;
}

std::vector<std::string> validate_shape_dir(const fs::path& dir) {
  std::vector<std::string> problems;
  json m;
  try {
    m = load_manifest(dir);
  } catch (const std::exception& e) {
    return {e.what()};
  }
  auto check = [&](const std::string& key, DType dtype, const std::vector<int64_t>& dims) {
    if (!m["blobs"].contains(key)) {
      problems.push_back("missing blob entry " + key);
      return;
    }
    const fs::path path = dir / m["blobs"][key].get<std::string>();
    if (!fs::exists(path)) {
      problems.push_back(key + ": file " + path.string() + " does not exist");
      return;
    }
    try {
      const BlobHeader header = read_blob_header(path);
      if (header.dtype != dtype) {
        problems.push_back(key + ": dtype " + dtype_name(header.dtype) + ", expected " +
                           dtype_name(dtype));
      }
      bool ok = header.dims.size() == dims.size();
      for (std::size_t i = 0; ok && i < dims.size(); ++i) {
        ok = dims[i] < 0 || header.dims[i] == static_cast<uint32_t>(dims[i]);
      }
      if (!ok) problems.push_back(key + ": dims " + dims_string(header.dims) + " do not match manifest");
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  };
  try {
    const auto n = m.at("num_points").get<int64_t>();
    const auto c = m.at("C_in").get<int64_t>();
    const auto patch = m.at("patch_size").get<int64_t>();
    const auto& cams = m.at("cameras");
    if (m.at("num_views").get<std::size_t>() != cams.size()) {
      problems.push_back("num_views does not match the camera records");
    }
    check("positions", DType::kF32, {n, 3});
    check("normals", DType::kF32, {n, 3});
    if (m["blobs"].contains("colors")) check("colors", DType::kF32, {n, 3});
    if (m["blobs"].contains("labels")) check("labels", DType::kU32, {n});
    for (std::size_t v = 0; v < cams.size(); ++v) {
      const auto w = cams[v].at("resolution").at(0).get<int64_t>();
      const auto h = cams[v].at("resolution").at(1).get<int64_t>();
      check("masks_" + std::to_string(v), DType::kU8, {-1, h, w});
      const int64_t rows = (h + patch - 1) / patch;
      const int64_t cols = (w + patch - 1) / patch;
      check("features_" + std::to_string(v), DType::kF32, {rows, cols, c});
    }
    if (m["blobs"].contains("segments")) {
      check("segments", DType::kU32, {-1, 2});
      check("segment_points", DType::kU32, {-1});
      check("overlap_edges", DType::kU32, {-1, 2});
      check("adjacency_edges", DType::kU32, {-1, 2});
      check("point_features", DType::kF32, {n, c});
      check("view_count", DType::kU32, {n});
    }
  } catch (const json::exception& e) {
    problems.push_back(std::string("manifest: ") + e.what());
  }
  return problems;
}

void write_corpus_index(const fs::path& dir, const CorpusIndex& index) {
  json shapes = json::array();
  for (const CorpusEntry& e : index.shapes) shapes.push_back({{"name", e.name}, {"split", e.split}});
  const json j = {{"schema_version", kSchemaVersion},
                  {"category", index.category},
                  {"K", index.num_classes},
                  {"class_names", index.class_names},
                  {"shapes", shapes},
                  {"provenance", index.provenance}};
  fs::create_directories(dir);
  write_text_atomic(dir / "corpus.json", dump(j));
}

CorpusIndex read_corpus_index(const fs::path& dir) {
  const json j = read_json(dir / "corpus.json");
  CorpusIndex index;
  index.category = j.at("category").get<std::string>();
  index.num_classes = j.at("K").get<int>();
  index.class_names = j.value("class_names", std::vector<std::string>{});
  index.provenance = j.value("provenance", json::object());
  for (const json& s : j.at("shapes")) {
    index.shapes.push_back({s.at("name").get<std::string>(), s.at("split").get<std::string>()});
  }
  return index;
}

std::vector<ShapeArtifacts> load_split(const fs::path& corpus_dir, const std::string& split) {
  const CorpusIndex index = read_corpus_index(corpus_dir);
  std::vector<ShapeArtifacts> out;
  for (const CorpusEntry& e : index.shapes) {
    if (split == "all" || e.split == split) out.push_back(read_artifacts(corpus_dir / e.name));
  }
  return out;
}

json ablation_to_json(const AblationFlags& flags) {
  return {{"use_segments", flags.use_segments},
          {"segment_encoder", flags.segment_encoder},
          {"quality_unpool", flags.quality_unpool},
          {"overlap_edges", flags.overlap_edges},
          {"adjacency_edges", flags.adjacency_edges}};
}

AblationFlags ablation_from_json(const json& j) {
  AblationFlags f;
  f.use_segments = j.value("use_segments", true);
  f.segment_encoder = j.value("segment_encoder", true);
  f.quality_unpool = j.value("quality_unpool", true);
  f.overlap_edges = j.value("overlap_edges", true);
  f.adjacency_edges = j.value("adjacency_edges", true);
  return f;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& checkpoint) {
  check_model_params(checkpoint.model, checkpoint.params);
  fs::create_directories(dir / "params");
  const ModelConfig& c = checkpoint.model;
  json params = json::array();
  for (const auto& p : checkpoint.params.params()) {
    std::vector<uint32_t> dims(p.value.dims().begin(), p.value.dims().end());
    const std::string file = "params/" + p.name + ".sgb";
    write_blob(dir / file, Blob::f32(dims, p.value.vec()));
    params.push_back({{"name", p.name}, {"dims", dims}, {"file", file}});
  }
  const json j = {{"schema_version", kSchemaVersion},
                  {"model",
                   {{"input_channels", c.input_channels},
                    {"channels", c.channels},
                    {"num_classes", c.num_classes},
                    {"heads", c.heads},
                    {"gat_layers", c.gat_layers},
                    {"quality_hidden", c.quality_hidden},
                    {"leaky_slope", c.leaky_slope},
                    {"ablation", ablation_to_json(c.ablation)}}},
                  {"params", params},
                  {"train", checkpoint.train_info}};
  write_text_atomic(dir / "checkpoint.json", dump(j));
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const json j = read_json(dir / "checkpoint.json");
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw FormatError((dir / "checkpoint.json").string() + ": unsupported schema_version");
  }
  Checkpoint out;
  const json& m = j.at("model");
  out.model.input_channels = m.at("input_channels").get<int>();
  out.model.channels = m.at("channels").get<int>();
  out.model.num_classes = m.at("num_classes").get<int>();
  out.model.heads = m.at("heads").get<int>();
  out.model.gat_layers = m.at("gat_layers").get<int>();
  out.model.quality_hidden = m.at("quality_hidden").get<int>();
  out.model.leaky_slope = m.at("leaky_slope").get<double>();
  out.model.ablation = ablation_from_json(m.at("ablation"));
  out.model.validate();
  for (const json& p : j.at("params")) {
    const Blob blob = read_blob(dir / p.at("file").get<std::string>());
    const auto dims = p.at("dims").get<std::vector<uint32_t>>();
    if (blob.dims != dims) throw FormatError(p.at("file").get<std::string>() + ": dims mismatch");
    nn::Tensor<float> value(std::vector<std::size_t>(dims.begin(), dims.end()));
    value.vec() = blob.as_f32();
    out.params.add(p.at("name").get<std::string>(), std::move(value));
  }
  out.train_info = j.value("train", json::object());
  check_model_params(out.model, out.params);
  return out;
}

}  // namespace seggraph
