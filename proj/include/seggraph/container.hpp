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

// On-disk format. A blob is
//
//   "SGB1" | dtype u8 | ndims u8 | dims u32[ndims] | payload
//
// with dtype 0 = f32, 1 = u32, 2 = u16, 3 = u8 and a row-major little-endian
// payload. A shape directory holds manifest.json plus one blob per array; a
// corpus directory holds corpus.json plus one shape directory per shape.

#pragma once

#include "seggraph/model.hpp"
#include "seggraph/nn/params.hpp"
#include "seggraph/pipeline.hpp"
#include "seggraph/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace seggraph {

namespace fs = std::filesystem;

enum class DType : uint8_t { kF32 = 0, kU32 = 1, kU16 = 2, kU8 = 3 };

std::size_t dtype_size(DType dtype);
const char* dtype_name(DType dtype);

inline constexpr uint32_t kNoLabel = 0xFFFFFFFFu;

struct Blob {
  DType dtype = DType::kU8;
  std::vector<uint32_t> dims;
  std::vector<uint8_t> payload;  // little-endian

  std::size_t element_count() const;
  bool operator==(const Blob&) const = default;

  static Blob f32(std::vector<uint32_t> dims, std::span<const float> values);
  static Blob u32(std::vector<uint32_t> dims, std::span<const uint32_t> values);
  static Blob u16(std::vector<uint32_t> dims, std::span<const uint16_t> values);
  static Blob u8(std::vector<uint32_t> dims, std::span<const uint8_t> values);

  std::vector<float> as_f32() const;
  std::vector<uint32_t> as_u32() const;
  std::vector<uint16_t> as_u16() const;
  std::vector<uint8_t> as_u8() const;
};

std::vector<uint8_t> encode_blob(const Blob& blob);
Blob decode_blob(std::span<const uint8_t> bytes, const std::string& origin = "<memory>");

/// Writes through a temporary file and a rename.
void write_blob(const fs::path& path, const Blob& blob);
Blob read_blob(const fs::path& path);

struct BlobHeader {
  DType dtype = DType::kU8;
  std::vector<uint32_t> dims;
};
BlobHeader read_blob_header(const fs::path& path);

/// Writes text through a temporary file and a rename.
void write_text_atomic(const fs::path& path, const std::string& text);
nlohmann::json read_json(const fs::path& path);

inline constexpr int kSchemaVersion = 1;

nlohmann::json camera_to_json(const CameraView& camera);
CameraView camera_from_json(const nlohmann::json& j);

/// Writes manifest.json and the input blobs (geometry, labels, per-view masks
/// and features) of a raw shape. Derived blobs are not touched.
void write_raw_shape(const fs::path& dir, const RawShape& shape);
RawShape read_raw_shape(const fs::path& dir);

/// Adds the preprocessing outputs (segments, graph, pooled features) to a
/// shape directory and records them in its manifest.
void write_artifacts(const fs::path& dir, const ShapeArtifacts& artifacts);
bool has_artifacts(const fs::path& dir);
ShapeArtifacts read_artifacts(const fs::path& dir);

/// Every referenced blob exists and its header matches the manifest.
/// Returns the list of problems; empty means valid.
std::vector<std::string> validate_shape_dir(const fs::path& dir);

struct CorpusEntry {
  std::string name;
  std::string split;
};

struct CorpusIndex {
  std::string category;
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<CorpusEntry> shapes;
  nlohmann::json provenance = nlohmann::json::object();
};

void write_corpus_index(const fs::path& dir, const CorpusIndex& index);
CorpusIndex read_corpus_index(const fs::path& dir);

/// Loads the preprocessed shapes of one split ("train", "test" or "all"),
/// in corpus order.
std::vector<ShapeArtifacts> load_split(const fs::path& corpus_dir, const std::string& split);

struct Checkpoint {
  ModelConfig model;
  nn::ParamStore<float> params;
  nlohmann::json train_info = nlohmann::json::object();
};

void save_checkpoint(const fs::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const fs::path& dir);

nlohmann::json ablation_to_json(const AblationFlags& flags);
AblationFlags ablation_from_json(const nlohmann::json& j);

/// Labels as u32 with kNoLabel for -1.
Blob labels_blob(std::span<const int32_t> labels);
std::vector<int32_t> labels_from_blob(const Blob& blob);

}  // namespace seggraph
