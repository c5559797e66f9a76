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
#include "seggraph/pipeline.hpp"
#include "seggraph/train.hpp"

#include <doctest.h>

#include <fstream>
#include <limits>

using namespace seggraph;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("seggraph_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<uint8_t> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SynthConfig tiny() {
  SynthConfig c;
  c.seed = 13;
  c.num_shapes = 3;
  c.train_shapes = 2;
  c.points_per_shape = 300;
  c.input_channels = 8;
  return c;
}

}  // namespace

TEST_SUITE("container") {

TEST_CASE("blob round trips for every dtype") {
  const std::vector<float> f{1.5f, -0.0f, std::numeric_limits<float>::infinity(), 3e-38f, 7.0f,
                             -2.25f};
  const Blob bf = Blob::f32({2, 3}, f);
  const Blob back = decode_blob(encode_blob(bf));
  CHECK(back == bf);
  const std::vector<float> g = back.as_f32();
  CHECK(std::memcmp(g.data(), f.data(), f.size() * sizeof(float)) == 0);

  const std::vector<uint32_t> u{0, 1, 0xFFFFFFFFu, 123456789};
  CHECK(decode_blob(encode_blob(Blob::u32({4}, u))).as_u32() == u);
  const std::vector<uint16_t> h{0, 65535, 42};
  CHECK(decode_blob(encode_blob(Blob::u16({3, 1}, h))).as_u16() == h);
  const std::vector<uint8_t> b{0, 255, 1, 2};
  CHECK(decode_blob(encode_blob(Blob::u8({2, 2}, b))).as_u8() == b);
}

TEST_CASE("blob header layout") {
  const std::vector<uint8_t> bytes = encode_blob(Blob::u16({3}, std::vector<uint16_t>{1, 2, 258}));
  REQUIRE(bytes.size() == 4 + 1 + 1 + 4 + 6);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SGB1");
  CHECK(bytes[4] == 2);
  CHECK(bytes[5] == 1);
  CHECK(bytes[6] == 3);
  CHECK(bytes[7] == 0);
  CHECK(bytes[14] == 2);
  CHECK(bytes[15] == 1);
}

TEST_CASE("malformed blobs raise format errors") {
  std::vector<uint8_t> bytes = encode_blob(Blob::u8({4}, std::vector<uint8_t>{1, 2, 3, 4}));
  std::vector<uint8_t> bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_blob(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_blob(bad), FormatError);
  bad = bytes;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_blob(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(decode_blob(bad), FormatError);
  CHECK_THROWS_AS(decode_blob(std::vector<uint8_t>{'S', 'G'}), FormatError);
  CHECK_THROWS_AS(Blob::u8({4}, std::vector<uint8_t>{1}), ShapeError);
}

TEST_CASE("labels blob uses the sentinel for ignored points") {
  const std::vector<int32_t> labels{0, -1, 3};
  const Blob b = labels_blob(labels);
  CHECK(b.as_u32() == std::vector<uint32_t>{0, kNoLabel, 3});
  CHECK(labels_from_blob(b) == labels);
}

TEST_CASE("blob files round trip") {
  TempDir tmp("blob");
  const Blob b = Blob::f32({1, 2}, std::vector<float>{0.25f, 8.0f});
  write_blob(tmp.path / "x.sgb", b);
  CHECK(read_blob(tmp.path / "x.sgb") == b);
  const BlobHeader h = read_blob_header(tmp.path / "x.sgb");
  CHECK(h.dtype == DType::kF32);
  CHECK(h.dims == std::vector<uint32_t>{1, 2});
  CHECK_FALSE(fs::exists(tmp.path / "x.sgb.tmp"));
}

TEST_CASE("raw shapes and artifacts round trip bit for bit") {
  TempDir tmp("shape");
  const RawShape raw = synthesize_raw_shape(tiny(), 0);
  write_raw_shape(tmp.path, raw);
  const RawShape back = read_raw_shape(tmp.path);
  CHECK(back.cloud.positions == raw.cloud.positions);
  CHECK(back.cloud.normals == raw.cloud.normals);
  CHECK(back.cloud.labels == raw.cloud.labels);
  REQUIRE(back.masks.size() == raw.masks.size());
  for (std::size_t v = 0; v < raw.masks.size(); ++v) CHECK(back.masks[v].masks == raw.masks[v].masks);
  for (std::size_t v = 0; v < raw.grids.size(); ++v) CHECK(back.grids[v].data == raw.grids[v].data);
  CHECK_FALSE(has_artifacts(tmp.path));
  CHECK_THROWS_AS(read_artifacts(tmp.path), ConfigError);

  const ShapeArtifacts art = preprocess_shape(back);
  write_artifacts(tmp.path, art);
  CHECK(has_artifacts(tmp.path));
  CHECK(validate_shape_dir(tmp.path).empty());
  const ShapeArtifacts loaded = read_artifacts(tmp.path);
  REQUIRE(loaded.segments.size() == art.segments.size());
  for (std::size_t s = 0; s < art.segments.size(); ++s) {
    CHECK(loaded.segments.segments[s].view_id == art.segments.segments[s].view_id);
    CHECK(loaded.segments.segments[s].point_ids == art.segments.segments[s].point_ids);
  }
  CHECK(loaded.graph == art.graph);
  CHECK(loaded.features.features == art.features.features);
  CHECK(loaded.features.view_count == art.features.view_count);

  // Preprocessing the reloaded shape again reproduces identical blob files.
  const auto before = file_bytes(tmp.path / "point_features.sgb");
  const auto edges = file_bytes(tmp.path / "adjacency_edges.sgb");
  write_artifacts(tmp.path, preprocess_shape(read_raw_shape(tmp.path)));
  CHECK(file_bytes(tmp.path / "point_features.sgb") == before);
  CHECK(file_bytes(tmp.path / "adjacency_edges.sgb") == edges);
}

TEST_CASE("validation reports broken shape directories") {
  TempDir tmp("broken");
  const RawShape raw = synthesize_raw_shape(tiny(), 1);
  write_raw_shape(tmp.path, raw);
  write_artifacts(tmp.path, preprocess_shape(raw));
  REQUIRE(validate_shape_dir(tmp.path).empty());

  write_blob(tmp.path / "view_count.sgb", Blob::u32({2}, std::vector<uint32_t>{0, 0}));
  CHECK_FALSE(validate_shape_dir(tmp.path).empty());
  fs::remove(tmp.path / "view_count.sgb");
  CHECK_FALSE(validate_shape_dir(tmp.path).empty());
  fs::remove(tmp.path / "manifest.json");
  CHECK_FALSE(validate_shape_dir(tmp.path).empty());
}

TEST_CASE("checkpoints round trip and are byte-identical across runs") {
  const Corpus corpus = synthesize_corpus(tiny());
  TrainConfig t;
  t.shots = 2;
  t.epochs = 3;
  t.channels = 8;
  t.seed = 3;
  TempDir a("ckpt_a"), b("ckpt_b");
  for (const fs::path& dir : {a.path, b.path}) {
    const TrainedModel m = train_fewshot(t, corpus.train);
    save_checkpoint(dir, Checkpoint{m.config, m.params, {{"epochs", 3}}});
  }
  const Checkpoint loaded = load_checkpoint(a.path);
  const TrainedModel m = train_fewshot(t, corpus.train);
  CHECK(loaded.params == m.params);
  CHECK(loaded.model.ablation == m.config.ablation);
  CHECK(loaded.model.channels == 8);
  CHECK(loaded.train_info.at("epochs") == 3);
  CHECK(file_bytes(a.path / "checkpoint.json") == file_bytes(b.path / "checkpoint.json"));
  for (const auto& entry : fs::directory_iterator(a.path / "params")) {
    CHECK(file_bytes(entry.path()) == file_bytes(b.path / "params" / entry.path().filename()));
  }
  const Prediction p = predict_labels(loaded.model, loaded.params, corpus.test[0]);
  CHECK(p.labels == predict_labels(m.config, m.params, corpus.test[0]).labels);
}

TEST_CASE("ablation flags round trip through JSON") {
  AblationFlags f;
  f.overlap_edges = false;
  f.quality_unpool = false;
  CHECK(ablation_from_json(ablation_to_json(f)) == f);
}

}  // TEST_SUITE
