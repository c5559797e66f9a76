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

// seggraph: command-line front end for the few-shot part segmentation
// pipeline (synth -> preprocess -> train -> predict -> eval).

#include "seggraph/container.hpp"
#include "seggraph/errors.hpp"
#include "seggraph/metrics.hpp"
#include "seggraph/model_gradcheck.hpp"
#include "seggraph/pipeline.hpp"
#include "seggraph/report.hpp"
#include "seggraph/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace seggraph;
using nlohmann::json;

constexpr double kGradTolerance = 1e-4;

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log_timing(const json& record) { std::cerr << record.dump() << "\n"; }

struct AblationOptions {
  bool no_segment_encoder = false;
  bool uniform_unpool = false;
  bool no_overlap_edges = false;
  bool no_adjacency_edges = false;
  bool no_graph = false;
  bool mlp_baseline = false;

  AblationFlags flags() const {
    AblationFlags f;
    f.use_segments = !mlp_baseline;
    f.segment_encoder = !no_segment_encoder;
    f.quality_unpool = !uniform_unpool;
    f.overlap_edges = !(no_overlap_edges || no_graph);
    f.adjacency_edges = !(no_adjacency_edges || no_graph);
    return f;
  }
};

void add_ablation_flags(CLI::App* cmd, AblationOptions& o) {
  const std::string group = "Ablation";
  cmd->add_flag("--no-segment-encoder", o.no_segment_encoder,
                "segment feature = mean of member point features")
      ->group(group);
  cmd->add_flag("--uniform-unpool", o.uniform_unpool,
                "uniform unpooling instead of view-quality weights")
      ->group(group);
  cmd->add_flag("--no-overlap-edges", o.no_overlap_edges, "drop overlap edges")->group(group);
  cmd->add_flag("--no-adjacency-edges", o.no_adjacency_edges, "drop adjacency edges")
      ->group(group);
  cmd->add_flag("--no-graph", o.no_graph, "drop both edge types")->group(group);
  cmd->add_flag("--mlp-baseline", o.mlp_baseline,
                "no segments at all: head on projected point features")
      ->group(group);
}

struct TrainOptions {
  uint64_t seed = 0;
  int shots = 8;
  int epochs = 100;
  double lr = 1e-3;
  int channels = 96;
  AblationOptions ablation;

  TrainConfig config(const std::string& category) const {
    TrainConfig c;
    c.seed = seed;
    c.shots = shots;
    c.epochs = epochs;
    c.lr = lr;
    c.channels = channels;
    c.ablation = ablation.flags();
    c.category = category;
    return c;
  }
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--shots", o.shots, "labeled training shapes")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "full-batch Adam steps")->capture_default_str();
  cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--channels", o.channels, "hidden width C")->capture_default_str();
  add_ablation_flags(cmd, o.ablation);
}

void add_preprocess_options(CLI::App* cmd, PreprocessOptions& o) {
  const std::string group = "Preprocess";
  cmd->add_option("--splat", o.splat, "z-buffer splat radius in pixels")
      ->capture_default_str()
      ->group(group);
  cmd->add_option("--depth-epsilon", o.depth_epsilon, "visibility depth tolerance")
      ->capture_default_str()
      ->group(group);
  cmd->add_option("--min-region-pixels", o.min_region_pixels, "smallest kept mask region")
      ->capture_default_str()
      ->group(group);
  cmd->add_option("--min-segment-points", o.min_segment_points, "smallest kept segment")
      ->capture_default_str()
      ->group(group);
  cmd->add_option("--iou-threshold", o.iou_threshold, "overlap edge IoU threshold")
      ->capture_default_str()
      ->group(group);
  cmd->add_option("--adjacency-distance", o.adjacency_distance, "adjacency edge distance")
      ->capture_default_str()
      ->group(group);
}

bool is_corpus_dir(const fs::path& p) { return fs::exists(p / "corpus.json"); }

/// Shape directories addressed by PATH: every shape of a corpus, or PATH itself.
std::vector<fs::path> shape_dirs(const fs::path& path) {
  if (!is_corpus_dir(path)) return {path};
  std::vector<fs::path> dirs;
  for (const CorpusEntry& e : read_corpus_index(path).shapes) dirs.push_back(path / e.name);
  return dirs;
}

json merge_log_json(const std::vector<MergeEvent>& log) {
  json events = json::array();
  for (const MergeEvent& e : log) {
    events.push_back({{"view", e.view_id},
                      {"labels", {e.label_a, e.label_b}},
                      {"probability", e.probability},
                      {"draw", e.draw},
                      {"merged", e.merged}});
  }
  return events;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  SynthConfig config;
  int width = 112;
  int height = 112;
  std::string out;
  bool preprocess = false;
  PreprocessOptions options;
  int jobs = 1;
};

void run_synth(SynthArgs& a) {
  a.config.resolution = {a.width, a.height};
  a.config.validate();
  const SynthConfig& c = a.config;
  const fs::path out(a.out);
  fs::create_directories(out);

  std::vector<std::string> names(c.num_shapes), splits(c.num_shapes);
  std::vector<StageTimings> timings(c.num_shapes);
  parallel_for(names.size(), a.jobs, [&](std::size_t i) {
    std::vector<MergeEvent> merges;
    RawShape raw = synthesize_raw_shape(c, static_cast<int>(i), &merges);
    raw.provenance["merge_events"] = merge_log_json(merges);
    write_raw_shape(out / raw.name, raw);
    if (a.preprocess) write_artifacts(out / raw.name, preprocess_shape(raw, a.options, &timings[i]));
    names[i] = raw.name;
    splits[i] = raw.split;
  });

  CorpusIndex index;
  index.category = c.category;
  index.num_classes = c.parts_per_shape;
  index.class_names.assign(synth_class_names().begin(),
                           synth_class_names().begin() + c.parts_per_shape);
  for (int i = 0; i < c.num_shapes; ++i) index.shapes.push_back({names[i], splits[i]});
  index.provenance = {{"source", "synthetic"},
                      {"seed", c.seed},
                      {"num_shapes", c.num_shapes},
                      {"train_shapes", c.train_shapes},
                      {"parts_per_shape", c.parts_per_shape},
                      {"points_per_shape", c.points_per_shape},
                      {"feature_noise", c.feature_noise},
                      {"prototype_separation", c.prototype_separation},
                      {"split_rate", c.split_rate},
                      {"merge_rate", c.merge_rate},
                      {"input_channels", c.input_channels},
                      {"num_views", c.num_views},
                      {"resolution", {c.resolution.width, c.resolution.height}},
                      {"patch_size", c.patch_size}};
  write_corpus_index(out, index);
  if (a.preprocess) {
    for (int i = 0; i < c.num_shapes; ++i) log_timing(timings[i].to_json(names[i]));
  }
  std::printf("wrote %d shapes (%d train) to %s\n", c.num_shapes, c.train_shapes,
              out.string().c_str());
}

struct PreprocessArgs {
  std::string path;
  PreprocessOptions options;
  int jobs = 1;
};

void run_preprocess(const PreprocessArgs& a) {
  const std::vector<fs::path> dirs = shape_dirs(a.path);
  std::vector<StageTimings> timings(dirs.size());
  std::vector<std::string> names(dirs.size());
  std::vector<std::size_t> segments(dirs.size()), overlap(dirs.size()), adjacency(dirs.size());
  parallel_for(dirs.size(), a.jobs, [&](std::size_t i) {
    const RawShape raw = read_raw_shape(dirs[i]);
    const ShapeArtifacts art = preprocess_shape(raw, a.options, &timings[i]);
    write_artifacts(dirs[i], art);
    names[i] = raw.name;
    segments[i] = art.segments.size();
    overlap[i] = art.graph.overlap_edges.size();
    adjacency[i] = art.graph.adjacency_edges.size();
  });
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    log_timing(timings[i].to_json(names[i]));
    std::printf("%s: %zu segments, %zu overlap edges, %zu adjacency edges\n", names[i].c_str(),
                segments[i], overlap[i], adjacency[i]);
  }
}

void run_validate(const std::string& path) {
  std::size_t problems = 0;
  for (const fs::path& dir : shape_dirs(path)) {
    for (const std::string& p : validate_shape_dir(dir)) {
      std::printf("%s: %s\n", dir.string().c_str(), p.c_str());
      ++problems;
    }
  }
  if (problems > 0) throw FormatError(std::to_string(problems) + " validation problem(s)");
  std::printf("ok\n");
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  TrainOptions train;
};

void run_train(const TrainArgs& a) {
  const CorpusIndex index = read_corpus_index(a.corpus);
  const std::vector<ShapeArtifacts> shapes = load_split(a.corpus, "train");
  const TrainConfig config = a.train.config(index.category);
  const Stopwatch clock;
  const TrainedModel model = train_fewshot(config, shapes);
  const double train_ms = clock.ms();

  Checkpoint ckpt;
  ckpt.model = model.config;
  ckpt.params = model.params;
  ckpt.train_info = {{"category", index.category},
                     {"seed", config.seed},
                     {"shots", config.shots},
                     {"epochs", config.epochs},
                     {"lr", config.lr},
                     {"loss_curve", model.loss_curve},
                     {"train_accuracy", model.train_accuracy}};
  save_checkpoint(a.out, ckpt);
  log_timing({{"category", index.category}, {"train_ms", train_ms}});
  std::printf("%s: trained %s on %d shapes, final loss %.6f, train accuracy %.4f\n",
              index.category.c_str(), config.ablation.describe().c_str(),
              std::min<int>(config.shots, static_cast<int>(shapes.size())),
              model.loss_curve.empty() ? 0.0 : model.loss_curve.back(), model.train_accuracy);
}

struct PredictArgs {
  std::string checkpoint;
  std::string path;
  std::string out;
  int jobs = 1;
};

void run_predict(const PredictArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const bool corpus = is_corpus_dir(a.path);
  std::vector<fs::path> dirs;
  if (corpus) {
    for (const CorpusEntry& e : read_corpus_index(a.path).shapes) {
      if (e.split == "test") dirs.push_back(fs::path(a.path) / e.name);
    }
    fs::create_directories(a.out);
  } else {
    dirs.push_back(a.path);
  }
  std::vector<double> ms(dirs.size());
  std::vector<std::string> names(dirs.size());
  parallel_for(dirs.size(), a.jobs, [&](std::size_t i) {
    const ShapeArtifacts shape = read_artifacts(dirs[i]);
    const Stopwatch clock;
    const Prediction pred = predict_labels(ckpt.model, ckpt.params, shape);
    ms[i] = clock.ms();
    names[i] = shape.name;
    const fs::path target = corpus ? fs::path(a.out) / (shape.name + ".sgb") : fs::path(a.out);
    write_blob(target, labels_blob(pred.labels));
  });
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    log_timing({{"shape", names[i]}, {"inference_ms", ms[i]}});
  }
  std::printf("predicted %zu shape(s)\n", dirs.size());
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  int k = 0;
  std::string checkpoint;
  std::vector<std::string> corpora;
  std::string seeds;
  TrainOptions train;
  std::string json_out;
  int jobs = 1;
};

std::vector<int32_t> read_labels(const fs::path& path) {
  if (fs::is_directory(path)) {
    const RawShape raw = read_raw_shape(path);
    if (!raw.cloud.has_labels()) throw ShapeError(path.string() + " carries no labels");
    return raw.cloud.labels;
  }
  return labels_from_blob(read_blob(path));
}

void print_report(const EvalReport& r) {
  std::printf("miou %.6f\n", r.miou);
  for (std::size_t c = 0; c < r.per_class_iou.size(); ++c) {
    if (r.per_class_iou[c]) {
      std::printf("class %zu iou %.6f\n", c, *r.per_class_iou[c]);
    } else {
      std::printf("class %zu iou absent\n", c);
    }
  }
}

void write_json_out(const std::string& path, const json& j) {
  if (!path.empty()) write_text_atomic(path, j.dump(2) + "\n");
}

json eval_files(const EvalArgs& a) {
  const std::vector<int32_t> pred = read_labels(a.pred);
  const std::vector<int32_t> gt = read_labels(a.gt);
  if (a.k <= 0) throw ConfigError("--k must be positive");
  EvalReport report = mean_iou(pred, gt, a.k);
  small_part_breakdown(report);
  print_report(report);
  return report_to_json(report);
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
  return buf;
}

json eval_checkpoint(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  json out = json::array();
  for (const std::string& dir : a.corpora) {
    const CorpusIndex index = read_corpus_index(dir);
    const std::vector<ShapeArtifacts> test = load_split(dir, "test");
    const std::vector<EvalReport> reports = evaluate_shapes(ckpt.model, ckpt.params, test);
    const CategoryScore score = category_score(reports);
    std::printf("%s: mIoU %.2f, small %s, large %s, point accuracy %.2f (%zu shapes)\n",
                index.category.c_str(), 100.0 * score.miou,
                percent(score.small_miou).c_str(), percent(score.large_miou).c_str(),
                100.0 * score.point_accuracy, score.shapes);
    json shapes = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      shapes.push_back(report_to_json(reports[i], test[i].name));
    }
    out.push_back({{"category", index.category}, {"score", score_to_json(score)}, {"shapes", shapes}});
  }
  return out;
}

json eval_seeds(const EvalArgs& a) {
  const std::vector<uint64_t> seeds =
      a.seeds.empty() ? std::vector<uint64_t>{a.train.seed} : parse_seed_list(a.seeds);
  std::vector<SeedSweep> sweeps;
  for (const std::string& dir : a.corpora) {
    const CorpusIndex index = read_corpus_index(dir);
    const std::vector<ShapeArtifacts> train = load_split(dir, "train");
    const std::vector<ShapeArtifacts> test = load_split(dir, "test");
    const Stopwatch clock;
    sweeps.push_back(seed_sweep(index.category, train, test, a.train.config(index.category),
                                seeds, a.jobs));
    log_timing({{"category", index.category}, {"train_and_eval_ms", clock.ms()}});
    std::printf("%s\n", format_sweep_line(sweeps.back()).c_str());
  }
  json out = {{"variant", a.train.ablation.flags().describe()}, {"categories", json::array()}};
  for (const SeedSweep& s : sweeps) out["categories"].push_back(sweep_to_json(s));
  if (sweeps.size() > 1) {
    std::vector<double> means, sds;
    for (const SeedSweep& s : sweeps) {
      means.push_back(s.miou.mean);
      sds.push_back(s.miou.sd);
    }
    const MeanSd overall = mean_sd(means);
    const MeanSd avg_sd = mean_sd(sds);
    std::printf("overall: mIoU %.2f over %zu categories, average SD %.2f\n", 100.0 * overall.mean,
                sweeps.size(), 100.0 * avg_sd.mean);
    out["overall"] = {{"miou", overall.mean}, {"average_sd", avg_sd.mean}};
  }
  return out;
}

void run_eval(const EvalArgs& a) {
  json out;
  if (!a.pred.empty() || !a.gt.empty()) {
    if (a.pred.empty() || a.gt.empty()) throw ConfigError("--pred and --gt go together");
    out = eval_files(a);
  } else if (a.corpora.empty()) {
    throw ConfigError("eval needs --pred/--gt/--k or at least one --corpus");
  } else if (!a.checkpoint.empty()) {
    out = eval_checkpoint(a);
  } else {
    out = eval_seeds(a);
  }
  write_json_out(a.json_out, out);
}

struct GradcheckArgs {
  uint64_t seed = 0;
  bool skip_model = false;
};

void run_gradcheck(const GradcheckArgs& a) {
  double worst = 0.0;
  for (const nn::OpCheck& c : nn::op_gradcheck_suite(a.seed)) {
    std::printf("%-24s %.3e  (%zu checked, %zu skipped)\n", c.op.c_str(), c.result.max_rel_error,
                c.result.checked, c.result.skipped);
    worst = std::max(worst, c.result.max_rel_error);
  }
  if (!a.skip_model) {
    for (const ModelCheck& c : model_gradcheck_suite(a.seed)) {
      std::printf("%-24s %.3e  (%zu checked, %zu skipped, %.1f s)\n", c.name.c_str(),
                  c.result.max_rel_error, c.result.checked, c.result.skipped, c.seconds);
      worst = std::max(worst, c.result.max_rel_error);
    }
  }
  std::printf("max relative error %.3e (tolerance %.0e)\n", worst, kGradTolerance);
  if (!(worst < kGradTolerance)) throw NumericError("gradient check above tolerance");
}

struct ExportArgs {
  std::string path;
  std::string checkpoint;
  std::string out;
};

void run_export_pca(const ExportArgs& a) {
  const ShapeArtifacts shape = read_artifacts(a.path);
  std::vector<double> features;
  std::size_t cols = 0;
  if (a.checkpoint.empty()) {
    features = shape.features.features;
    cols = static_cast<std::size_t>(shape.features.channels);
  } else {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const nn::Tensor<float> fused = fused_features(ckpt.model, ckpt.params, shape);
    features.assign(fused.vec().begin(), fused.vec().end());
    cols = fused.cols();
  }
  const PcaResult pca = export_pca_colors(features, shape.cloud.size(), cols);
  write_color_ply(a.out, shape.cloud.positions, pca.colors);
  std::printf("wrote %s (%zu points, rank %d, eigenvalues %.6g %.6g %.6g)\n", a.out.c_str(),
              shape.cloud.size(), pca.rank, pca.eigenvalues[0], pca.eigenvalues[1],
              pca.eigenvalues[2]);
}

// ---------------------------------------------------------------------------

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& about) {
  CLI::App* cmd = app.add_subcommand(name, about);
  cmd->add_option("--config", "key=value file with option defaults (explicit flags win)");
  cmd->set_help_flag("-h,--help", "print this help");
  return cmd;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") + 1 - b);
}

/// Replaces `--config FILE` with one `--key=value` token per line of FILE,
/// placed right after the subcommand so later command-line flags override.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (file.empty()) return args;
  std::ifstream in(file);
  if (!in) throw CLI::FileError::Missing(file);
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError(file + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.rfind("--", 0) != 0) key = "--" + key;
    tokens.push_back(key + "=" + value);
  }
  const std::size_t at = std::min<std::size_t>(2, args.size());
  args.insert(args.begin() + at, tokens.begin(), tokens.end());
  return args;
}

int run(int argc, char** argv) {
  CLI::App app{"SegGraph few-shot 3D part segmentation", "seggraph"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  SynthArgs synth;
  CLI::App* synth_cmd = add_command(app, "synth", "generate a synthetic corpus");
  synth_cmd->add_option("--out", synth.out, "output corpus directory")->required();
  synth_cmd->add_option("--seed", synth.config.seed, "corpus seed")->capture_default_str();
  synth_cmd->add_option("--num-shapes", synth.config.num_shapes)->capture_default_str();
  synth_cmd->add_option("--train-shapes", synth.config.train_shapes)->capture_default_str();
  synth_cmd->add_option("--parts", synth.config.parts_per_shape, "classes per shape (<= 4)")
      ->capture_default_str();
  synth_cmd->add_option("--points", synth.config.points_per_shape)->capture_default_str();
  synth_cmd->add_option("--feature-noise", synth.config.feature_noise)->capture_default_str();
  synth_cmd->add_option("--separation", synth.config.prototype_separation)->capture_default_str();
  synth_cmd->add_option("--split-rate", synth.config.split_rate)->capture_default_str();
  synth_cmd->add_option("--merge-rate", synth.config.merge_rate)->capture_default_str();
  synth_cmd->add_option("--input-channels", synth.config.input_channels)->capture_default_str();
  synth_cmd->add_option("--views", synth.config.num_views)->capture_default_str();
  synth_cmd->add_option("--width", synth.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.height)->capture_default_str();
  synth_cmd->add_option("--patch", synth.config.patch_size)->capture_default_str();
  synth_cmd->add_option("--category", synth.config.category)->capture_default_str();
  synth_cmd->add_flag("--preprocess", synth.preprocess, "also write preprocessed artifacts");
  synth_cmd->add_option("--jobs", synth.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_preprocess_options(synth_cmd, synth.options);

  PreprocessArgs prep;
  CLI::App* prep_cmd = add_command(app, "preprocess",
                                   "visibility, mask decomposition, lifting, pooling, graph");
  prep_cmd->add_option("path", prep.path, "corpus or shape directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  prep_cmd->add_option("--jobs", prep.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_preprocess_options(prep_cmd, prep.options);

  std::string validate_path;
  CLI::App* validate_cmd = add_command(app, "validate", "check manifests against blob headers");
  validate_cmd->add_option("path", validate_path, "corpus or shape directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  TrainArgs train;
  CLI::App* train_cmd = add_command(app, "train", "few-shot training on a corpus train split");
  train_cmd->add_option("--corpus", train.corpus, "preprocessed corpus directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train.out, "checkpoint directory")->required();
  train_cmd->add_option("--seed", train.train.seed, "initialization seed")->capture_default_str();
  add_train_options(train_cmd, train.train);

  PredictArgs predict;
  CLI::App* predict_cmd = add_command(app, "predict", "per-point labels from a checkpoint");
  predict_cmd->add_option("--checkpoint", predict.checkpoint)
      ->required()
      ->check(CLI::ExistingDirectory);
  predict_cmd->add_option("path", predict.path, "shape directory or corpus (test split)")
      ->required()
      ->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--out", predict.out, "labels blob, or directory for a corpus")
      ->required();
  predict_cmd->add_option("--jobs", predict.jobs, "worker threads")->check(CLI::PositiveNumber);

  EvalArgs eval;
  CLI::App* eval_cmd = add_command(app, "eval", "mIoU of labels, a checkpoint, or a seed sweep");
  eval_cmd->add_option("--pred", eval.pred, "predicted labels (blob or shape directory)")
      ->check(CLI::ExistingPath);
  eval_cmd->add_option("--gt", eval.gt, "ground-truth labels (blob or shape directory)")
      ->check(CLI::ExistingPath);
  eval_cmd->add_option("--k", eval.k, "number of classes");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--corpus", eval.corpora, "preprocessed corpus (repeatable)")
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--seed", eval.train.seed, "single training seed")->capture_default_str();
  eval_cmd->add_option("--seeds", eval.seeds, "comma-separated training seeds, e.g. 0,1,2");
  eval_cmd->add_option("--json", eval.json_out, "write the full report as JSON");
  eval_cmd->add_option("--jobs", eval.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_train_options(eval_cmd, eval.train);

  GradcheckArgs grad;
  CLI::App* grad_cmd = add_command(app, "gradcheck", "finite-difference gradient checks");
  grad_cmd->add_option("--seed", grad.seed)->capture_default_str();
  grad_cmd->add_flag("--ops-only", grad.skip_model, "skip the end-to-end model check");

  ExportArgs pca;
  CLI::App* pca_cmd = add_command(app, "export-pca", "PCA-colored PLY of point features");
  pca_cmd->add_option("path", pca.path, "preprocessed shape directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  pca_cmd->add_option("--checkpoint", pca.checkpoint, "color fused features instead of pooled")
      ->check(CLI::ExistingDirectory);
  pca_cmd->add_option("--out", pca.out, "output .ply")->required();

  try {
    std::vector<std::string> args = expand_config({argv, argv + argc});
    std::vector<char*> ptrs;
    for (std::string& a : args) ptrs.push_back(a.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const CLI::App* s : app.get_subcommands()) sub = s;
    std::cerr << (sub != nullptr ? sub->help() : app.help());
    return 2;
  }

  try {
    if (*synth_cmd) run_synth(synth);
    if (*prep_cmd) run_preprocess(prep);
    if (*validate_cmd) run_validate(validate_path);
    if (*train_cmd) run_train(train);
    if (*predict_cmd) run_predict(predict);
    if (*eval_cmd) run_eval(eval);
    if (*grad_cmd) run_gradcheck(grad);
    if (*pca_cmd) run_export_pca(pca);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: format: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
