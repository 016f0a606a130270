// Copyright 2026 The ClipEdit Authors.
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

#include "clipedit/commands.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "clipedit/checkpoint.h"
#include "clipedit/editor.h"
#include "clipedit/error.h"
#include "clipedit/feature_io.h"
#include "json.hpp"

namespace clipedit {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kJitterSeedOffset = 0x6a09e667f3bcc909ull;

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

double MeanIou(const ClipAssignment& a, const ClipAssignment& b) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [caption_id, entry] : a) {
    auto it = b.find(caption_id);
    if (it == b.end()) continue;
    total += Iou(entry.clip, it->second.clip);
    ++n;
  }
  if (n == 0) throw ValidationError("no overlapping captions for mean IoU");
  return total / static_cast<double>(n);
}

std::vector<std::pair<Interval, Interval>> Pairs(const ClipAssignment& a,
                                                 const ClipAssignment& b) {
  std::vector<std::pair<Interval, Interval>> out;
  for (const auto& [caption_id, entry] : a) {
    auto it = b.find(caption_id);
    if (it != b.end()) out.emplace_back(entry.clip, it->second.clip);
  }
  return out;
}

void WriteSummary(const std::string& path, const PipelineOutcome& o) {
  nlohmann::ordered_json j;
  j["control_size"] = o.control.caption_ids.size();
  j["warmup_monitor"] = o.cotrain.warmup_monitor;
  j["best_monitor"] = o.cotrain.best_monitor;
  j["best_epoch"] = o.cotrain.best_epoch;
  j["epochs_run"] = o.cotrain.log.size();
  j["warmup_r1"] = o.warmup_metrics.r1();
  j["student_r1"] = o.student_metrics.r1();
  if (o.mean_iou_initial_gt) j["mean_iou_initial_gt"] = *o.mean_iou_initial_gt;
  if (o.mean_iou_edited_gt) j["mean_iou_edited_gt"] = *o.mean_iou_edited_gt;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

void CheckCoTrainOutputs(const std::string& dir) {
  ReadCheckpoint(Join(dir, "warmup.cfp"));
  ReadCheckpoint(Join(dir, "model.student.cfp"));
  ReadCheckpoint(Join(dir, "model.teacher.cfp"));
  ReadCoTrainLog(Join(dir, "cotrain_log.jsonl"));
  ReadEdits(Join(dir, "edits.jsonl"));
  ReadMetrics(Join(dir, "metrics.json"));
  ReadMetrics(Join(dir, "warmup_metrics.json"));
  ReadIouHistogram(Join(dir, "iou_hist.csv"));
  if (fs::exists(Join(dir, "iou_hist_gt.csv"))) {
    ReadIouHistogram(Join(dir, "iou_hist_gt.csv"));
  }
}

std::string AxisKey(const std::string& axis) {
  static const std::map<std::string, std::string> kAxes = {
      {"topk", "edit.k"},
      {"iou_gate", "edit.iou_gate"},
      {"gamma", "cotrain.gamma"},
      {"jitter", "jitter.fraction"},
      {"init_strategy", "init_strategy.kind"},
      {"teacher_mode", "cotrain.teacher_mode"},
  };
  auto it = kAxes.find(axis);
  if (it == kAxes.end()) {
    throw ConfigError("unknown ablation axis '" + axis +
                      "' (expected topk|iou_gate|gamma|jitter|init_strategy|"
                      "teacher_mode)");
  }
  return it->second;
}

}  // namespace

int ExitCodeFor(const std::exception& e) {
  std::cerr << "error: " << e.what() << std::endl;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->code() == ErrorCode::kNumeric ? kExitNumeric : kExitConfig;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr ||
      dynamic_cast<const fs::filesystem_error*>(&e) != nullptr) {
    return kExitConfig;
  }
  return kExitNumeric;
}

Dataset LoadDataset(const RunConfig& cfg) {
  Dataset data;
  if (cfg.synth) {
    SynthCorpus corpus = GenerateSynthCorpus(*cfg.synth);
    data.store = std::move(corpus.store);
    data.annotations = std::move(corpus.annotations);
  } else {
    data.store = LoadFeatures(cfg.paths.features);
    data.annotations = LoadAnnotations(cfg.paths.annotations);
  }
  ValidateAnnotations(data.annotations, data.store);
  return data;
}

TestGallery BuildTestGallery(const RunConfig& cfg, const Dataset& data) {
  TestGallery gallery;
  std::size_t n_test = 0;
  bool all_gt = true;
  for (const CaptionAnnotation& a : data.annotations) {
    if (a.split != Split::kTest) continue;
    ++n_test;
    all_gt = all_gt && a.gt_interval.has_value();
  }
  if (n_test == 0) throw ValidationError("no test-split captions to evaluate");
  if (all_gt) {
    gallery.clips = GroundTruthClips(data.annotations, Split::kTest);
    gallery.mode = "ground_truth";
  } else {
    gallery.clips = BuildInitialClips(data.annotations, data.store,
                                      cfg.init_strategy, Split::kTest);
    gallery.mode = "initial";
  }
  for (const auto& [caption_id, entry] : gallery.clips) {
    gallery.queries.push_back(caption_id);
  }
  return gallery;
}

ClipAssignment TrainingClips(const RunConfig& cfg, const Dataset& data) {
  ClipAssignment clips = BuildInitialClips(data.annotations, data.store,
                                           cfg.init_strategy, Split::kTrain);
  if (cfg.jitter.fraction > 0.0) {
    std::mt19937_64 rng(cfg.seed ^ kJitterSeedOffset);
    clips = JitterClips(clips, data.store, cfg.jitter.fraction,
                        cfg.jitter.max_s, rng);
  }
  return clips;
}

PipelineOutcome RunCoTrainPipeline(const RunConfig& cfg, const Dataset& data,
                                   const std::string& out_dir) {
  const bool write = !out_dir.empty();
  if (write) fs::create_directories(out_dir);
  const double seg_len = cfg.train().seg_len_s;

  const ClipAssignment initial = TrainingClips(cfg, data);
  WarmupResult warm = WarmupOnClips(data.store, initial, cfg.train());
  ControlSet control = SelectControlSet(warm.state.params, data.store, initial,
                                        cfg.cotrain.gamma, seg_len);

  std::ofstream log_out;
  if (write) {
    WriteCheckpoint(Join(out_dir, "warmup.cfp"), warm.state.params);
    log_out.open(Join(out_dir, "cotrain_log.jsonl"), std::ios::trunc);
    if (!log_out) throw IoError("cannot write cotrain_log.jsonl");
  }
  EpochObserver observer;
  if (write) {
    observer = [&log_out](const EpochView& view) {
      WriteEpochRecord(log_out, view.record);
      log_out.flush();
    };
  }
  CoTrainResult result = CoTrain(warm.state, initial, control, data.store,
                                 cfg.cotrain, cfg.workers, observer);

  const TestGallery gallery = BuildTestGallery(cfg, data);
  PipelineOutcome outcome{std::move(warm), std::move(control),
                          std::move(result), {}, {}, std::nullopt,
                          std::nullopt};
  outcome.warmup_metrics =
      EvaluateRetrieval(outcome.warmup.state.params, data.store,
                        gallery.queries, gallery.clips, seg_len, cfg.workers);
  outcome.warmup_metrics.gallery_mode = gallery.mode;
  outcome.student_metrics =
      EvaluateRetrieval(outcome.cotrain.best_student, data.store,
                        gallery.queries, gallery.clips, seg_len, cfg.workers);
  outcome.student_metrics.gallery_mode = gallery.mode;

  const ClipAssignment gt_train =
      GroundTruthClips(data.annotations, Split::kTrain);
  if (gt_train.size() == initial.size() && !gt_train.empty()) {
    outcome.mean_iou_initial_gt = MeanIou(initial, gt_train);
    outcome.mean_iou_edited_gt = MeanIou(outcome.cotrain.clips, gt_train);
  }

  if (write) {
    WriteCheckpoint(Join(out_dir, "model.student.cfp"),
                    outcome.cotrain.best_student);
    WriteCheckpoint(Join(out_dir, "model.teacher.cfp"),
                    outcome.cotrain.teacher);
    WriteEdits(Join(out_dir, "edits.jsonl"), outcome.cotrain.final_edits);
    WriteMetrics(Join(out_dir, "metrics.json"), outcome.student_metrics);
    WriteMetrics(Join(out_dir, "warmup_metrics.json"), outcome.warmup_metrics);
    WriteIouHistogram(Join(out_dir, "iou_hist.csv"),
                      MakeIouHistogram(Pairs(initial, outcome.cotrain.clips)));
    if (outcome.mean_iou_edited_gt) {
      WriteIouHistogram(
          Join(out_dir, "iou_hist_gt.csv"),
          MakeIouHistogram(Pairs(gt_train, outcome.cotrain.clips)));
    }
    WriteSummary(Join(out_dir, "summary.json"), outcome);
  }
  return outcome;
}

int CmdSynth(const RunConfig& cfg, bool check) {
  return RunGuarded([&] {
    if (!cfg.synth) throw ConfigError("synth requires an active synth section");
    const SynthCorpus corpus = GenerateSynthCorpus(*cfg.synth);
    const std::string features_dir = Join(cfg.paths.output, "features");
    const std::string annotations = Join(cfg.paths.output, "annotations.jsonl");
    WriteFeatures(features_dir, corpus.store);
    WriteAnnotations(annotations, corpus.annotations);
    if (check) {
      if (!(LoadFeatures(features_dir) == corpus.store)) {
        throw ValidationError("feature files do not round-trip");
      }
      const auto reloaded = LoadAnnotations(annotations);
      if (reloaded.size() != corpus.annotations.size()) {
        throw ValidationError("annotation file does not round-trip");
      }
    }
    std::cout << "wrote " << corpus.store.videos().size() << " videos and "
              << corpus.annotations.size() << " captions to "
              << cfg.paths.output << "\n";
    return kExitOk;
  });
}

int CmdWarmup(const RunConfig& cfg, bool check) {
  return RunGuarded([&] {
    const Dataset data = LoadDataset(cfg);
    const WarmupResult warm =
        WarmupOnClips(data.store, TrainingClips(cfg, data), cfg.train());
    const TestGallery gallery = BuildTestGallery(cfg, data);
    RetrievalMetrics metrics =
        EvaluateRetrieval(warm.state.params, data.store, gallery.queries,
                          gallery.clips, cfg.train().seg_len_s, cfg.workers);
    metrics.gallery_mode = gallery.mode;
    fs::create_directories(cfg.paths.output);
    WriteCheckpoint(Join(cfg.paths.output, "warmup.cfp"), warm.state.params);
    WriteMetrics(Join(cfg.paths.output, "metrics.json"), metrics);
    if (check) {
      if (!(ReadCheckpoint(Join(cfg.paths.output, "warmup.cfp")) ==
            warm.state.params)) {
        throw ValidationError("checkpoint does not round-trip");
      }
      ReadMetrics(Join(cfg.paths.output, "metrics.json"));
    }
    std::cout << "warm-up R@1 " << metrics.r1() << " MedR "
              << metrics.median_rank << "\n";
    return kExitOk;
  });
}

int CmdCoTrain(const RunConfig& cfg, bool check) {
  return RunGuarded([&] {
    const Dataset data = LoadDataset(cfg);
    const PipelineOutcome o = RunCoTrainPipeline(cfg, data, cfg.paths.output);
    if (check) CheckCoTrainOutputs(cfg.paths.output);
    std::cout << "warm-up R@1 " << o.warmup_metrics.r1() << " -> student R@1 "
              << o.student_metrics.r1() << " (" << o.cotrain.log.size()
              << " co-training epochs, best epoch " << o.cotrain.best_epoch
              << ")\n";
    return kExitOk;
  });
}

int CmdEval(const RunConfig& cfg, const std::string& checkpoint, bool check) {
  return RunGuarded([&] {
    if (checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
    const EncoderParams params = ReadCheckpoint(checkpoint);
    const Dataset data = LoadDataset(cfg);
    if (params.in_dim() != data.store.dim()) {
      throw ValidationError("checkpoint input dimension " +
                            std::to_string(params.in_dim()) +
                            " does not match feature dimension " +
                            std::to_string(data.store.dim()));
    }
    const TestGallery gallery = BuildTestGallery(cfg, data);
    RetrievalMetrics metrics =
        EvaluateRetrieval(params, data.store, gallery.queries, gallery.clips,
                          cfg.train().seg_len_s, cfg.workers);
    metrics.gallery_mode = gallery.mode;
    fs::create_directories(cfg.paths.output);
    WriteMetrics(Join(cfg.paths.output, "metrics.json"), metrics);
    if (check) ReadMetrics(Join(cfg.paths.output, "metrics.json"));
    std::cout << "R@1 " << metrics.r1() << " R@5 " << metrics.recall_at.at(5)
              << " R@10 " << metrics.recall_at.at(10) << " MedR "
              << metrics.median_rank << "\n";
    return kExitOk;
  });
}

int CmdAblate(const RunConfig& cfg, const std::string& axis,
              const std::vector<std::string>& values, bool check) {
  return RunGuarded([&] {
    const std::string key = AxisKey(axis);
    if (values.empty()) throw ConfigError("ablate needs at least one value");
    // Parse every variant before running anything.
    std::vector<RunConfig> variants;
    for (const std::string& value : values) {
      nlohmann::json doc = cfg.document;
      ApplyOverride(doc, key, value);
      variants.push_back(ParseRunConfig(doc));
    }
    const Dataset data = LoadDataset(cfg);
    fs::create_directories(cfg.paths.output);
    std::ofstream sweep(Join(cfg.paths.output, "sweep.csv"), std::ios::trunc);
    if (!sweep) throw IoError("cannot write sweep.csv");
    sweep << "value,r1,r5,r10,medr\n" << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string dir = Join(cfg.paths.output, axis + "=" + values[i]);
      const PipelineOutcome o = RunCoTrainPipeline(variants[i], data, dir);
      if (check) CheckCoTrainOutputs(dir);
      const RetrievalMetrics& m = o.student_metrics;
      sweep << values[i] << ',' << m.recall_at.at(1) << ','
            << m.recall_at.at(5) << ',' << m.recall_at.at(10) << ','
            << m.median_rank << '\n';
      sweep.flush();
      std::cout << axis << "=" << values[i] << " R@1 " << m.r1() << "\n";
    }
    return kExitOk;
  });
}

}  // namespace clipedit
