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

#include "clipedit/cotrain.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "clipedit/error.h"
#include "clipedit/evaluation.h"
#include "clipedit/parallel.h"
#include "json.hpp"

namespace clipedit {
namespace {

// splitmix64 finaliser: decorrelates generator streams derived from one seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kRandomTeacherStream = 2;

}  // namespace

std::string TeacherModeName(TeacherMode mode) {
  switch (mode) {
    case TeacherMode::kUpdate: return "update";
    case TeacherMode::kFrozen: return "frozen";
    case TeacherMode::kRandom: return "random";
    case TeacherMode::kSelf: return "self";
  }
  return "update";
}

TeacherMode ParseTeacherMode(const std::string& name) {
  if (name == "update") return TeacherMode::kUpdate;
  if (name == "frozen") return TeacherMode::kFrozen;
  if (name == "random") return TeacherMode::kRandom;
  if (name == "self") return TeacherMode::kSelf;
  throw ConfigError("unknown teacher mode '" + name +
                    "' (expected update|frozen|random|self)");
}

void CoTrainConfig::Validate() const {
  if (patience < 1) throw ConfigError("cotrain.patience must be >= 1");
  if (!(gamma >= -1.0 && gamma <= 1.0)) {
    throw ConfigError("cotrain.gamma must lie in [-1, 1]");
  }
  train.Validate();
  edit.Validate();
}

ClipAssignment BuildInitialClips(std::span<const CaptionAnnotation> annotations,
                                 const FeatureStore& store,
                                 const InitStrategy& strategy,
                                 std::optional<Split> split) {
  std::map<std::string, std::vector<const CaptionAnnotation*>> by_video;
  for (const CaptionAnnotation& a : annotations) {
    by_video[a.video_id].push_back(&a);
  }
  ClipAssignment clips;
  for (auto& [video_id, captions] : by_video) {
    std::stable_sort(captions.begin(), captions.end(),
                     [](const CaptionAnnotation* a, const CaptionAnnotation* b) {
                       return a->timestamp_s < b->timestamp_s;
                     });
    const Interval span = store.video(video_id).Span();
    for (std::size_t i = 0; i < captions.size(); ++i) {
      const CaptionAnnotation& a = *captions[i];
      if (split && a.split != *split) continue;
      std::optional<double> prev, next;
      if (i > 0) prev = captions[i - 1]->timestamp_s;
      if (i + 1 < captions.size()) next = captions[i + 1]->timestamp_s;
      try {
        clips.emplace(a.caption_id,
                      ClipEntry{video_id, InitialClip(prev, a.timestamp_s, next,
                                                      span, strategy)});
      } catch (const Error& e) {
        throw ValidationError("annotation error for caption " + a.caption_id +
                              ": " + e.what());
      }
    }
  }
  return clips;
}

ClipAssignment GroundTruthClips(std::span<const CaptionAnnotation> annotations,
                                Split split) {
  ClipAssignment clips;
  for (const CaptionAnnotation& a : annotations) {
    if (a.split == split && a.gt_interval) {
      clips.emplace(a.caption_id, ClipEntry{a.video_id, *a.gt_interval});
    }
  }
  return clips;
}

ClipAssignment JitterClips(const ClipAssignment& clips,
                           const FeatureStore& store, double fraction,
                           double max_jitter_s, std::mt19937_64& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("jitter fraction must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  ClipAssignment out;
  for (const auto& [caption_id, entry] : clips) {
    ClipEntry jittered = entry;
    if (coin(rng) < fraction) {
      jittered.clip = Jitter(entry.clip, max_jitter_s,
                             store.video(entry.video_id).Span(), rng);
    }
    out.emplace(caption_id, std::move(jittered));
  }
  return out;
}

WarmupResult WarmupOnClips(const FeatureStore& store,
                           const ClipAssignment& clips,
                           const TrainConfig& cfg) {
  cfg.Validate();
  if (clips.empty()) throw ValidationError("warm-up needs training captions");
  std::mt19937_64 init_rng(DeriveSeed(cfg.seed, kInitStream));
  WarmupResult result{
      TrainState(InitEncoderParams(store.dim(), store.dim(), cfg.temperature,
                                   init_rng),
                 DeriveSeed(cfg.seed, kShuffleStream)),
      clips,
      {}};
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    result.epoch_losses.push_back(TrainEpoch(result.state, store, clips, cfg));
  }
  return result;
}

WarmupResult Warmup(const FeatureStore& store,
                    std::span<const CaptionAnnotation> annotations,
                    const InitStrategy& strategy, const TrainConfig& cfg) {
  return WarmupOnClips(
      store, BuildInitialClips(annotations, store, strategy, Split::kTrain),
      cfg);
}

std::map<std::string, double> PairSimilarities(const EncoderParams& p,
                                               const FeatureStore& store,
                                               const ClipAssignment& clips,
                                               double seg_len_s) {
  std::map<std::string, double> sims;
  for (const auto& [caption_id, entry] : clips) {
    const std::vector<float> clip =
        EmbedPooledClip(p, PooledClipFeature(store, entry, seg_len_s));
    const std::vector<float> cap = EmbedCaption(p, store.caption(caption_id));
    sims[caption_id] = Similarity<float>(clip, cap);
  }
  return sims;
}

ControlSet SelectControlSet(const EncoderParams& p, const FeatureStore& store,
                            const ClipAssignment& clips, double gamma,
                            double seg_len_s) {
  ControlSet control;
  for (const auto& [caption_id, sim] :
       PairSimilarities(p, store, clips, seg_len_s)) {
    if (sim > gamma) {
      control.caption_ids.push_back(caption_id);
      control.frozen_clips.emplace(caption_id, clips.at(caption_id));
    }
  }
  if (control.caption_ids.empty()) {
    throw ValidationError("control set empty; lower gamma");
  }
  return control;
}

double MonitorMetric(const EncoderParams& student, const FeatureStore& store,
                     const ControlSet& control, double seg_len_s,
                     int workers) {
  const std::vector<std::size_t> ranks =
      RetrievalRanks(student, store, control.caption_ids, control.frozen_clips,
                     seg_len_s, workers);
  return RecallAtK(ranks, 1);
}

CoTrainResult CoTrain(const TrainState& warm, const ClipAssignment& initial,
                      const ControlSet& control, const FeatureStore& store,
                      const CoTrainConfig& cfg, int workers,
                      const EpochObserver& observer) {
  cfg.Validate();
  const double seg_len = cfg.train.seg_len_s;
  TrainState student = warm;

  EncoderParams teacher = warm.params;
  if (cfg.teacher_mode == TeacherMode::kRandom) {
    std::mt19937_64 rng(DeriveSeed(cfg.train.seed, kRandomTeacherStream));
    teacher = InitEncoderParams(warm.params.in_dim(), warm.params.out_dim(),
                                warm.params.temperature, rng);
  }

  CoTrainResult result{warm.params, warm.params, teacher, initial, {}, {},
                       0.0, 0.0, 0};
  result.warmup_monitor =
      MonitorMetric(warm.params, store, control, seg_len, workers);
  result.best_monitor = result.warmup_monitor;
  if (cfg.max_epochs == 0) return result;

  std::size_t since_improve = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const EncoderParams& editor_weights =
        cfg.teacher_mode == TeacherMode::kSelf ? student.params : teacher;
    // Editing always starts from the initial clips.
    EditBatch edits = EditAll(editor_weights, store, initial, cfg.edit, workers);
    const EncoderParams teacher_used = editor_weights;

    EpochRecord record;
    record.epoch = epoch;
    record.n_applied_edits = edits.AppliedCount();
    record.train_loss = TrainEpoch(student, store, edits.clips, cfg.train);
    record.monitor =
        MonitorMetric(student.params, store, control, seg_len, workers);

    if (record.monitor > result.best_monitor) {
      result.best_monitor = record.monitor;
      result.best_student = student.params;
      result.best_epoch = epoch;
      since_improve = 0;
      if (cfg.teacher_mode == TeacherMode::kUpdate) {
        teacher = student.params;
        record.teacher_updated = true;
      }
    } else {
      ++since_improve;
    }
    result.log.push_back(record);
    if (observer) observer(EpochView{record, teacher_used, student.params});
    if (since_improve >= cfg.patience) break;
  }

  result.final_student = student.params;
  result.teacher =
      cfg.teacher_mode == TeacherMode::kSelf ? student.params : teacher;
  EditBatch final_edits =
      EditAll(result.teacher, store, initial, cfg.edit, workers);
  result.clips = std::move(final_edits.clips);
  result.final_edits = std::move(final_edits.results);
  return result;
}

void WriteEpochRecord(std::ostream& out, const EpochRecord& record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["train_loss"] = record.train_loss;
  j["monitor"] = record.monitor;
  j["n_applied_edits"] = record.n_applied_edits;
  j["teacher_updated"] = record.teacher_updated;
  out << j.dump() << '\n';
}

std::vector<EpochRecord> ReadCoTrainLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<EpochRecord> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EpochRecord r;
      r.epoch = j.at("epoch").get<std::size_t>();
      r.train_loss = j.at("train_loss").get<double>();
      r.monitor = j.at("monitor").get<double>();
      r.n_applied_edits = j.at("n_applied_edits").get<std::size_t>();
      r.teacher_updated = j.at("teacher_updated").get<bool>();
      if (r.monitor < 0.0 || r.monitor > 1.0) {
        throw ValidationError("monitor outside [0, 1]");
      }
      log.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const Error& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return log;
}

}  // namespace clipedit
