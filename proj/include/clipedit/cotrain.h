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

#ifndef CLIPEDIT_COTRAIN_H_
#define CLIPEDIT_COTRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/editor.h"
#include "clipedit/encoder.h"
#include "clipedit/timeline.h"

namespace clipedit {

// Teacher variants: update copies the student into the teacher whenever the
// control-set monitor improves; frozen keeps the warm-up weights; random
// edits with freshly initialised weights; self edits with the current
// student.
enum class TeacherMode { kUpdate, kFrozen, kRandom, kSelf };

std::string TeacherModeName(TeacherMode mode);
TeacherMode ParseTeacherMode(const std::string& name);

struct CoTrainConfig {
  double gamma = 0.5;
  std::size_t patience = 5;
  std::size_t max_epochs = 50;
  TeacherMode teacher_mode = TeacherMode::kUpdate;
  TrainConfig train;
  EditConfig edit;

  void Validate() const;
};

// Initial clips for the captions of `split` (all captions when absent).
// Neighbouring timestamps are taken from every caption of the same video.
ClipAssignment BuildInitialClips(std::span<const CaptionAnnotation> annotations,
                                 const FeatureStore& store,
                                 const InitStrategy& strategy,
                                 std::optional<Split> split = Split::kTrain);

// Ground-truth spans of the captions of `split`; captions without one are
// skipped.
ClipAssignment GroundTruthClips(std::span<const CaptionAnnotation> annotations,
                                Split split);

// Jitters a `fraction` of the clips (chosen at random) by up to max_jitter_s
// at each boundary.
ClipAssignment JitterClips(const ClipAssignment& clips,
                           const FeatureStore& store, double fraction,
                           double max_jitter_s, std::mt19937_64& rng);

struct WarmupResult {
  TrainState state;
  ClipAssignment initial_clips;
  std::vector<double> epoch_losses;
};

// Fresh encoder (in_dim = out_dim = store.dim()) trained cfg.epochs epochs on
// `clips`.
WarmupResult WarmupOnClips(const FeatureStore& store,
                           const ClipAssignment& clips,
                           const TrainConfig& cfg);

WarmupResult Warmup(const FeatureStore& store,
                    std::span<const CaptionAnnotation> annotations,
                    const InitStrategy& strategy, const TrainConfig& cfg);

struct ControlSet {
  std::vector<std::string> caption_ids;
  ClipAssignment frozen_clips;
};

// Diagonal similarity of each caption and its own clip.
std::map<std::string, double> PairSimilarities(const EncoderParams& p,
                                               const FeatureStore& store,
                                               const ClipAssignment& clips,
                                               double seg_len_s);

// Pairs whose similarity strictly exceeds gamma, with their clips frozen.
ControlSet SelectControlSet(const EncoderParams& p, const FeatureStore& store,
                            const ClipAssignment& clips, double gamma,
                            double seg_len_s);

// Caption-to-clip R@1 of the control captions against the control clips.
double MonitorMetric(const EncoderParams& student, const FeatureStore& store,
                     const ControlSet& control, double seg_len_s,
                     int workers = 1);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double monitor = 0.0;
  std::size_t n_applied_edits = 0;
  bool teacher_updated = false;

  bool operator==(const EpochRecord&) const = default;
};

struct EpochView {
  const EpochRecord& record;
  const EncoderParams& teacher_used;  // weights that produced this epoch's edits
  const EncoderParams& student;       // student after this epoch's training
};

using EpochObserver = std::function<void(const EpochView&)>;

struct CoTrainResult {
  EncoderParams best_student;
  EncoderParams final_student;
  EncoderParams teacher;
  ClipAssignment clips;
  std::vector<EditResult> final_edits;
  std::vector<EpochRecord> log;
  double warmup_monitor = 0.0;
  double best_monitor = 0.0;
  std::size_t best_epoch = 0;  // 0: no epoch beat the warm-up model
};

// Each epoch the teacher edits the initial clips, the student trains one
// epoch on the edits and is scored on the control set. The loop stops after
// `patience` consecutive epochs without strict improvement or at max_epochs.
// After the loop the final teacher edits the initial clips once more.
CoTrainResult CoTrain(const TrainState& warm, const ClipAssignment& initial,
                      const ControlSet& control, const FeatureStore& store,
                      const CoTrainConfig& cfg, int workers = 1,
                      const EpochObserver& observer = {});

// cotrain_log.jsonl lines.
void WriteEpochRecord(std::ostream& out, const EpochRecord& record);
std::vector<EpochRecord> ReadCoTrainLog(const std::string& path);

}  // namespace clipedit

#endif  // CLIPEDIT_COTRAIN_H_
