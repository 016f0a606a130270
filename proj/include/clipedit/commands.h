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

#ifndef CLIPEDIT_COMMANDS_H_
#define CLIPEDIT_COMMANDS_H_

#include <optional>
#include <string>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/cotrain.h"
#include "clipedit/evaluation.h"
#include "clipedit/run_config.h"

namespace clipedit {

// Exit codes shared by every command.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Dataset {
  FeatureStore store;
  std::vector<CaptionAnnotation> annotations;
};

// Synthesises or loads (and validates) the corpus named by the config.
Dataset LoadDataset(const RunConfig& cfg);

struct TestGallery {
  std::vector<std::string> queries;
  ClipAssignment clips;
  std::string mode;  // "ground_truth" or "initial"
};

// Ground-truth test clips when every test caption has one, initial clips
// otherwise.
TestGallery BuildTestGallery(const RunConfig& cfg, const Dataset& data);

// Initial train clips with the configured jitter applied.
ClipAssignment TrainingClips(const RunConfig& cfg, const Dataset& data);

struct PipelineOutcome {
  WarmupResult warmup;
  ControlSet control;
  CoTrainResult cotrain;
  RetrievalMetrics warmup_metrics;
  RetrievalMetrics student_metrics;
  std::optional<double> mean_iou_initial_gt;
  std::optional<double> mean_iou_edited_gt;
};

// Warm-up, control-set selection, co-training and test evaluation. When
// out_dir is non-empty every artefact is written there.
PipelineOutcome RunCoTrainPipeline(const RunConfig& cfg, const Dataset& data,
                                   const std::string& out_dir);

int CmdSynth(const RunConfig& cfg, bool check);
int CmdWarmup(const RunConfig& cfg, bool check);
int CmdCoTrain(const RunConfig& cfg, bool check);
int CmdEval(const RunConfig& cfg, const std::string& checkpoint, bool check);
int CmdAblate(const RunConfig& cfg, const std::string& axis,
              const std::vector<std::string>& values, bool check);

// Runs fn and converts errors to exit codes with a message on stderr.
template <typename Fn>
int RunGuarded(Fn&& fn);

int ExitCodeFor(const std::exception& e);

template <typename Fn>
int RunGuarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return ExitCodeFor(e);
  }
}

}  // namespace clipedit

#endif  // CLIPEDIT_COMMANDS_H_
