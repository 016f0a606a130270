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

#ifndef CLIPEDIT_RUN_CONFIG_H_
#define CLIPEDIT_RUN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/cotrain.h"
#include "clipedit/editor.h"
#include "clipedit/encoder.h"
#include "clipedit/timeline.h"
#include "json.hpp"

namespace clipedit {

struct PathsConfig {
  std::string features;
  std::string annotations;
  std::string output = "out";
};

struct JitterConfig {
  double fraction = 0.0;  // share of initial training clips to jitter
  double max_s = 2.0;
};

// Fully parsed run configuration. `document` keeps the merged JSON so that
// sweeps can derive per-value configurations from it.
struct RunConfig {
  nlohmann::json document;
  std::uint64_t seed = 0;
  int workers = 1;
  PathsConfig paths;
  std::optional<SynthConfig> synth;
  InitStrategy init_strategy;
  JitterConfig jitter;
  CoTrainConfig cotrain;  // carries the train and edit sections

  const TrainConfig& train() const { return cotrain.train; }
  const EditConfig& edit() const { return cotrain.edit; }
};

// Every recognised key with its default value. synth defaults to an active
// synthetic corpus; set it to null and fill paths.features to ingest files.
nlohmann::json DefaultConfigDocument();

// Sets a dotted key (e.g. "edit.k") to `value`, which is parsed as JSON when
// possible and taken as a string otherwise. Unknown keys are rejected.
void ApplyOverride(nlohmann::json& document, const std::string& dotted_key,
                   const std::string& value);

// "key=value" form of ApplyOverride.
void ApplyAssignment(nlohmann::json& document, const std::string& assignment);

// Merges `user` over the defaults, rejecting keys the defaults do not know.
nlohmann::json MergeWithDefaults(const nlohmann::json& user);

RunConfig ParseRunConfig(const nlohmann::json& document);

// Reads the optional config file, applies the overrides and parses.
RunConfig LoadRunConfig(const std::optional<std::string>& path,
                        const std::vector<std::string>& overrides);

}  // namespace clipedit

#endif  // CLIPEDIT_RUN_CONFIG_H_
