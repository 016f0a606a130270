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

#include "clipedit/run_config.h"

#include <fstream>

#include "clipedit/error.h"

namespace clipedit {
namespace {

using nlohmann::json;

json DefaultSynth() {
  const SynthConfig s;
  return {{"n_train_videos", s.n_train_videos},
          {"n_test_videos", s.n_test_videos},
          {"captions_per_video", s.captions_per_video},
          {"video_len_s", s.video_len_s},
          {"gt_len_min_s", s.gt_len_min_s},
          {"gt_len_max_s", s.gt_len_max_s},
          {"dim", s.dim},
          {"noise_sigma", s.noise_sigma},
          {"caption_noise_sigma", s.caption_noise_sigma}};
}

// Walks `user` against `schema` and fails on keys the schema lacks. A null
// synth section disables the synthetic corpus.
void CheckKeys(const json& user, const json& schema, const std::string& where) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!schema.contains(key)) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    if (value.is_object()) CheckKeys(value, schema.at(key), path);
  }
}

template <typename T>
T Get(const json& j, const char* key, const std::string& section) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config " + section + "." + key + ": " + e.what());
  }
}

std::size_t GetCount(const json& j, const char* key,
                     const std::string& section) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config " + section + "." + key +
                      " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

json DefaultConfigDocument() {
  const TrainConfig t;
  const EditConfig e;
  const CoTrainConfig c;
  const JitterConfig jit;
  return {
      {"seed", 0},
      {"workers", 1},
      {"paths", {{"features", ""}, {"annotations", ""}, {"output", "out"}}},
      {"synth", DefaultSynth()},
      {"init_strategy", {{"kind", "midpoint"}, {"half_width_s", 10.0}}},
      {"jitter", {{"fraction", jit.fraction}, {"max_s", jit.max_s}}},
      {"train",
       {{"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"epochs", t.epochs},
        {"optimizer", "adam"},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"epsilon", t.epsilon},
        {"temperature", t.temperature},
        {"seg_len_s", t.seg_len_s}}},
      {"edit",
       {{"k", e.k}, {"seg_len_s", e.seg_len_s}, {"iou_gate", e.iou_gate}}},
      {"cotrain",
       {{"gamma", c.gamma},
        {"patience", c.patience},
        {"max_epochs", c.max_epochs},
        {"teacher_mode", TeacherModeName(c.teacher_mode)}}},
  };
}

void ApplyOverride(json& document, const std::string& dotted_key,
                   const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  std::string pointer;
  std::size_t begin = 0;
  while (begin <= dotted_key.size()) {
    const std::size_t dot = dotted_key.find('.', begin);
    const std::string part = dotted_key.substr(
        begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty()) throw ConfigError("malformed key '" + dotted_key + "'");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  const json schema = DefaultConfigDocument();
  const json::json_pointer ptr(pointer);
  if (!schema.contains(ptr)) {
    throw ConfigError("unknown config key '" + dotted_key + "'");
  }
  json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) parsed = value;
  // Setting a key inside a disabled synth section re-enables it.
  if (pointer.rfind("/synth/", 0) == 0 && document["synth"].is_null()) {
    document["synth"] = DefaultSynth();
  }
  document[ptr] = parsed;
}

void ApplyAssignment(json& document, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
  }
  ApplyOverride(document, assignment.substr(0, eq), assignment.substr(eq + 1));
}

json MergeWithDefaults(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json schema = DefaultConfigDocument();
  CheckKeys(user, schema, "");
  json merged = schema;
  for (const auto& [key, value] : user.items()) {
    if (value.is_object() && merged[key].is_object()) {
      merged[key].update(value);
    } else {
      merged[key] = value;
    }
  }
  return merged;
}

RunConfig ParseRunConfig(const json& document) {
  RunConfig cfg;
  cfg.document = document;
  cfg.seed = Get<std::uint64_t>(document, "seed", "root");
  cfg.workers = Get<int>(document, "workers", "root");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");

  const json& paths = document.at("paths");
  cfg.paths.features = Get<std::string>(paths, "features", "paths");
  cfg.paths.annotations = Get<std::string>(paths, "annotations", "paths");
  cfg.paths.output = Get<std::string>(paths, "output", "paths");

  const json& synth = document.at("synth");
  if (!synth.is_null()) {
    SynthConfig s;
    s.n_train_videos = GetCount(synth, "n_train_videos", "synth");
    s.n_test_videos = GetCount(synth, "n_test_videos", "synth");
    s.captions_per_video = GetCount(synth, "captions_per_video", "synth");
    s.video_len_s = Get<double>(synth, "video_len_s", "synth");
    s.gt_len_min_s = Get<double>(synth, "gt_len_min_s", "synth");
    s.gt_len_max_s = Get<double>(synth, "gt_len_max_s", "synth");
    s.dim = GetCount(synth, "dim", "synth");
    s.noise_sigma = Get<double>(synth, "noise_sigma", "synth");
    s.caption_noise_sigma = Get<double>(synth, "caption_noise_sigma", "synth");
    s.seed = cfg.seed;
    cfg.synth = s;
  }
  const bool has_paths = !cfg.paths.features.empty();
  if (cfg.synth.has_value() == has_paths) {
    throw ConfigError(
        "exactly one data source must be active: set synth to null and give "
        "paths.features/paths.annotations, or keep synth and leave "
        "paths.features empty");
  }
  if (has_paths && cfg.paths.annotations.empty()) {
    throw ConfigError("paths.annotations is required with paths.features");
  }

  const json& init = document.at("init_strategy");
  cfg.init_strategy =
      InitStrategy::FromName(Get<std::string>(init, "kind", "init_strategy"),
                             Get<double>(init, "half_width_s", "init_strategy"));

  const json& jitter = document.at("jitter");
  cfg.jitter.fraction = Get<double>(jitter, "fraction", "jitter");
  cfg.jitter.max_s = Get<double>(jitter, "max_s", "jitter");
  if (!(cfg.jitter.fraction >= 0.0 && cfg.jitter.fraction <= 1.0)) {
    throw ConfigError("jitter.fraction must lie in [0, 1]");
  }
  if (!(cfg.jitter.max_s >= 0.0)) throw ConfigError("jitter.max_s must be >= 0");

  const json& train = document.at("train");
  TrainConfig& t = cfg.cotrain.train;
  t.batch_size = GetCount(train, "batch_size", "train");
  t.learning_rate = Get<double>(train, "learning_rate", "train");
  t.epochs = GetCount(train, "epochs", "train");
  const std::string optimizer = Get<std::string>(train, "optimizer", "train");
  if (optimizer == "adam") {
    t.optimizer = OptimizerKind::kAdam;
  } else if (optimizer == "sgd") {
    t.optimizer = OptimizerKind::kSgd;
  } else {
    throw ConfigError("train.optimizer must be adam or sgd");
  }
  t.beta1 = Get<double>(train, "beta1", "train");
  t.beta2 = Get<double>(train, "beta2", "train");
  t.epsilon = Get<double>(train, "epsilon", "train");
  t.temperature = Get<double>(train, "temperature", "train");
  t.seg_len_s = Get<double>(train, "seg_len_s", "train");
  t.seed = cfg.seed;

  const json& edit = document.at("edit");
  EditConfig& e = cfg.cotrain.edit;
  e.k = GetCount(edit, "k", "edit");
  e.seg_len_s = Get<double>(edit, "seg_len_s", "edit");
  e.iou_gate = Get<double>(edit, "iou_gate", "edit");

  const json& co = document.at("cotrain");
  cfg.cotrain.gamma = Get<double>(co, "gamma", "cotrain");
  cfg.cotrain.patience = GetCount(co, "patience", "cotrain");
  cfg.cotrain.max_epochs = GetCount(co, "max_epochs", "cotrain");
  cfg.cotrain.teacher_mode =
      ParseTeacherMode(Get<std::string>(co, "teacher_mode", "cotrain"));

  cfg.cotrain.Validate();
  if (cfg.synth) cfg.synth->Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::optional<std::string>& path,
                        const std::vector<std::string>& overrides) {
  json user = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config " + *path);
    try {
      user = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config " + *path + ": " + e.what());
    }
  }
  json document = MergeWithDefaults(user);
  for (const std::string& assignment : overrides) {
    ApplyAssignment(document, assignment);
  }
  return ParseRunConfig(document);
}

}  // namespace clipedit
