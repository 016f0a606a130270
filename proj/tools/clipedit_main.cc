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

// Command-line entry point: synth, warmup, cotrain, eval and ablate.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clipedit/commands.h"
#include "clipedit/run_config.h"

int main(int argc, char** argv) {
  CLI::App app{"Timestamp-supervised clip editing for caption-to-clip retrieval"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;
  bool check = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "Override a config value (KEY=VALUE)")
      ->take_all();
  app.add_option("--out", out_dir, "Output directory (paths.output)");
  app.add_option("--workers", workers, "Threads for editing and evaluation");
  app.add_flag("--check", check, "Re-read and validate written outputs");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  auto* warmup = app.add_subcommand("warmup", "Warm up on initial clips");
  auto* cotrain =
      app.add_subcommand("cotrain", "Warm-up, control set and co-training");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "Encoder checkpoint (.cfp)")
      ->required();
  auto* ablate = app.add_subcommand("ablate", "Sweep one setting");
  std::string axis;
  std::vector<std::string> values;
  ablate
      ->add_option("--axis", axis,
                   "topk|iou_gate|gamma|jitter|init_strategy|teacher_mode")
      ->required();
  ablate->add_option("--values", values, "Values to sweep")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : clipedit::kExitConfig;
  }

  clipedit::RunConfig cfg;
  const int load_code = clipedit::RunGuarded([&] {
    std::vector<std::string> all = overrides;
    if (!out_dir.empty()) {
      all.push_back("paths.output=" + nlohmann::json(out_dir).dump());
    }
    if (workers > 0) all.push_back("workers=" + std::to_string(workers));
    cfg = clipedit::LoadRunConfig(
        config_path.empty() ? std::nullopt
                            : std::optional<std::string>(config_path),
        all);
    return clipedit::kExitOk;
  });
  if (load_code != clipedit::kExitOk) return load_code;

  if (synth->parsed()) return clipedit::CmdSynth(cfg, check);
  if (warmup->parsed()) return clipedit::CmdWarmup(cfg, check);
  if (cotrain->parsed()) return clipedit::CmdCoTrain(cfg, check);
  if (eval->parsed()) return clipedit::CmdEval(cfg, checkpoint, check);
  if (ablate->parsed()) return clipedit::CmdAblate(cfg, axis, values, check);
  return clipedit::kExitConfig;
}
