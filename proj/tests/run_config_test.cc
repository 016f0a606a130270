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
#include "gtest/gtest.h"
#include "test_util.h"

namespace clipedit {
namespace {

TEST(RunConfigTest, DefaultsParse) {
  const RunConfig cfg = LoadRunConfig(std::nullopt, {});
  ASSERT_TRUE(cfg.synth.has_value());
  EXPECT_EQ(cfg.synth->n_train_videos, 200u);
  EXPECT_EQ(cfg.edit().k, 10u);
  EXPECT_EQ(cfg.cotrain.patience, 5u);
  EXPECT_EQ(cfg.cotrain.max_epochs, 50u);
  EXPECT_EQ(cfg.cotrain.teacher_mode, TeacherMode::kUpdate);
  EXPECT_EQ(cfg.init_strategy.kind, InitStrategy::Kind::kMidpointNeighbors);
  EXPECT_EQ(cfg.paths.output, "out");
}

TEST(RunConfigTest, OverridesAreTyped) {
  const RunConfig cfg = LoadRunConfig(
      std::nullopt, {"edit.k=4", "cotrain.teacher_mode=frozen",
                     "init_strategy.kind=\"fixed\"", "seed=7",
                     "paths.output=results/a"});
  EXPECT_EQ(cfg.edit().k, 4u);
  EXPECT_EQ(cfg.cotrain.teacher_mode, TeacherMode::kFrozen);
  EXPECT_EQ(cfg.init_strategy.kind, InitStrategy::Kind::kFixedHalfWidth);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.synth->seed, 7u);
  EXPECT_EQ(cfg.train().seed, 7u);
  EXPECT_EQ(cfg.paths.output, "results/a");
}

TEST(RunConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"edit.topk=4"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"edit.k"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"edit.k=banana"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"edit.iou_gate=2"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"train.batch_size=1"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"cotrain.teacher_mode=ema"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"workers=0"}), Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"synth.captions_per_video=20"}),
               Error);
}

TEST(RunConfigTest, ExactlyOneDataSource) {
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"paths.features=feat",
                                            "paths.annotations=a.jsonl"}),
               Error);
  EXPECT_THROW(LoadRunConfig(std::nullopt, {"synth=null"}), Error);
  const RunConfig files = LoadRunConfig(
      std::nullopt,
      {"synth=null", "paths.features=feat", "paths.annotations=a.jsonl"});
  EXPECT_FALSE(files.synth.has_value());
  EXPECT_THROW(
      LoadRunConfig(std::nullopt, {"synth=null", "paths.features=feat"}),
      Error);
}

TEST(RunConfigTest, SynthKeyReenablesSection) {
  nlohmann::json doc = DefaultConfigDocument();
  ApplyOverride(doc, "synth", "null");
  ApplyOverride(doc, "synth.dim", "8");
  const RunConfig cfg = ParseRunConfig(doc);
  ASSERT_TRUE(cfg.synth.has_value());
  EXPECT_EQ(cfg.synth->dim, 8u);
  EXPECT_EQ(cfg.synth->n_train_videos, 200u);
}

TEST(RunConfigTest, FileMergesOverDefaults) {
  const auto dir = testing::ScratchDir("run_config");
  std::ofstream(dir / "cfg.json")
      << R"({"edit": {"k": 6}, "synth": {"noise_sigma": 0.0}})";
  const RunConfig cfg =
      LoadRunConfig((dir / "cfg.json").string(), {"edit.iou_gate=0.5"});
  EXPECT_EQ(cfg.edit().k, 6u);
  EXPECT_EQ(cfg.edit().iou_gate, 0.5);
  EXPECT_EQ(cfg.synth->noise_sigma, 0.0);
  EXPECT_EQ(cfg.synth->dim, 32u);

  std::ofstream(dir / "bad.json") << R"({"edit": {"kk": 6}})";
  EXPECT_THROW(LoadRunConfig((dir / "bad.json").string(), {}), Error);
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_THROW(LoadRunConfig((dir / "broken.json").string(), {}), Error);
  EXPECT_THROW(LoadRunConfig((dir / "missing.json").string(), {}), Error);
}

}  // namespace
}  // namespace clipedit
