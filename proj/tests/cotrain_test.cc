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

#include <fstream>
#include <sstream>

#include "clipedit/error.h"
#include "clipedit/evaluation.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace clipedit {
namespace {

struct Fixture {
  SynthCorpus corpus;
  ClipAssignment initial;
  CoTrainConfig cfg;

  explicit Fixture(double noise = 0.3) {
    SynthConfig s;
    s.n_train_videos = 16;
    s.n_test_videos = 0;
    s.captions_per_video = 4;
    s.video_len_s = 80;
    s.dim = 16;
    s.noise_sigma = noise;
    s.caption_noise_sigma = noise / 3;
    corpus = GenerateSynthCorpus(s);
    initial = BuildInitialClips(corpus.annotations, corpus.store,
                                InitStrategy{}, Split::kTrain);
    cfg.train.batch_size = 16;
    cfg.train.learning_rate = 5e-3;
    cfg.train.epochs = 3;
    cfg.gamma = -1.0;
    cfg.patience = 3;
    cfg.max_epochs = 8;
  }
};

TEST(BuildInitialClipsTest, UsesNeighbouringTimestamps) {
  FeatureStore store;
  store.AddVideo({"v", 100.0, Matrix<float>(100, 2)});
  std::vector<CaptionAnnotation> anns = {
      {"a", "v", 10.0, std::nullopt, Split::kTrain, {}},
      {"b", "v", 20.0, std::nullopt, Split::kTest, {}},
      {"c", "v", 40.0, std::nullopt, Split::kTrain, {}}};
  const ClipAssignment train =
      BuildInitialClips(anns, store, InitStrategy{}, Split::kTrain);
  ASSERT_EQ(train.size(), 2u);
  EXPECT_EQ(train.at("a").clip, Interval(0, 15));
  EXPECT_EQ(train.at("c").clip, Interval(30, 100));
  const ClipAssignment all =
      BuildInitialClips(anns, store, InitStrategy{}, std::nullopt);
  EXPECT_EQ(all.at("b").clip, Interval(15, 30));
}

TEST(BuildInitialClipsTest, DegenerateClipNamesCaption) {
  FeatureStore store;
  store.AddVideo({"v", 10.0, Matrix<float>(10, 2)});
  std::vector<CaptionAnnotation> anns = {
      {"late", "v", 10.0, std::nullopt, Split::kTrain, {}}};
  try {
    BuildInitialClips(anns, store, InitStrategy::FromName("next", 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("late"), std::string::npos);
  }
}

TEST(WarmupTest, ZeroEpochsReturnsInitialParams) {
  Fixture f;
  f.cfg.train.epochs = 0;
  const WarmupResult w = WarmupOnClips(f.corpus.store, f.initial, f.cfg.train);
  EXPECT_TRUE(w.epoch_losses.empty());
  EXPECT_EQ(w.initial_clips, f.initial);
  const WarmupResult again =
      WarmupOnClips(f.corpus.store, f.initial, f.cfg.train);
  EXPECT_TRUE(w.state.params == again.state.params);
}

TEST(WarmupTest, CleanCorpusBeatsChance) {
  Fixture f(0.0);
  f.cfg.train.epochs = 10;
  const WarmupResult w = Warmup(f.corpus.store, f.corpus.annotations,
                                InitStrategy{}, f.cfg.train);
  std::vector<std::string> queries;
  for (const auto& [id, entry] : w.initial_clips) queries.push_back(id);
  const auto ranks = RetrievalRanks(w.state.params, f.corpus.store, queries,
                                    w.initial_clips, 1.0);
  EXPECT_GT(RecallAtK(ranks, 1), 1.0 / queries.size());
}

TEST(ControlSetTest, ThresholdRule) {
  Fixture f;
  std::mt19937_64 rng(0);
  const EncoderParams p = InitEncoderParams(16, 16, 0.07, rng);
  const ControlSet all = SelectControlSet(p, f.corpus.store, f.initial, -1.0, 1.0);
  EXPECT_EQ(all.caption_ids.size(), f.initial.size());
  EXPECT_THROW(SelectControlSet(p, f.corpus.store, f.initial, 1.0, 1.0), Error);

  const auto sims = PairSimilarities(p, f.corpus.store, f.initial, 1.0);
  std::vector<double> values;
  for (const auto& [id, s] : sims) values.push_back(s);
  std::sort(values.begin(), values.end());
  const double gamma = values[values.size() / 2];
  const ControlSet half = SelectControlSet(p, f.corpus.store, f.initial, gamma, 1.0);
  for (const auto& id : half.caption_ids) {
    EXPECT_GT(sims.at(id), gamma);
    EXPECT_EQ(half.frozen_clips.at(id), f.initial.at(id));
  }
  std::size_t above = 0;
  for (double v : values) above += v > gamma;
  EXPECT_EQ(half.caption_ids.size(), above);
}

TEST(ControlSetTest, SingletonMonitorIsOne) {
  Fixture f;
  ControlSet c;
  c.caption_ids = {f.initial.begin()->first};
  c.frozen_clips.insert(*f.initial.begin());
  std::mt19937_64 rng(0);
  EXPECT_EQ(MonitorMetric(InitEncoderParams(16, 16, 0.07, rng), f.corpus.store,
                          c, 1.0),
            1.0);
}

TEST(ControlSetTest, IdenticalEmbeddingsFollowTieRule) {
  // Two captions with equal features and clips: both rank the first gallery
  // clip on top, so exactly one of them scores.
  FeatureStore store;
  Matrix<float> rows(4, 2);
  for (std::size_t r = 0; r < 4; ++r) rows(r, 0) = 1.0f;
  store.AddVideo({"v", 4.0, rows});
  store.AddCaption("x", {1.0f, 0.0f});
  store.AddCaption("y", {1.0f, 0.0f});
  ControlSet c;
  c.caption_ids = {"x", "y"};
  c.frozen_clips.insert_or_assign("x", ClipEntry{"v", Interval(0, 2)});
  c.frozen_clips.insert_or_assign("y", ClipEntry{"v", Interval(2, 4)});
  EXPECT_EQ(MonitorMetric(testing::IdentityParams(2), store, c, 1.0), 0.5);
}

CoTrainResult RunMode(const Fixture& f, TeacherMode mode,
                  const EpochObserver& obs = {}) {
  CoTrainConfig cfg = f.cfg;
  cfg.teacher_mode = mode;
  const WarmupResult w = WarmupOnClips(f.corpus.store, f.initial, cfg.train);
  const ControlSet control =
      SelectControlSet(w.state.params, f.corpus.store, f.initial, cfg.gamma, 1.0);
  return CoTrain(w.state, f.initial, control, f.corpus.store, cfg, 1, obs);
}

TEST(CoTrainTest, ZeroEpochsEchoesWarmup) {
  Fixture f;
  f.cfg.max_epochs = 0;
  const WarmupResult w = WarmupOnClips(f.corpus.store, f.initial, f.cfg.train);
  const ControlSet control = SelectControlSet(w.state.params, f.corpus.store,
                                              f.initial, -1.0, 1.0);
  const CoTrainResult r =
      CoTrain(w.state, f.initial, control, f.corpus.store, f.cfg);
  EXPECT_TRUE(r.log.empty());
  EXPECT_TRUE(r.final_student == w.state.params);
  EXPECT_TRUE(r.teacher == w.state.params);
  EXPECT_EQ(r.clips, f.initial);
}

TEST(CoTrainTest, FrozenStudentExitsAfterPatience) {
  Fixture f;
  f.cfg.train.learning_rate = 0.0;
  f.cfg.patience = 4;
  f.cfg.max_epochs = 20;
  const CoTrainResult r = RunMode(f, TeacherMode::kUpdate);
  ASSERT_EQ(r.log.size(), 4u);
  for (const auto& rec : r.log) EXPECT_FALSE(rec.teacher_updated);
  EXPECT_EQ(r.best_epoch, 0u);
}

TEST(CoTrainTest, MaxEpochsBoundsTheLoop) {
  Fixture f;
  f.cfg.patience = 100;
  f.cfg.max_epochs = 3;
  EXPECT_EQ(RunMode(f, TeacherMode::kUpdate).log.size(), 3u);
}

TEST(CoTrainTest, TeacherIsAlwaysAStudentSnapshot) {
  Fixture f;
  const WarmupResult w = WarmupOnClips(f.corpus.store, f.initial, f.cfg.train);
  std::vector<EncoderParams> allowed = {w.state.params};
  std::size_t checked = 0;
  const CoTrainResult r = RunMode(f, TeacherMode::kUpdate, [&](const EpochView& v) {
    bool found = false;
    for (const auto& a : allowed) found = found || a == v.teacher_used;
    EXPECT_TRUE(found) << "epoch " << v.record.epoch;
    if (v.record.teacher_updated) allowed.push_back(v.student);
    ++checked;
  });
  EXPECT_EQ(checked, r.log.size());
  bool final_found = false;
  for (const auto& a : allowed) final_found = final_found || a == r.teacher;
  EXPECT_TRUE(final_found);
}

TEST(CoTrainTest, ModesProduceDistinctLogs) {
  Fixture f;
  std::vector<std::vector<EpochRecord>> logs;
  for (TeacherMode m : {TeacherMode::kUpdate, TeacherMode::kFrozen,
                        TeacherMode::kRandom, TeacherMode::kSelf}) {
    logs.push_back(RunMode(f, m).log);
  }
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (std::size_t j = i + 1; j < logs.size(); ++j) {
      EXPECT_NE(logs[i], logs[j]) << i << " vs " << j;
    }
  }
}

TEST(CoTrainTest, FrozenAndUpdateDivergeAfterFirstCopy) {
  Fixture f;
  const auto update = RunMode(f, TeacherMode::kUpdate).log;
  const auto frozen = RunMode(f, TeacherMode::kFrozen).log;
  std::size_t first_copy = 0;
  for (const auto& rec : update) {
    if (rec.teacher_updated) {
      first_copy = rec.epoch;
      break;
    }
  }
  ASSERT_GT(first_copy, 0u) << "no teacher copy happened";
  ASSERT_GT(update.size(), first_copy);
  ASSERT_GT(frozen.size(), first_copy);
  for (std::size_t e = 0; e < first_copy; ++e) {
    EXPECT_EQ(update[e].train_loss, frozen[e].train_loss);
    EXPECT_EQ(update[e].n_applied_edits, frozen[e].n_applied_edits);
  }
  EXPECT_NE(update[first_copy].train_loss, frozen[first_copy].train_loss);
}

TEST(CoTrainTest, Deterministic) {
  Fixture f;
  const auto a = RunMode(f, TeacherMode::kUpdate);
  const auto b = RunMode(f, TeacherMode::kUpdate);
  EXPECT_EQ(a.log, b.log);
  EXPECT_TRUE(a.teacher == b.teacher);
  EXPECT_EQ(a.clips, b.clips);
}

TEST(CoTrainLogTest, RoundTrip) {
  const auto dir = testing::ScratchDir("cotrain_log");
  const std::vector<EpochRecord> records = {{1, 2.5, 0.25, 40, true},
                                            {2, 2.25, 0.25, 38, false}};
  {
    std::ofstream out(dir / "log.jsonl");
    for (const auto& r : records) WriteEpochRecord(out, r);
  }
  EXPECT_EQ(ReadCoTrainLog((dir / "log.jsonl").string()), records);
  std::ofstream(dir / "bad.jsonl") << "{\"epoch\":1}\n";
  EXPECT_THROW(ReadCoTrainLog((dir / "bad.jsonl").string()), Error);
}

TEST(TeacherModeTest, Names) {
  for (TeacherMode m : {TeacherMode::kUpdate, TeacherMode::kFrozen,
                        TeacherMode::kRandom, TeacherMode::kSelf}) {
    EXPECT_EQ(ParseTeacherMode(TeacherModeName(m)), m);
  }
  EXPECT_THROW(ParseTeacherMode("ema"), Error);
}

}  // namespace
}  // namespace clipedit
