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

#include "clipedit/corpus.h"

#include <cmath>
#include <fstream>
#include <numeric>

#include "clipedit/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace clipedit {
namespace {

using testing::ScratchDir;

void WriteLines(const std::filesystem::path& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

TEST(LoadAnnotationsTest, ParsesMinimalLine) {
  const auto dir = ScratchDir("ann_min");
  WriteLines(dir / "a.jsonl",
             {R"({"caption_id":"c1","video_id":"v1","timestamp":12.0,"split":"train"})"});
  const auto anns = LoadAnnotations((dir / "a.jsonl").string());
  ASSERT_EQ(anns.size(), 1u);
  EXPECT_EQ(anns[0].caption_id, "c1");
  EXPECT_EQ(anns[0].video_id, "v1");
  EXPECT_EQ(anns[0].timestamp_s, 12.0);
  EXPECT_FALSE(anns[0].gt_interval.has_value());
  EXPECT_EQ(anns[0].split, Split::kTrain);
}

TEST(LoadAnnotationsTest, SortsByVideoThenTimestamp) {
  const auto dir = ScratchDir("ann_sort");
  WriteLines(dir / "a.jsonl",
             {R"({"caption_id":"b","video_id":"v2","timestamp":1,"split":"test"})",
              R"({"caption_id":"late","video_id":"v1","timestamp":30,"split":"train"})",
              R"({"caption_id":"early","video_id":"v1","timestamp":5,"split":"train","gt_start":2,"gt_end":9,"text":"crack eggs"})"});
  const auto anns = LoadAnnotations((dir / "a.jsonl").string());
  ASSERT_EQ(anns.size(), 3u);
  EXPECT_EQ(anns[0].caption_id, "early");
  EXPECT_EQ(anns[1].caption_id, "late");
  EXPECT_EQ(anns[2].caption_id, "b");
  EXPECT_EQ(*anns[0].gt_interval, Interval(2, 9));
  EXPECT_EQ(*anns[0].text, "crack eggs");
}

TEST(LoadAnnotationsTest, MissingTimestampNamesTheLine) {
  const auto dir = ScratchDir("ann_bad");
  WriteLines(dir / "a.jsonl",
             {R"({"caption_id":"c1","video_id":"v1","timestamp":1,"split":"train"})",
              R"({"caption_id":"c2","video_id":"v1","split":"train"})"});
  try {
    LoadAnnotations((dir / "a.jsonl").string());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("timestamp"), std::string::npos) << msg;
  }
}

TEST(LoadAnnotationsTest, MalformedJsonAndBadSplit) {
  const auto dir = ScratchDir("ann_malformed");
  WriteLines(dir / "a.jsonl", {"{not json"});
  EXPECT_THROW(LoadAnnotations((dir / "a.jsonl").string()), Error);
  WriteLines(dir / "b.jsonl",
             {R"({"caption_id":"c","video_id":"v","timestamp":1,"split":"dev"})"});
  EXPECT_THROW(LoadAnnotations((dir / "b.jsonl").string()), Error);
  WriteLines(dir / "c.jsonl",
             {R"({"caption_id":"c","video_id":"v","timestamp":1,"split":"train","gt_start":0})"});
  EXPECT_THROW(LoadAnnotations((dir / "c.jsonl").string()), Error);
}

FeatureStore SmallStore() {
  FeatureStore store;
  VideoRecord v{"v1", 10.0, Matrix<float>(10, 2)};
  for (std::size_t r = 0; r < 10; ++r) {
    v.features(r, 0) = static_cast<float>(r);
    v.features(r, 1) = 1.0f;
  }
  store.AddVideo(std::move(v));
  store.AddCaption("c1", {1.0f, 0.0f});
  return store;
}

TEST(ValidateAnnotationsTest, TimestampOutsideVideoNamesCaption) {
  const FeatureStore store = SmallStore();
  CaptionAnnotation a{"c1", "v1", 12.0, std::nullopt, Split::kTrain, {}};
  try {
    ValidateAnnotations(std::span(&a, 1), store);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("c1"), std::string::npos);
  }
  a.timestamp_s = 5.0;
  EXPECT_NO_THROW(ValidateAnnotations(std::span(&a, 1), store));
  a.video_id = "nope";
  EXPECT_THROW(ValidateAnnotations(std::span(&a, 1), store), Error);
}

TEST(FeatureStoreTest, RejectsInconsistentRecords) {
  FeatureStore store = SmallStore();
  EXPECT_THROW(store.AddCaption("c2", {1.0f, 2.0f, 3.0f}), Error);
  EXPECT_THROW(store.AddVideo({"v2", 4.0, Matrix<float>(3, 2)}), Error);
  EXPECT_THROW(store.AddVideo({"v1", 10.0, Matrix<float>(10, 2)}), Error);
  VideoRecord bad{"v3", 1.0, Matrix<float>(1, 2)};
  bad.features(0, 0) = std::nanf("");
  EXPECT_THROW(store.AddVideo(std::move(bad)), Error);
  EXPECT_THROW(store.video("missing"), Error);
}

TEST(SegmentFeaturesTest, AlignedUnitGridPicksRows) {
  const FeatureStore store = SmallStore();
  const SegmentGrid grid = MakeSegmentGrid(Interval(3, 8), 1.0);
  const Matrix<float> f = SegmentFeatures(store, "v1", grid);
  ASSERT_EQ(f.rows(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(f(i, 0), 3.0f + i);
}

TEST(SegmentFeaturesTest, TwoSecondSegmentsAverage) {
  const FeatureStore store = SmallStore();
  const Matrix<float> f =
      SegmentFeatures(store, "v1", MakeSegmentGrid(Interval(2, 8), 2.0));
  ASSERT_EQ(f.rows(), 3u);
  EXPECT_EQ(f(0, 0), 2.5f);
  EXPECT_EQ(f(1, 0), 4.5f);
  EXPECT_EQ(f(2, 0), 6.5f);
}

TEST(SegmentFeaturesTest, ShortSegmentFallsBackToNearestRow) {
  const FeatureStore store = SmallStore();
  // The last segment [6, 7.4) covers only 40% of row 7, so it pools row 6.
  const Matrix<float> f =
      SegmentFeatures(store, "v1", MakeSegmentGrid(Interval(5, 7.4), 1.0));
  ASSERT_EQ(f.rows(), 2u);
  EXPECT_EQ(f(1, 0), 6.0f);
  const Matrix<float> g =
      SegmentFeatures(store, "v1", MakeSegmentGrid(Interval(7.1, 7.5), 1.0));
  ASSERT_EQ(g.rows(), 1u);
  EXPECT_EQ(g(0, 0), 7.0f);
}

TEST(SegmentFeaturesTest, ErrorsAndFiniteness) {
  const FeatureStore store = SmallStore();
  EXPECT_THROW(SegmentFeatures(store, "zz", MakeSegmentGrid(Interval(0, 2), 1)),
               Error);
  EXPECT_THROW(SegmentFeatures(store, "v1", MakeSegmentGrid(Interval(5, 12), 1)),
               Error);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 9.0);
  for (int i = 0; i < 500; ++i) {
    const double s = u(rng);
    const double e = std::min(10.0, s + 0.05 + u(rng));
    const Matrix<float> f = SegmentFeatures(
        store, "v1", MakeSegmentGrid(Interval(s, e), 0.3 + u(rng) / 3));
    for (float v : f.flat()) EXPECT_TRUE(std::isfinite(v));
  }
}

SynthConfig TinySynth() {
  SynthConfig cfg;
  cfg.n_train_videos = 6;
  cfg.n_test_videos = 2;
  cfg.captions_per_video = 4;
  cfg.video_len_s = 80;
  cfg.dim = 16;
  return cfg;
}

TEST(SynthCorpusTest, ZeroNoiseRowsEqualCaptionFeature) {
  SynthConfig cfg = TinySynth();
  cfg.noise_sigma = 0.0;
  cfg.caption_noise_sigma = 0.0;
  const SynthCorpus corpus = GenerateSynthCorpus(cfg);
  std::size_t checked = 0;
  for (const CaptionAnnotation& a : corpus.annotations) {
    const auto cap = corpus.store.caption(a.caption_id);
    const VideoRecord& v = corpus.store.video(a.video_id);
    for (std::size_t r = 0; r < v.features.rows(); ++r) {
      if (!RowCoveredBy(r, *a.gt_interval)) continue;
      const auto row = v.features.row(r);
      EXPECT_TRUE(std::equal(row.begin(), row.end(), cap.begin()));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(SynthCorpusTest, BackgroundIsNearOrthogonal) {
  SynthConfig cfg = TinySynth();
  cfg.noise_sigma = 0.0;
  cfg.caption_noise_sigma = 0.0;
  cfg.n_train_videos = 20;
  const SynthCorpus corpus = GenerateSynthCorpus(cfg);
  double sum = 0.0;
  std::size_t n = 0;
  for (const CaptionAnnotation& a : corpus.annotations) {
    const auto cap = corpus.store.caption(a.caption_id);
    const VideoRecord& v = corpus.store.video(a.video_id);
    for (std::size_t r = 0; r < v.features.rows(); ++r) {
      bool in_any_gt = false;
      for (const CaptionAnnotation& b : corpus.annotations) {
        if (b.video_id == a.video_id && RowCoveredBy(r, *b.gt_interval)) {
          in_any_gt = true;
        }
      }
      if (in_any_gt) continue;
      const auto row = v.features.row(r);
      sum += std::inner_product(row.begin(), row.end(), cap.begin(), 0.0);
      ++n;
    }
  }
  ASSERT_GE(n, 1000u);
  EXPECT_LT(std::abs(sum / n), 3.0 / std::sqrt(16.0));
}

TEST(SynthCorpusTest, GroundTruthInvariants) {
  const SynthCorpus corpus = GenerateSynthCorpus(TinySynth());
  ASSERT_EQ(corpus.annotations.size(), 32u);
  std::map<std::string, std::vector<Interval>> per_video;
  for (const CaptionAnnotation& a : corpus.annotations) {
    ASSERT_TRUE(a.gt_interval.has_value());
    EXPECT_GT(a.timestamp_s, a.gt_interval->start());
    EXPECT_LT(a.timestamp_s, a.gt_interval->end());
    EXPECT_GE(a.gt_interval->length(), 5.0 - 1e-9);
    EXPECT_LE(a.gt_interval->length(), 15.0 + 1e-9);
    EXPECT_LE(a.gt_interval->end(), 80.0);
    per_video[a.video_id].push_back(*a.gt_interval);
  }
  for (const auto& [vid, gts] : per_video) {
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t j = i + 1; j < gts.size(); ++j) {
        EXPECT_EQ(Overlap(gts[i], gts[j]), 0.0);
      }
    }
  }
  EXPECT_NO_THROW(ValidateAnnotations(corpus.annotations, corpus.store));
}

TEST(SynthCorpusTest, DeterministicPerSeed) {
  const SynthCorpus a = GenerateSynthCorpus(TinySynth());
  const SynthCorpus b = GenerateSynthCorpus(TinySynth());
  EXPECT_TRUE(a.store == b.store);
  ASSERT_EQ(a.annotations.size(), b.annotations.size());
  for (std::size_t i = 0; i < a.annotations.size(); ++i) {
    EXPECT_EQ(a.annotations[i].timestamp_s, b.annotations[i].timestamp_s);
    EXPECT_EQ(a.annotations[i].gt_interval, b.annotations[i].gt_interval);
  }
  SynthConfig other = TinySynth();
  other.seed = 1;
  EXPECT_FALSE(GenerateSynthCorpus(other).store == a.store);
}

TEST(SynthCorpusTest, InfeasiblePlacementIsRejected) {
  SynthConfig cfg = TinySynth();
  cfg.captions_per_video = 10;  // 10 * 15 s > 80 s
  EXPECT_THROW(GenerateSynthCorpus(cfg), Error);
  cfg = TinySynth();
  cfg.gt_len_min_s = 20;
  cfg.gt_len_max_s = 10;
  EXPECT_THROW(GenerateSynthCorpus(cfg), Error);
}

TEST(SampleTimestampTest, BoundsDeterminismAndMean) {
  std::mt19937_64 rng(0);
  const Interval narrow(10.0, 10.0001);
  for (int i = 0; i < 100; ++i) {
    const double t = SampleTimestamp(narrow, rng);
    EXPECT_GT(t, 10.0);
    EXPECT_LT(t, 10.0001);
  }
  std::mt19937_64 a(42), b(42);
  EXPECT_EQ(SampleTimestamp(Interval(0, 1), a), SampleTimestamp(Interval(0, 1), b));

  std::mt19937_64 stat(0);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += SampleTimestamp(Interval(0, 1), stat);
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

}  // namespace
}  // namespace clipedit
