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

#include "clipedit/timeline.h"

#include <random>

#include "clipedit/error.h"
#include "gtest/gtest.h"

namespace clipedit {
namespace {

TEST(IntervalTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Interval(3.0, 3.0), Error);
  EXPECT_THROW(Interval(4.0, 3.0), Error);
  EXPECT_THROW(Interval(-1.0, 3.0), Error);
  EXPECT_THROW(Interval(0.0, std::nan("")), Error);
  EXPECT_DOUBLE_EQ(Interval(2.0, 5.5).length(), 3.5);
}

TEST(IouTest, Fixtures) {
  EXPECT_DOUBLE_EQ(Iou(Interval(0, 10), Interval(0, 10)), 1.0);
  EXPECT_DOUBLE_EQ(Iou(Interval(0, 1), Interval(5, 6)), 0.0);
  EXPECT_DOUBLE_EQ(Iou(Interval(0, 4), Interval(2, 6)), 2.0 / 6.0);
  // Touching spans share no time.
  EXPECT_DOUBLE_EQ(Iou(Interval(0, 2), Interval(2, 3)), 0.0);
}

TEST(IouTest, SymmetricBoundedAndOneOnlyForIdentical) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const double a0 = u(rng), b0 = u(rng);
    const Interval a(a0, a0 + 0.1 + u(rng));
    const Interval b(b0, b0 + 0.1 + u(rng));
    const double ab = Iou(a, b);
    EXPECT_EQ(ab, Iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_LT(ab, 1.0);
    EXPECT_EQ(Iou(a, a), 1.0);
  }
}

TEST(SegmentGridTest, Fixtures) {
  const SegmentGrid g5 = MakeSegmentGrid(Interval(0, 5), 1.0);
  ASSERT_EQ(g5.n_segments, 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(g5.Segment(i), Interval(i, i + 1.0));
  }

  const SegmentGrid g55 = MakeSegmentGrid(Interval(0, 5.5), 1.0);
  ASSERT_EQ(g55.n_segments, 5u);
  EXPECT_EQ(g55.Segment(4), Interval(4.0, 5.5));

  const SegmentGrid tiny = MakeSegmentGrid(Interval(0, 0.4), 1.0);
  ASSERT_EQ(tiny.n_segments, 1u);
  EXPECT_EQ(tiny.Segment(0), Interval(0.0, 0.4));

  EXPECT_THROW(MakeSegmentGrid(Interval(0, 1), 0.0), Error);
}

TEST(SegmentGridTest, SegmentsTileTheClip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> start(0.0, 100.0);
  std::uniform_real_distribution<double> len(0.05, 40.0);
  std::uniform_real_distribution<double> seg(0.1, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double s = start(rng);
    const Interval clip(s, s + len(rng));
    const SegmentGrid grid = MakeSegmentGrid(clip, seg(rng));
    ASSERT_GE(grid.n_segments, 1u);
    EXPECT_EQ(grid.Segment(0).start(), clip.start());
    EXPECT_EQ(grid.Segment(grid.n_segments - 1).end(), clip.end());
    for (std::size_t i = 0; i + 1 < grid.n_segments; ++i) {
      EXPECT_EQ(grid.Segment(i).end(), grid.Segment(i + 1).start());
    }
  }
}

TEST(InitialClipTest, MidpointNeighbors) {
  const Interval video(0, 300);
  EXPECT_EQ(InitialClip(10.0, 20.0, 40.0, video, InitStrategy{}),
            Interval(15, 30));
  EXPECT_EQ(InitialClip(std::nullopt, 4.0, 10.0, Interval(0, 100),
                        InitStrategy{}),
            Interval(0, 7));
  EXPECT_EQ(InitialClip(80.0, 90.0, std::nullopt, Interval(0, 100),
                        InitStrategy{}),
            Interval(85, 100));
}

TEST(InitialClipTest, OtherStrategies) {
  const Interval video(0, 300);
  EXPECT_EQ(InitialClip(std::nullopt, 20.0, std::nullopt, video,
                        InitStrategy::FixedHalfWidth(10)),
            Interval(10, 30));
  // Clamped to the video.
  EXPECT_EQ(InitialClip(std::nullopt, 4.0, std::nullopt, video,
                        InitStrategy::FixedHalfWidth(10)),
            Interval(0, 14));
  EXPECT_EQ(InitialClip(10.0, 20.0, 40.0, video,
                        InitStrategy::FromName("next", 10)),
            Interval(20, 40));
  EXPECT_EQ(InitialClip(10.0, 20.0, 40.0, video,
                        InitStrategy::FromName("prev", 10)),
            Interval(10, 20));
  EXPECT_EQ(InitialClip(10.0, 20.0, 40.0, video,
                        InitStrategy::FromName("full", 10)),
            Interval(10, 40));
  EXPECT_THROW(InitStrategy::FixedHalfWidth(0.0), Error);
  EXPECT_THROW(InitStrategy::FromName("sideways", 1.0), Error);
}

TEST(InitialClipTest, DegenerateAndInvalidInputs) {
  // NextGap for a caption sitting on the video end has nothing to cover.
  EXPECT_THROW(InitialClip(10.0, 100.0, std::nullopt, Interval(0, 100),
                           InitStrategy::FromName("next", 1)),
               Error);
  EXPECT_THROW(InitialClip(std::nullopt, 120.0, std::nullopt, Interval(0, 100),
                           InitStrategy{}),
               Error);
  EXPECT_THROW(InitialClip(30.0, 20.0, 40.0, Interval(0, 100), InitStrategy{}),
               Error);
}

TEST(InitialClipTest, MidpointAlwaysContainsTimestamp) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double dur = 10.0 + 200.0 * u(rng);
    const double t = dur * (0.01 + 0.98 * u(rng));
    std::optional<double> prev, next;
    if (u(rng) < 0.8) prev = t * u(rng);
    if (u(rng) < 0.8) next = t + (dur - t) * (0.01 + 0.99 * u(rng));
    if (prev && *prev >= t) prev.reset();
    if (next && *next <= t) next.reset();
    const Interval clip =
        InitialClip(prev, t, next, Interval(0, dur), InitStrategy{});
    EXPECT_TRUE(clip.Contains(t));
  }
}

TEST(JitterTest, ZeroJitterIsIdentity) {
  std::mt19937_64 rng(5);
  const Interval clip(10, 20);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(Jitter(clip, 0.0, Interval(0, 100), rng), clip);
  }
}

TEST(JitterTest, ShiftArithmeticAndFallback) {
  EXPECT_EQ(ShiftBoundaries(Interval(10, 20), 1.5, -0.5, Interval(0, 100)),
            Interval(11.5, 19.5));
  EXPECT_EQ(ShiftBoundaries(Interval(0, 2), 1.8, -1.5, Interval(0, 100)),
            Interval(0, 2));
  EXPECT_EQ(ShiftBoundaries(Interval(1, 3), -2.0, 0.0, Interval(0, 100)),
            Interval(0, 3));
}

TEST(JitterTest, StaysInsideVideoAndWithinBound) {
  std::mt19937_64 rng(9);
  const Interval video(0, 60);
  for (int i = 0; i < 2000; ++i) {
    const Interval clip(1.0 + (i % 50), 3.0 + (i % 50));
    const Interval out = Jitter(clip, 2.0, video, rng);
    EXPECT_TRUE(video.Contains(out));
    EXPECT_LE(std::abs(out.start() - clip.start()), 2.0);
    EXPECT_LE(std::abs(out.end() - clip.end()), 2.0);
  }
}

}  // namespace
}  // namespace clipedit
