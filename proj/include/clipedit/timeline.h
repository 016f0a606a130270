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

#ifndef CLIPEDIT_TIMELINE_H_
#define CLIPEDIT_TIMELINE_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <random>
#include <string>

namespace clipedit {

// A half-open span of video time in seconds. Construction rejects
// non-finite values, negative starts and empty spans.
class Interval {
 public:
  Interval(double start_s, double end_s);

  double start() const { return start_s_; }
  double end() const { return end_s_; }
  double length() const { return end_s_ - start_s_; }
  double midpoint() const { return 0.5 * (start_s_ + end_s_); }

  bool Contains(double t) const { return start_s_ <= t && t <= end_s_; }
  bool Contains(const Interval& other) const {
    return start_s_ <= other.start_s_ && other.end_s_ <= end_s_;
  }

  bool operator==(const Interval&) const = default;

  std::string ToString() const;

 private:
  double start_s_;
  double end_s_;
};

std::ostream& operator<<(std::ostream& os, const Interval& interval);

// Temporal length of the intersection; 0 when disjoint.
double Overlap(const Interval& a, const Interval& b);

// Intersection over union of the two spans, in [0, 1].
double Iou(const Interval& a, const Interval& b);

// A clip divided into fixed-length segments. Segment i covers
// [origin + i * seg_len, origin + (i + 1) * seg_len) except the last one,
// which runs to clip_end so the segments tile the clip exactly.
struct SegmentGrid {
  double origin_s = 0.0;
  double seg_len_s = 1.0;
  std::size_t n_segments = 1;
  double clip_end_s = 1.0;

  Interval Segment(std::size_t i) const;
  double SegmentStart(std::size_t i) const;
  double SegmentEnd(std::size_t i) const;
  Interval Span() const { return Interval(origin_s, clip_end_s); }
};

SegmentGrid MakeSegmentGrid(const Interval& clip, double seg_len_s);

// How an initial clip is formed from a caption timestamp and its neighbours
// within the same video.
struct InitStrategy {
  enum class Kind {
    kMidpointNeighbors,  // [(t_prev + t) / 2, (t + t_next) / 2]
    kNextGap,            // [t, t_next]
    kPrevGap,            // [t_prev, t]
    kFullNeighbors,      // [t_prev, t_next]
    kFixedHalfWidth,     // [t - w, t + w]
  };

  Kind kind = Kind::kMidpointNeighbors;
  double half_width_s = 10.0;

  static InitStrategy MidpointNeighbors() { return {}; }
  static InitStrategy FixedHalfWidth(double w);
  static InitStrategy FromName(const std::string& name, double half_width_s);
  std::string Name() const;
};

// Builds the initial clip for a caption at time t. A missing previous or next
// timestamp is replaced by the video start or end. The result is clamped to
// video_span; a degenerate result raises a validation error.
Interval InitialClip(std::optional<double> prev_t, double t,
                     std::optional<double> next_t, const Interval& video_span,
                     const InitStrategy& strategy);

// Shifts start and end by the given offsets, clamps to video_span and falls
// back to the unshifted clip if the result is degenerate.
Interval ShiftBoundaries(const Interval& clip, double start_offset_s,
                         double end_offset_s, const Interval& video_span);

// Draws independent offsets uniformly from [-max_jitter_s, max_jitter_s]
// and applies ShiftBoundaries. max_jitter_s == 0 returns the clip untouched.
Interval Jitter(const Interval& clip, double max_jitter_s,
                const Interval& video_span, std::mt19937_64& rng);

}  // namespace clipedit

#endif  // CLIPEDIT_TIMELINE_H_
