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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clipedit/error.h"

namespace clipedit {
namespace {

// Absorbs representation error in (end - origin) / seg_len so that a clip of
// exactly n segments is not split into n - 1.
constexpr double kGridSlack = 1e-9;

}  // namespace

Interval::Interval(double start_s, double end_s)
    : start_s_(start_s), end_s_(end_s) {
  if (!std::isfinite(start_s) || !std::isfinite(end_s)) {
    throw ValidationError("interval bounds must be finite");
  }
  if (start_s < 0.0) {
    throw ValidationError("interval start must be >= 0, got " +
                          std::to_string(start_s));
  }
  if (!(start_s < end_s)) {
    throw ValidationError("empty interval [" + std::to_string(start_s) + ", " +
                          std::to_string(end_s) + "]");
  }
}

std::string Interval::ToString() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Interval& interval) {
  return os << "[" << interval.start() << ", " << interval.end() << "]";
}

double Overlap(const Interval& a, const Interval& b) {
  return std::max(0.0,
                  std::min(a.end(), b.end()) - std::max(a.start(), b.start()));
}

double Iou(const Interval& a, const Interval& b) {
  const double inter = Overlap(a, b);
  if (inter <= 0.0) return 0.0;
  if (a == b) return 1.0;
  const double uni = a.length() + b.length() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double SegmentGrid::SegmentStart(std::size_t i) const {
  return origin_s + static_cast<double>(i) * seg_len_s;
}

double SegmentGrid::SegmentEnd(std::size_t i) const {
  return i + 1 >= n_segments ? clip_end_s : SegmentStart(i + 1);
}

Interval SegmentGrid::Segment(std::size_t i) const {
  return Interval(SegmentStart(i), SegmentEnd(i));
}

SegmentGrid MakeSegmentGrid(const Interval& clip, double seg_len_s) {
  if (!(seg_len_s > 0.0) || !std::isfinite(seg_len_s)) {
    throw ConfigError("segment length must be positive");
  }
  SegmentGrid grid;
  grid.origin_s = clip.start();
  grid.seg_len_s = seg_len_s;
  grid.clip_end_s = clip.end();
  const double fit = std::floor(clip.length() / seg_len_s + kGridSlack);
  grid.n_segments = std::max<std::size_t>(1, static_cast<std::size_t>(fit));
  return grid;
}

InitStrategy InitStrategy::FixedHalfWidth(double w) {
  if (!(w > 0.0)) throw ConfigError("fixed half-width must be > 0");
  return {Kind::kFixedHalfWidth, w};
}

InitStrategy InitStrategy::FromName(const std::string& name,
                                    double half_width_s) {
  if (name == "midpoint") return {Kind::kMidpointNeighbors, half_width_s};
  if (name == "next") return {Kind::kNextGap, half_width_s};
  if (name == "prev") return {Kind::kPrevGap, half_width_s};
  if (name == "full") return {Kind::kFullNeighbors, half_width_s};
  if (name == "fixed") return FixedHalfWidth(half_width_s);
  throw ConfigError("unknown init strategy '" + name +
                    "' (expected midpoint|next|prev|full|fixed)");
}

std::string InitStrategy::Name() const {
  switch (kind) {
    case Kind::kMidpointNeighbors: return "midpoint";
    case Kind::kNextGap: return "next";
    case Kind::kPrevGap: return "prev";
    case Kind::kFullNeighbors: return "full";
    case Kind::kFixedHalfWidth: return "fixed";
  }
  return "midpoint";
}

Interval InitialClip(std::optional<double> prev_t, double t,
                     std::optional<double> next_t, const Interval& video_span,
                     const InitStrategy& strategy) {
  if (!video_span.Contains(t)) {
    throw ValidationError("timestamp " + std::to_string(t) +
                          " outside video span " + video_span.ToString());
  }
  if ((prev_t && !(*prev_t < t)) || (next_t && !(t < *next_t))) {
    throw ValidationError("neighbouring timestamps must satisfy prev < t < next");
  }
  const double prev = prev_t.value_or(video_span.start());
  const double next = next_t.value_or(video_span.end());

  double start = 0.0;
  double end = 0.0;
  switch (strategy.kind) {
    case InitStrategy::Kind::kMidpointNeighbors:
      start = prev_t ? 0.5 * (prev + t) : prev;
      end = next_t ? 0.5 * (t + next) : next;
      break;
    case InitStrategy::Kind::kNextGap:
      start = t;
      end = next;
      break;
    case InitStrategy::Kind::kPrevGap:
      start = prev;
      end = t;
      break;
    case InitStrategy::Kind::kFullNeighbors:
      start = prev;
      end = next;
      break;
    case InitStrategy::Kind::kFixedHalfWidth:
      if (!(strategy.half_width_s > 0.0)) {
        throw ConfigError("fixed half-width must be > 0");
      }
      start = t - strategy.half_width_s;
      end = t + strategy.half_width_s;
      break;
  }
  start = std::max(start, video_span.start());
  end = std::min(end, video_span.end());
  if (!(start < end)) {
    throw ValidationError("degenerate initial clip at t=" + std::to_string(t) +
                          " with strategy " + strategy.Name());
  }
  return Interval(start, end);
}

Interval ShiftBoundaries(const Interval& clip, double start_offset_s,
                         double end_offset_s, const Interval& video_span) {
  const double start = std::clamp(clip.start() + start_offset_s,
                                  video_span.start(), video_span.end());
  const double end = std::clamp(clip.end() + end_offset_s, video_span.start(),
                                video_span.end());
  if (!(start < end)) return clip;
  return Interval(start, end);
}

Interval Jitter(const Interval& clip, double max_jitter_s,
                const Interval& video_span, std::mt19937_64& rng) {
  if (!(max_jitter_s >= 0.0)) {
    throw ConfigError("max jitter must be >= 0");
  }
  if (max_jitter_s == 0.0) return clip;
  std::uniform_real_distribution<double> draw(-max_jitter_s, max_jitter_s);
  const double start_offset = draw(rng);
  const double end_offset = draw(rng);
  return ShiftBoundaries(clip, start_offset, end_offset, video_span);
}

}  // namespace clipedit
