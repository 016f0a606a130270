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

#ifndef CLIPEDIT_CORPUS_H_
#define CLIPEDIT_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clipedit/matrix.h"
#include "clipedit/timeline.h"

namespace clipedit {

enum class Split { kTrain, kTest };

std::string SplitName(Split split);
Split ParseSplit(const std::string& name);

struct CaptionAnnotation {
  std::string caption_id;
  std::string video_id;
  double timestamp_s = 0.0;
  std::optional<Interval> gt_interval;
  Split split = Split::kTrain;
  std::optional<std::string> text;
};

// Per-second visual features of one untrimmed video: row r describes
// [r, r + 1) seconds.
struct VideoRecord {
  std::string video_id;
  double duration_s = 0.0;
  Matrix<float> features;

  Interval Span() const { return Interval(0.0, duration_s); }
};

// Immutable-after-load container of video and caption features sharing one
// feature dimension.
class FeatureStore {
 public:
  FeatureStore() = default;

  std::size_t dim() const { return dim_; }

  void AddVideo(VideoRecord video);
  void AddCaption(const std::string& caption_id, std::vector<float> feature);

  const VideoRecord& video(const std::string& video_id) const;
  std::span<const float> caption(const std::string& caption_id) const;

  bool HasVideo(const std::string& video_id) const {
    return videos_.count(video_id) > 0;
  }
  bool HasCaption(const std::string& caption_id) const {
    return captions_.count(caption_id) > 0;
  }

  const std::map<std::string, VideoRecord>& videos() const { return videos_; }
  const std::map<std::string, std::vector<float>>& captions() const {
    return captions_;
  }

  bool operator==(const FeatureStore&) const;

 private:
  void CheckDim(std::size_t d, const std::string& what);

  std::size_t dim_ = 0;
  std::map<std::string, VideoRecord> videos_;
  std::map<std::string, std::vector<float>> captions_;
};

// Reads JSON Lines annotations and returns them sorted by
// (video_id, timestamp_s). Malformed lines raise errors naming the line.
std::vector<CaptionAnnotation> LoadAnnotations(const std::string& path);
void WriteAnnotations(const std::string& path,
                      std::span<const CaptionAnnotation> annotations);

// Checks that every annotation resolves against the store and that its
// timestamp lies inside the video. A timestamp outside its ground-truth span
// is only warned about, since ingested labels can be noisy.
void ValidateAnnotations(std::span<const CaptionAnnotation> annotations,
                         const FeatureStore& store);

struct SynthConfig {
  std::size_t n_train_videos = 200;
  std::size_t n_test_videos = 50;
  std::size_t captions_per_video = 5;
  double video_len_s = 120.0;
  double gt_len_min_s = 5.0;
  double gt_len_max_s = 15.0;
  std::size_t dim = 32;
  double noise_sigma = 0.3;
  double caption_noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SynthCorpus {
  FeatureStore store;
  std::vector<CaptionAnnotation> annotations;
};

// Generates videos whose ground-truth rows share a latent direction with the
// caption feature and whose remaining rows are isotropic noise. Fully
// determined by cfg.seed.
SynthCorpus GenerateSynthCorpus(const SynthConfig& cfg);

// Uniform draw from the open interval (gt.start, gt.end).
double SampleTimestamp(const Interval& gt, std::mt19937_64& rng);

// True when feature row `row` (covering [row, row + 1)) overlaps `span` for
// at least half of its length.
bool RowCoveredBy(std::size_t row, const Interval& span);

// Pools per-second rows into per-segment features. Segment i averages the
// rows covered by it (see RowCoveredBy); a segment covering no row falls back
// to the row containing its midpoint.
Matrix<float> SegmentFeatures(const FeatureStore& store,
                              const std::string& video_id,
                              const SegmentGrid& grid);

// Row indices pooled into segment i by SegmentFeatures.
std::vector<std::size_t> SegmentRows(const SegmentGrid& grid, std::size_t i,
                                     std::size_t n_rows);

}  // namespace clipedit

#endif  // CLIPEDIT_CORPUS_H_
