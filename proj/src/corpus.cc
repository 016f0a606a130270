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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "clipedit/error.h"
#include "json.hpp"

namespace clipedit {
namespace {

using nlohmann::json;

// Matches the half-row coverage rule up to representation error.
constexpr double kCoverSlack = 1e-9;

std::string LineContext(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no) + ": ";
}

CaptionAnnotation ParseAnnotation(const json& j) {
  for (const char* key : {"caption_id", "video_id", "timestamp", "split"}) {
    if (!j.contains(key)) {
      throw ValidationError("missing field '" + std::string(key) + "'");
    }
  }
  CaptionAnnotation a;
  a.caption_id = j.at("caption_id").get<std::string>();
  a.video_id = j.at("video_id").get<std::string>();
  if (!j.at("timestamp").is_number()) {
    throw ValidationError("field 'timestamp' must be a number");
  }
  a.timestamp_s = j.at("timestamp").get<double>();
  if (!std::isfinite(a.timestamp_s) || a.timestamp_s < 0.0) {
    throw ValidationError("timestamp must be finite and >= 0");
  }
  a.split = ParseSplit(j.at("split").get<std::string>());
  const bool has_start = j.contains("gt_start");
  const bool has_end = j.contains("gt_end");
  if (has_start != has_end) {
    throw ValidationError("gt_start and gt_end must appear together");
  }
  if (has_start) {
    a.gt_interval = Interval(j.at("gt_start").get<double>(),
                             j.at("gt_end").get<double>());
  }
  if (j.contains("text")) a.text = j.at("text").get<std::string>();
  if (a.caption_id.empty() || a.video_id.empty()) {
    throw ValidationError("caption_id and video_id must be non-empty");
  }
  return a;
}

std::vector<double> Normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<float> ToFloat(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

}  // namespace

std::string SplitName(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw ValidationError("split must be \"train\" or \"test\", got \"" + name +
                        "\"");
}

void FeatureStore::CheckDim(std::size_t d, const std::string& what) {
  if (d == 0) throw ValidationError(what + ": zero feature dimension");
  if (dim_ == 0) {
    dim_ = d;
  } else if (d != dim_) {
    throw ValidationError(what + ": dimension " + std::to_string(d) +
                          " differs from store dimension " +
                          std::to_string(dim_));
  }
}

void FeatureStore::AddVideo(VideoRecord video) {
  CheckDim(video.features.cols(), "video " + video.video_id);
  const auto expected_rows =
      static_cast<std::size_t>(std::ceil(video.duration_s));
  if (video.features.rows() != expected_rows || expected_rows == 0) {
    throw ValidationError("video " + video.video_id + ": expected " +
                          std::to_string(expected_rows) + " rows, got " +
                          std::to_string(video.features.rows()));
  }
  for (float v : video.features.flat()) {
    if (!std::isfinite(v)) {
      throw ValidationError("video " + video.video_id +
                            ": non-finite feature value");
    }
  }
  const std::string id = video.video_id;
  if (!videos_.emplace(id, std::move(video)).second) {
    throw ValidationError("duplicate video id " + id);
  }
}

void FeatureStore::AddCaption(const std::string& caption_id,
                              std::vector<float> feature) {
  CheckDim(feature.size(), "caption " + caption_id);
  for (float v : feature) {
    if (!std::isfinite(v)) {
      throw ValidationError("caption " + caption_id +
                            ": non-finite feature value");
    }
  }
  if (!captions_.emplace(caption_id, std::move(feature)).second) {
    throw ValidationError("duplicate caption id " + caption_id);
  }
}

const VideoRecord& FeatureStore::video(const std::string& video_id) const {
  auto it = videos_.find(video_id);
  if (it == videos_.end()) {
    throw ValidationError("unknown video id " + video_id);
  }
  return it->second;
}

std::span<const float> FeatureStore::caption(
    const std::string& caption_id) const {
  auto it = captions_.find(caption_id);
  if (it == captions_.end()) {
    throw ValidationError("unknown caption id " + caption_id);
  }
  return it->second;
}

bool FeatureStore::operator==(const FeatureStore& other) const {
  if (dim_ != other.dim_ || captions_ != other.captions_ ||
      videos_.size() != other.videos_.size()) {
    return false;
  }
  for (const auto& [id, video] : videos_) {
    auto it = other.videos_.find(id);
    if (it == other.videos_.end() ||
        it->second.duration_s != video.duration_s ||
        !(it->second.features == video.features)) {
      return false;
    }
  }
  return true;
}

std::vector<CaptionAnnotation> LoadAnnotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations " + path);
  std::vector<CaptionAnnotation> annotations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      annotations.push_back(ParseAnnotation(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(LineContext(path, line_no) + e.what());
    } catch (const Error& e) {
      throw ValidationError(LineContext(path, line_no) + e.what());
    }
  }
  std::stable_sort(annotations.begin(), annotations.end(),
                   [](const CaptionAnnotation& a, const CaptionAnnotation& b) {
                     if (a.video_id != b.video_id) return a.video_id < b.video_id;
                     return a.timestamp_s < b.timestamp_s;
                   });
  return annotations;
}

void WriteAnnotations(const std::string& path,
                      std::span<const CaptionAnnotation> annotations) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const CaptionAnnotation& a : annotations) {
    nlohmann::ordered_json j;
    j["caption_id"] = a.caption_id;
    j["video_id"] = a.video_id;
    j["timestamp"] = a.timestamp_s;
    if (a.gt_interval) {
      j["gt_start"] = a.gt_interval->start();
      j["gt_end"] = a.gt_interval->end();
    }
    j["split"] = SplitName(a.split);
    if (a.text) j["text"] = *a.text;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void ValidateAnnotations(std::span<const CaptionAnnotation> annotations,
                         const FeatureStore& store) {
  std::set<std::string> seen;
  for (const CaptionAnnotation& a : annotations) {
    if (!seen.insert(a.caption_id).second) {
      throw ValidationError("duplicate caption id " + a.caption_id);
    }
    if (!store.HasVideo(a.video_id)) {
      throw ValidationError("caption " + a.caption_id +
                            " references unknown video " + a.video_id);
    }
    if (!store.HasCaption(a.caption_id)) {
      throw ValidationError("caption " + a.caption_id +
                            " has no caption feature");
    }
    const Interval span = store.video(a.video_id).Span();
    if (!span.Contains(a.timestamp_s)) {
      throw ValidationError("caption " + a.caption_id + ": timestamp " +
                            std::to_string(a.timestamp_s) +
                            " outside video span " + span.ToString());
    }
    if (a.gt_interval && !a.gt_interval->Contains(a.timestamp_s)) {
      std::cerr << "warning: caption " << a.caption_id << " timestamp "
                << a.timestamp_s << " lies outside its ground truth "
                << *a.gt_interval << "\n";
    }
  }
}

void SynthConfig::Validate() const {
  auto fail = [this](const std::string& why) {
    std::ostringstream os;
    os << why << " (n_train_videos=" << n_train_videos
       << ", n_test_videos=" << n_test_videos
       << ", captions_per_video=" << captions_per_video
       << ", video_len_s=" << video_len_s << ", gt_len_range=[" << gt_len_min_s
       << ", " << gt_len_max_s << "], dim=" << dim << ")";
    return ConfigError(os.str());
  };
  if (n_train_videos == 0) throw fail("synth needs at least one train video");
  if (captions_per_video == 0) throw fail("captions_per_video must be >= 1");
  if (dim == 0) throw fail("dim must be >= 1");
  if (!(video_len_s > 0.0) || video_len_s != std::floor(video_len_s)) {
    throw fail("video_len_s must be a positive whole number of seconds");
  }
  if (!(gt_len_min_s > 0.0) || gt_len_min_s > gt_len_max_s) {
    throw fail("gt_len_range must satisfy 0 < min <= max");
  }
  if (!(noise_sigma >= 0.0) || !(caption_noise_sigma >= 0.0)) {
    throw fail("noise sigmas must be >= 0");
  }
  if (static_cast<double>(captions_per_video) * gt_len_max_s > video_len_s) {
    throw fail(
        "gt placement infeasible: captions_per_video * max gt length exceeds "
        "video length");
  }
}

double SampleTimestamp(const Interval& gt, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> draw(gt.start(), gt.end());
  double t = draw(rng);
  while (t <= gt.start() || t >= gt.end()) t = draw(rng);
  return t;
}

bool RowCoveredBy(std::size_t row, const Interval& span) {
  const double r = static_cast<double>(row);
  return Overlap(Interval(r, r + 1.0), span) >= 0.5 - kCoverSlack;
}

SynthCorpus GenerateSynthCorpus(const SynthConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gaussian_vector = [&] {
    std::vector<double> g(cfg.dim);
    for (double& x : g) x = gauss(rng);
    return g;
  };

  SynthCorpus corpus;
  const std::size_t n_videos = cfg.n_train_videos + cfg.n_test_videos;
  const auto n_rows = static_cast<std::size_t>(cfg.video_len_s);
  for (std::size_t v = 0; v < n_videos; ++v) {
    std::ostringstream vid;
    vid << "vid" << std::setw(5) << std::setfill('0') << v;
    const Split split = v < cfg.n_train_videos ? Split::kTrain : Split::kTest;

    // Ground-truth spans: random lengths, slack scattered between them.
    std::uniform_real_distribution<double> len_draw(cfg.gt_len_min_s,
                                                    cfg.gt_len_max_s);
    std::vector<double> lengths(cfg.captions_per_video);
    double total = 0.0;
    for (double& len : lengths) {
      len = cfg.gt_len_min_s == cfg.gt_len_max_s ? cfg.gt_len_min_s
                                                 : len_draw(rng);
      total += len;
    }
    const double slack = cfg.video_len_s - total;
    std::uniform_real_distribution<double> slack_draw(0.0, slack);
    std::vector<double> cuts(cfg.captions_per_video);
    for (double& c : cuts) c = slack > 0.0 ? slack_draw(rng) : 0.0;
    std::sort(cuts.begin(), cuts.end());

    std::vector<Interval> gts;
    std::vector<std::vector<double>> latents;
    double consumed = 0.0;
    for (std::size_t k = 0; k < cfg.captions_per_video; ++k) {
      const double start = cuts[k] + consumed;
      const double end = std::min(start + lengths[k], cfg.video_len_s);
      consumed += lengths[k];
      gts.emplace_back(start, end);
      latents.push_back(Normalized(gaussian_vector()));
    }

    VideoRecord video;
    video.video_id = vid.str();
    video.duration_s = cfg.video_len_s;
    video.features = Matrix<float>(n_rows, cfg.dim);
    for (std::size_t r = 0; r < n_rows; ++r) {
      std::vector<double> g = gaussian_vector();
      std::vector<double> row = g;
      for (std::size_t k = 0; k < gts.size(); ++k) {
        if (RowCoveredBy(r, gts[k])) {
          for (std::size_t i = 0; i < cfg.dim; ++i) {
            row[i] = latents[k][i] + cfg.noise_sigma * g[i];
          }
          break;
        }
      }
      const std::vector<float> out = ToFloat(Normalized(std::move(row)));
      std::copy(out.begin(), out.end(), video.features.row(r).begin());
    }

    for (std::size_t k = 0; k < cfg.captions_per_video; ++k) {
      CaptionAnnotation a;
      a.caption_id = video.video_id + "_c" + std::to_string(k);
      a.video_id = video.video_id;
      a.timestamp_s = SampleTimestamp(gts[k], rng);
      a.gt_interval = gts[k];
      a.split = split;
      std::vector<double> cap = gaussian_vector();
      for (std::size_t i = 0; i < cfg.dim; ++i) {
        cap[i] = latents[k][i] + cfg.caption_noise_sigma * cap[i];
      }
      corpus.store.AddCaption(a.caption_id, ToFloat(Normalized(std::move(cap))));
      corpus.annotations.push_back(std::move(a));
    }
    corpus.store.AddVideo(std::move(video));
  }
  return corpus;
}

std::vector<std::size_t> SegmentRows(const SegmentGrid& grid, std::size_t i,
                                     std::size_t n_rows) {
  const Interval seg = grid.Segment(i);
  std::vector<std::size_t> rows;
  const auto first = static_cast<std::size_t>(std::floor(seg.start()));
  const auto last = static_cast<std::size_t>(std::ceil(seg.end()));
  for (std::size_t r = first; r < last && r < n_rows; ++r) {
    if (RowCoveredBy(r, seg)) rows.push_back(r);
  }
  if (rows.empty()) {
    const auto mid = static_cast<std::size_t>(std::floor(seg.midpoint()));
    rows.push_back(std::min(mid, n_rows - 1));
  }
  return rows;
}

Matrix<float> SegmentFeatures(const FeatureStore& store,
                              const std::string& video_id,
                              const SegmentGrid& grid) {
  const VideoRecord& video = store.video(video_id);
  if (grid.origin_s < 0.0 || grid.clip_end_s > video.duration_s + 1e-9) {
    throw ValidationError("segment grid " + grid.Span().ToString() +
                          " exceeds video " + video_id + " span " +
                          video.Span().ToString());
  }
  const std::size_t d = store.dim();
  Matrix<float> out(grid.n_segments, d);
  std::vector<double> acc(d);
  for (std::size_t i = 0; i < grid.n_segments; ++i) {
    const std::vector<std::size_t> rows =
        SegmentRows(grid, i, video.features.rows());
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t r : rows) {
      const auto src = video.features.row(r);
      for (std::size_t c = 0; c < d; ++c) acc[c] += src[c];
    }
    auto dst = out.row(i);
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (std::size_t c = 0; c < d; ++c) {
      dst[c] = static_cast<float>(acc[c] * inv);
    }
  }
  return out;
}

}  // namespace clipedit
