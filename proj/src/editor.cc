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

#include "clipedit/editor.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "clipedit/error.h"
#include "clipedit/parallel.h"
#include "json.hpp"

namespace clipedit {
namespace {

// Consensus scores closer than this are treated as equal before the
// length/start tie-break.
constexpr double kScoreTieTolerance = 1e-9;

nlohmann::ordered_json IntervalJson(const Interval& interval) {
  return nlohmann::ordered_json::array({interval.start(), interval.end()});
}

Interval IntervalFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError("interval must be a [start, end] array");
  }
  return Interval(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

void EditConfig::Validate() const {
  if (k < 1) throw ConfigError("edit.k must be >= 1");
  if (!(seg_len_s > 0.0)) throw ConfigError("edit.seg_len_s must be > 0");
  if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) {
    throw ConfigError("edit.iou_gate must lie in [0, 1]");
  }
}

std::vector<std::size_t> TopKSegments(std::span<const double> sims,
                                      std::size_t k) {
  std::vector<std::size_t> order(sims.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min(k, sims.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return a < b;
                    });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Candidate> EnumerateCandidates(std::span<const std::size_t> indices,
                                           const SegmentGrid& grid) {
  std::vector<Candidate> out;
  if (indices.size() < 2) return out;
  out.reserve(indices.size() * (indices.size() - 1) / 2);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    for (std::size_t j = i + 1; j < indices.size(); ++j) {
      const std::size_t a = indices[i];
      const std::size_t b = indices[j];
      if (a >= b || b >= grid.n_segments) {
        throw ValidationError("candidate indices must be ascending, distinct "
                              "and inside the grid");
      }
      out.push_back({{a, b},
                     Interval(grid.SegmentStart(a), grid.SegmentEnd(b))});
    }
  }
  return out;
}

std::vector<double> ConsensusScores(std::span<const Candidate> candidates) {
  std::vector<double> scores(candidates.size(), 0.0);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      scores[j] += Iou(candidates[j].span, candidates[k].span);
    }
  }
  return scores;
}

std::size_t ConsensusSelect(std::span<const Candidate> candidates) {
  if (candidates.empty()) {
    throw ValidationError("consensus selection needs at least one candidate");
  }
  const std::vector<double> scores = ConsensusScores(candidates);
  std::size_t best = 0;
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    const Interval& cur = candidates[j].span;
    const Interval& top = candidates[best].span;
    if (scores[j] > scores[best] + kScoreTieTolerance) {
      best = j;
    } else if (scores[j] >= scores[best] - kScoreTieTolerance) {
      if (cur.length() > top.length() ||
          (cur.length() == top.length() && cur.start() < top.start())) {
        best = j;
      }
    }
  }
  return best;
}

EditResult EditFromSimilarities(const std::string& caption_id,
                                const Interval& initial,
                                const SegmentGrid& grid,
                                std::span<const double> sims,
                                const EditConfig& cfg) {
  if (sims.size() != grid.n_segments) {
    throw ValidationError("caption " + caption_id + ": " +
                          std::to_string(sims.size()) +
                          " similarities for a grid of " +
                          std::to_string(grid.n_segments) + " segments");
  }
  EditResult result{caption_id, initial, initial, false, grid.n_segments, {},
                    std::nullopt};
  if (grid.n_segments < 2) return result;
  result.topk_indices = TopKSegments(sims, cfg.k);
  if (result.topk_indices.size() < 2) return result;

  const std::vector<Candidate> candidates =
      EnumerateCandidates(result.topk_indices, grid);
  const Candidate& winner = candidates[ConsensusSelect(candidates)];
  result.winner_pair = winner.pair;
  if (Iou(initial, winner.span) >= cfg.iou_gate) {
    result.edited = winner.span;
    result.applied = true;
  }
  return result;
}

std::vector<double> SegmentSimilarities(const EncoderParams& teacher,
                                        const Matrix<float>& segment_features,
                                        std::span<const float> caption_feature) {
  const std::vector<float> caption = EmbedCaption(teacher, caption_feature);
  std::vector<double> sims(segment_features.rows());
  for (std::size_t i = 0; i < segment_features.rows(); ++i) {
    const std::vector<float> seg =
        EmbedPooledClip(teacher, segment_features.row(i));
    sims[i] = Similarity<float>(seg, caption);
  }
  return sims;
}

EditResult EditClip(const EncoderParams& teacher, const FeatureStore& store,
                    const std::string& caption_id, const ClipEntry& initial,
                    const EditConfig& cfg) {
  const SegmentGrid grid = MakeSegmentGrid(initial.clip, cfg.seg_len_s);
  const Matrix<float> features =
      SegmentFeatures(store, initial.video_id, grid);
  const std::vector<double> sims =
      SegmentSimilarities(teacher, features, store.caption(caption_id));
  return EditFromSimilarities(caption_id, initial.clip, grid, sims, cfg);
}

std::size_t EditBatch::AppliedCount() const {
  return static_cast<std::size_t>(std::count_if(
      results.begin(), results.end(),
      [](const EditResult& r) { return r.applied; }));
}

EditBatch EditAll(const EncoderParams& teacher, const FeatureStore& store,
                  const ClipAssignment& clips, const EditConfig& cfg,
                  int workers) {
  cfg.Validate();
  std::vector<const ClipAssignment::value_type*> entries;
  entries.reserve(clips.size());
  for (const auto& entry : clips) entries.push_back(&entry);

  std::vector<std::optional<EditResult>> results(entries.size());
  std::vector<std::string> errors(entries.size());
  std::vector<ErrorCode> codes(entries.size(), ErrorCode::kValidation);
  ParallelFor(entries.size(), workers, [&](std::size_t i) {
    const auto& [caption_id, entry] = *entries[i];
    try {
      results[i] = EditClip(teacher, store, caption_id, entry, cfg);
    } catch (const Error& e) {
      errors[i] = "caption " + caption_id + ": " + e.what();
      codes[i] = e.code();
    }
  });

  std::string message;
  std::optional<ErrorCode> first_code;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    if (!first_code) first_code = codes[i];
    message += (message.empty() ? "" : "; ") + errors[i];
  }
  if (first_code) throw Error(*first_code, "editing failed: " + message);

  EditBatch batch;
  batch.results.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    batch.clips.emplace(entries[i]->first,
                        ClipEntry{entries[i]->second.video_id,
                                  results[i]->edited});
    batch.results.push_back(std::move(*results[i]));
  }
  return batch;
}

void WriteEdits(const std::string& path, std::span<const EditResult> results) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const EditResult& r : results) {
    nlohmann::ordered_json j;
    j["caption_id"] = r.caption_id;
    j["initial"] = IntervalJson(r.initial);
    j["edited"] = IntervalJson(r.edited);
    j["applied"] = r.applied;
    j["n_segments"] = r.n_segments;
    j["topk_indices"] = r.topk_indices;
    if (r.winner_pair) {
      j["winner_pair"] = {r.winner_pair->first, r.winner_pair->second};
    } else {
      j["winner_pair"] = nullptr;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<EditResult> ReadEdits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<EditResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EditResult r{j.at("caption_id").get<std::string>(),
                   IntervalFromJson(j.at("initial")),
                   IntervalFromJson(j.at("edited")),
                   j.at("applied").get<bool>(),
                   j.at("n_segments").get<std::size_t>(),
                   j.at("topk_indices").get<std::vector<std::size_t>>(),
                   std::nullopt};
      if (!j.at("winner_pair").is_null()) {
        const auto pair = j.at("winner_pair").get<std::vector<std::size_t>>();
        if (pair.size() != 2) throw ValidationError("winner_pair needs 2 values");
        r.winner_pair = SegmentPair{pair[0], pair[1]};
      }
      if (!r.initial.Contains(r.edited)) {
        throw ValidationError("edited clip escapes its initial clip");
      }
      if (!r.applied && !(r.edited == r.initial)) {
        throw ValidationError("unapplied edit changed the clip");
      }
      results.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const Error& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return results;
}

}  // namespace clipedit
