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

#ifndef CLIPEDIT_EDITOR_H_
#define CLIPEDIT_EDITOR_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/encoder.h"
#include "clipedit/timeline.h"

namespace clipedit {

struct EditConfig {
  std::size_t k = 10;
  double seg_len_s = 1.0;
  // Minimum IoU between the initial and the edited clip for an edit to be
  // kept; 0 keeps every edit.
  double iou_gate = 0.0;

  void Validate() const;
};

using SegmentPair = std::pair<std::size_t, std::size_t>;

struct EditResult {
  std::string caption_id;
  Interval initial;
  Interval edited;
  bool applied = false;
  std::size_t n_segments = 0;
  std::vector<std::size_t> topk_indices;
  std::optional<SegmentPair> winner_pair;
};

struct Candidate {
  SegmentPair pair;
  Interval span;
};

// Indices of the min(k, n) largest similarities, ties toward the lower index,
// returned in ascending order.
std::vector<std::size_t> TopKSegments(std::span<const double> sims,
                                      std::size_t k);

// Every pair a < b of the (ascending, distinct) indices as the span from the
// start of segment a to the end of segment b, ordered by (a, b).
std::vector<Candidate> EnumerateCandidates(std::span<const std::size_t> indices,
                                           const SegmentGrid& grid);

// Summed IoU of candidate j against every candidate, itself included.
std::vector<double> ConsensusScores(std::span<const Candidate> candidates);

// Index of the candidate with the highest consensus score; ties go to the
// longer span, then the earlier start.
std::size_t ConsensusSelect(std::span<const Candidate> candidates);

// The editing core once per-segment similarities are known. `initial` must
// span the grid.
EditResult EditFromSimilarities(const std::string& caption_id,
                                const Interval& initial,
                                const SegmentGrid& grid,
                                std::span<const double> sims,
                                const EditConfig& cfg);

// Per-segment cosine between the caption and each single segment embedded
// through the clip branch.
std::vector<double> SegmentSimilarities(const EncoderParams& teacher,
                                        const Matrix<float>& segment_features,
                                        std::span<const float> caption_feature);

EditResult EditClip(const EncoderParams& teacher, const FeatureStore& store,
                    const std::string& caption_id, const ClipEntry& initial,
                    const EditConfig& cfg);

struct EditBatch {
  ClipAssignment clips;
  std::vector<EditResult> results;  // ordered by caption_id

  std::size_t AppliedCount() const;
};

// Edits every clip of the assignment. Results do not depend on `workers`.
// Per-caption failures are collected and raised together.
EditBatch EditAll(const EncoderParams& teacher, const FeatureStore& store,
                  const ClipAssignment& clips, const EditConfig& cfg,
                  int workers = 1);

// edits.jsonl: one object per result.
void WriteEdits(const std::string& path, std::span<const EditResult> results);
std::vector<EditResult> ReadEdits(const std::string& path);

}  // namespace clipedit

#endif  // CLIPEDIT_EDITOR_H_
