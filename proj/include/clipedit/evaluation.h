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

#ifndef CLIPEDIT_EVALUATION_H_
#define CLIPEDIT_EVALUATION_H_

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/encoder.h"
#include "clipedit/timeline.h"

namespace clipedit {

struct RetrievalMetrics {
  std::map<std::size_t, double> recall_at;  // K -> fraction, K in {1, 5, 10}
  double median_rank = 0.0;
  std::size_t n_queries = 0;
  std::string gallery_mode;  // "ground_truth" or "initial"

  double r1() const { return recall_at.at(1); }
};

// 1-based position of true_index when the row is sorted by similarity
// descending, then gallery index ascending.
std::size_t RankOf(std::span<const double> sim_row, std::size_t true_index);

double RecallAtK(std::span<const std::size_t> ranks, std::size_t k);

// Middle value, or the mean of the two middle values for even counts.
double MedianRank(std::span<const std::size_t> ranks);

// Caption-to-clip ranks of `queries` against the whole gallery. Each query's
// true clip is the gallery entry with the same caption id.
std::vector<std::size_t> RetrievalRanks(const EncoderParams& p,
                                        const FeatureStore& store,
                                        std::span<const std::string> queries,
                                        const ClipAssignment& gallery,
                                        double seg_len_s, int workers = 1);

RetrievalMetrics EvaluateRetrieval(const EncoderParams& p,
                                   const FeatureStore& store,
                                   std::span<const std::string> queries,
                                   const ClipAssignment& gallery,
                                   double seg_len_s, int workers = 1);

struct IouHistogram {
  std::array<double, 11> bin_edges{};
  std::array<std::size_t, 10> counts{};
  double mean_iou = 0.0;
};

// Ten equal bins over [0, 1]; an IoU of exactly 1 lands in the last bin.
IouHistogram MakeIouHistogram(
    std::span<const std::pair<Interval, Interval>> pairs);

// metrics.json: {r1, r5, r10, medr, n_queries, gallery_mode}.
void WriteMetrics(const std::string& path, const RetrievalMetrics& metrics);
RetrievalMetrics ReadMetrics(const std::string& path);

// iou_hist.csv: "bin_lo,bin_hi,count" rows, then "mean,,<mean_iou>".
void WriteIouHistogram(const std::string& path, const IouHistogram& hist);
IouHistogram ReadIouHistogram(const std::string& path);

}  // namespace clipedit

#endif  // CLIPEDIT_EVALUATION_H_
