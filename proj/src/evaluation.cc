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

#include "clipedit/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "clipedit/error.h"
#include "clipedit/parallel.h"
#include "json.hpp"

namespace clipedit {

std::size_t RankOf(std::span<const double> sim_row, std::size_t true_index) {
  if (true_index >= sim_row.size()) {
    throw ValidationError("true index outside the gallery");
  }
  const double target = sim_row[true_index];
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < sim_row.size(); ++j) {
    if (sim_row[j] > target || (sim_row[j] == target && j < true_index)) {
      ++ahead;
    }
  }
  return ahead + 1;
}

double RecallAtK(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw ValidationError("recall needs at least one rank");
  const auto hits = std::count_if(ranks.begin(), ranks.end(),
                                  [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double MedianRank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ValidationError("median rank of an empty list");
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
  return 0.5 * (static_cast<double>(sorted[n / 2 - 1]) +
                static_cast<double>(sorted[n / 2]));
}

std::vector<std::size_t> RetrievalRanks(const EncoderParams& p,
                                        const FeatureStore& store,
                                        std::span<const std::string> queries,
                                        const ClipAssignment& gallery,
                                        double seg_len_s, int workers) {
  std::vector<const ClipAssignment::value_type*> entries;
  std::map<std::string, std::size_t> position;
  for (const auto& entry : gallery) {
    position[entry.first] = entries.size();
    entries.push_back(&entry);
  }
  std::vector<std::vector<float>> clip_emb(entries.size());
  ParallelFor(entries.size(), workers, [&](std::size_t i) {
    clip_emb[i] = EmbedPooledClip(
        p, PooledClipFeature(store, entries[i]->second, seg_len_s));
  });

  std::vector<std::size_t> ranks(queries.size());
  ParallelFor(queries.size(), workers, [&](std::size_t q) {
    auto it = position.find(queries[q]);
    if (it == position.end()) {
      throw ValidationError("query " + queries[q] + " has no gallery clip");
    }
    const std::vector<float> cap = EmbedCaption(p, store.caption(queries[q]));
    std::vector<double> row(entries.size());
    for (std::size_t j = 0; j < entries.size(); ++j) {
      row[j] = Similarity<float>(clip_emb[j], cap);
    }
    ranks[q] = RankOf(row, it->second);
  });
  return ranks;
}

RetrievalMetrics EvaluateRetrieval(const EncoderParams& p,
                                   const FeatureStore& store,
                                   std::span<const std::string> queries,
                                   const ClipAssignment& gallery,
                                   double seg_len_s, int workers) {
  const std::vector<std::size_t> ranks =
      RetrievalRanks(p, store, queries, gallery, seg_len_s, workers);
  RetrievalMetrics m;
  for (std::size_t k : {1, 5, 10}) m.recall_at[k] = RecallAtK(ranks, k);
  m.median_rank = MedianRank(ranks);
  m.n_queries = ranks.size();
  return m;
}

IouHistogram MakeIouHistogram(
    std::span<const std::pair<Interval, Interval>> pairs) {
  if (pairs.empty()) throw ValidationError("IoU histogram of no pairs");
  IouHistogram h;
  for (std::size_t i = 0; i < h.bin_edges.size(); ++i) {
    h.bin_edges[i] = static_cast<double>(i) / 10.0;
  }
  double total = 0.0;
  for (const auto& [a, b] : pairs) {
    const double iou = Iou(a, b);
    const auto bin = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(iou * 10.0)), 9);
    ++h.counts[bin];
    total += iou;
  }
  h.mean_iou = total / static_cast<double>(pairs.size());
  return h;
}

void WriteMetrics(const std::string& path, const RetrievalMetrics& m) {
  nlohmann::ordered_json j;
  j["r1"] = m.recall_at.at(1);
  j["r5"] = m.recall_at.at(5);
  j["r10"] = m.recall_at.at(10);
  j["medr"] = m.median_rank;
  j["n_queries"] = m.n_queries;
  j["gallery_mode"] = m.gallery_mode;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

RetrievalMetrics ReadMetrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    RetrievalMetrics m;
    m.recall_at[1] = j.at("r1").get<double>();
    m.recall_at[5] = j.at("r5").get<double>();
    m.recall_at[10] = j.at("r10").get<double>();
    m.median_rank = j.at("medr").get<double>();
    m.n_queries = j.at("n_queries").get<std::size_t>();
    m.gallery_mode = j.at("gallery_mode").get<std::string>();
    const bool monotone = m.recall_at[1] <= m.recall_at[5] &&
                          m.recall_at[5] <= m.recall_at[10] &&
                          m.recall_at[10] <= 1.0 && m.recall_at[1] >= 0.0;
    if (!monotone || m.median_rank < 1.0 ||
        m.median_rank > static_cast<double>(m.n_queries)) {
      throw ValidationError(path + ": metrics out of range");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void WriteIouHistogram(const std::string& path, const IouHistogram& hist) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << hist.bin_edges[i] << ',' << hist.bin_edges[i + 1] << ','
        << hist.counts[i] << '\n';
  }
  out << "mean,," << std::setprecision(17) << hist.mean_iou << '\n';
}

IouHistogram ReadIouHistogram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "bin_lo,bin_hi,count") {
    throw ValidationError(path + ": bad header");
  }
  IouHistogram h;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    char c1 = 0, c2 = 0;
    double lo = 0.0, hi = 0.0;
    std::size_t count = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": truncated");
    std::istringstream row(line);
    if (!(row >> lo >> c1 >> hi >> c2 >> count) || c1 != ',' || c2 != ',') {
      throw ValidationError(path + ": malformed row '" + line + "'");
    }
    h.bin_edges[i] = lo;
    h.bin_edges[i + 1] = hi;
    h.counts[i] = count;
  }
  if (!std::getline(in, line) || line.rfind("mean,,", 0) != 0) {
    throw ValidationError(path + ": missing mean row");
  }
  h.mean_iou = std::stod(line.substr(6));
  if (!(h.mean_iou >= 0.0 && h.mean_iou <= 1.0)) {
    throw ValidationError(path + ": mean IoU out of range");
  }
  return h;
}

}  // namespace clipedit
