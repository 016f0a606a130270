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

#ifndef CLIPEDIT_ENCODER_H_
#define CLIPEDIT_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "clipedit/corpus.h"
#include "clipedit/matrix.h"
#include "clipedit/timeline.h"

namespace clipedit {

// Two linear projection branches into a shared space plus the softmax
// temperature. Scalar is float for training and storage; double is used by
// the gradient checks.
template <typename Scalar>
struct BasicEncoderParams {
  Matrix<Scalar> w_video;  // out_dim x in_dim
  std::vector<Scalar> b_video;
  Matrix<Scalar> w_caption;  // out_dim x in_dim
  std::vector<Scalar> b_caption;
  double temperature = 0.07;

  std::size_t in_dim() const { return w_video.cols(); }
  std::size_t out_dim() const { return w_video.rows(); }

  // Same shapes, all values zero.
  BasicEncoderParams ZerosLike() const;

  template <typename Other>
  BasicEncoderParams<Other> Cast() const;

  bool operator==(const BasicEncoderParams&) const = default;
};

using EncoderParams = BasicEncoderParams<float>;

constexpr double kDefaultTemperature = 0.07;

// Weights uniform in [-1/sqrt(in_dim), 1/sqrt(in_dim)], zero biases.
EncoderParams InitEncoderParams(std::size_t in_dim, std::size_t out_dim,
                                double temperature, std::mt19937_64& rng);

// Mean over rows, accumulated in double.
std::vector<float> MeanPool(const Matrix<float>& rows);

// normalize(W x + b). Throws a numeric error when W x + b is zero.
template <typename Scalar>
std::vector<Scalar> Project(const Matrix<Scalar>& w, std::span<const Scalar> b,
                            std::span<const float> x);

template <typename Scalar>
std::vector<Scalar> EmbedClip(const BasicEncoderParams<Scalar>& p,
                              const Matrix<float>& segment_features);

// Embeds an already mean-pooled clip feature.
template <typename Scalar>
std::vector<Scalar> EmbedPooledClip(const BasicEncoderParams<Scalar>& p,
                                    std::span<const float> pooled);

template <typename Scalar>
std::vector<Scalar> EmbedCaption(const BasicEncoderParams<Scalar>& p,
                                 std::span<const float> caption_feature);

// Cosine of two unit vectors.
template <typename Scalar>
Scalar Similarity(std::span<const Scalar> u, std::span<const Scalar> v);

template <typename Scalar>
struct LossAndGradient {
  double loss = 0.0;
  BasicEncoderParams<Scalar> grad;  // grad.temperature is unused
};

// Symmetric InfoNCE over a batch of matched (clip, caption) pairs, both
// directions averaged:
//   L = -1/(2B) sum_i [log softmax_j(S_ij / tau)_i + log softmax_j(S_ji / tau)_i]
// with S_ij the cosine of clip i and caption j. Row i of pooled_clips and of
// captions form a positive pair. Gradients are analytic.
template <typename Scalar>
LossAndGradient<Scalar> InfoNce(const BasicEncoderParams<Scalar>& p,
                                const Matrix<float>& pooled_clips,
                                const Matrix<float>& captions,
                                std::size_t batch_index = 0);

// Convenience form taking per-clip segment matrices.
template <typename Scalar>
LossAndGradient<Scalar> InfoNce(const BasicEncoderParams<Scalar>& p,
                                std::span<const Matrix<float>> clip_batch,
                                std::span<const std::vector<float>> cap_batch,
                                std::size_t batch_index = 0);

// The current training boundary of one caption.
struct ClipEntry {
  std::string video_id;
  Interval clip;

  bool operator==(const ClipEntry&) const = default;
};

// caption_id -> clip; std::map keeps iteration deterministic.
using ClipAssignment = std::map<std::string, ClipEntry>;

// Mean-pooled segment features of a clip on a grid of seg_len_s segments.
std::vector<float> PooledClipFeature(const FeatureStore& store,
                                     const ClipEntry& entry, double seg_len_s);

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double temperature = kDefaultTemperature;
  double seg_len_s = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Everything a training run mutates: parameters, optimizer moments and the
// shuffling generator. One writer at a time.
struct TrainState {
  EncoderParams params;
  EncoderParams first_moment;
  EncoderParams second_moment;
  std::uint64_t step = 0;
  std::mt19937_64 rng;

  TrainState(EncoderParams initial, std::uint64_t seed);
};

// Applies one optimizer step with the given gradient.
void ApplyGradient(TrainState& state, const EncoderParams& grad,
                   const TrainConfig& cfg);

// Shuffles the captions in `clips`, splits them into batches of
// cfg.batch_size (a trailing batch smaller than 2 is dropped) and takes one
// optimizer step per batch. Returns the mean batch loss, or 0 when no batch
// could be formed.
double TrainEpoch(TrainState& state, const FeatureStore& store,
                  const ClipAssignment& clips, const TrainConfig& cfg);

}  // namespace clipedit

#endif  // CLIPEDIT_ENCODER_H_
