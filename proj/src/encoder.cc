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

#include "clipedit/encoder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clipedit/error.h"

namespace clipedit {
namespace {

template <typename Scalar>
Scalar Dot(std::span<const Scalar> a, std::span<const Scalar> b) {
  Scalar acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Unnormalized projection W x + b.
template <typename Scalar>
std::vector<Scalar> Affine(const Matrix<Scalar>& w, std::span<const Scalar> b,
                           std::span<const float> x) {
  if (x.size() != w.cols()) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) +
                          " does not match encoder input dimension " +
                          std::to_string(w.cols()));
  }
  std::vector<Scalar> z(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto wr = w.row(r);
    Scalar acc = b[r];
    for (std::size_t c = 0; c < x.size(); ++c) {
      acc += wr[c] * static_cast<Scalar>(x[c]);
    }
    z[r] = acc;
  }
  return z;
}

template <typename Scalar>
Scalar Norm(std::span<const Scalar> z) {
  return std::sqrt(Dot<Scalar>(z, z));
}

// Log-sum-exp with the maximum subtracted.
template <typename Scalar>
Scalar LogSumExp(std::span<const Scalar> values) {
  const Scalar m = *std::max_element(values.begin(), values.end());
  Scalar acc = 0;
  for (Scalar v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

// Backpropagates dL/d(unit) through unit = z / |z| and z = W x + b.
template <typename Scalar>
void AccumulateBranch(std::span<const Scalar> unit, Scalar norm,
                      std::span<const Scalar> grad_unit,
                      std::span<const float> x, Matrix<Scalar>& grad_w,
                      std::vector<Scalar>& grad_b) {
  const Scalar radial = Dot(unit, grad_unit);
  for (std::size_t r = 0; r < unit.size(); ++r) {
    const Scalar dz = (grad_unit[r] - unit[r] * radial) / norm;
    grad_b[r] += dz;
    auto gw = grad_w.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) {
      gw[c] += dz * static_cast<Scalar>(x[c]);
    }
  }
}

void AdamUpdate(std::span<float> param, std::span<const float> grad,
                std::span<float> m, std::span<float> v, double lr,
                const TrainConfig& cfg, double bias1, double bias2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    const double step = lr * (mi / bias1) / (std::sqrt(vi / bias2) + cfg.epsilon);
    param[i] = static_cast<float>(param[i] - step);
  }
}

void SgdUpdate(std::span<float> param, std::span<const float> grad, double lr) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    param[i] = static_cast<float>(param[i] - lr * grad[i]);
  }
}

}  // namespace

template <typename Scalar>
BasicEncoderParams<Scalar> BasicEncoderParams<Scalar>::ZerosLike() const {
  BasicEncoderParams out;
  out.w_video = Matrix<Scalar>(w_video.rows(), w_video.cols());
  out.b_video.assign(b_video.size(), Scalar(0));
  out.w_caption = Matrix<Scalar>(w_caption.rows(), w_caption.cols());
  out.b_caption.assign(b_caption.size(), Scalar(0));
  out.temperature = temperature;
  return out;
}

template <typename Scalar>
template <typename Other>
BasicEncoderParams<Other> BasicEncoderParams<Scalar>::Cast() const {
  auto cast_matrix = [](const Matrix<Scalar>& m) {
    std::vector<Other> data(m.flat().begin(), m.flat().end());
    return Matrix<Other>(m.rows(), m.cols(), std::move(data));
  };
  BasicEncoderParams<Other> out;
  out.w_video = cast_matrix(w_video);
  out.b_video.assign(b_video.begin(), b_video.end());
  out.w_caption = cast_matrix(w_caption);
  out.b_caption.assign(b_caption.begin(), b_caption.end());
  out.temperature = temperature;
  return out;
}

EncoderParams InitEncoderParams(std::size_t in_dim, std::size_t out_dim,
                                double temperature, std::mt19937_64& rng) {
  if (in_dim == 0 || out_dim == 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be > 0");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> draw(-bound, bound);
  EncoderParams p;
  p.w_video = Matrix<float>(out_dim, in_dim);
  p.w_caption = Matrix<float>(out_dim, in_dim);
  for (float& w : p.w_video.flat()) w = static_cast<float>(draw(rng));
  for (float& w : p.w_caption.flat()) w = static_cast<float>(draw(rng));
  p.b_video.assign(out_dim, 0.0f);
  p.b_caption.assign(out_dim, 0.0f);
  p.temperature = temperature;
  return p;
}

std::vector<float> MeanPool(const Matrix<float>& rows) {
  if (rows.rows() == 0) throw ValidationError("cannot pool an empty clip");
  std::vector<double> acc(rows.cols(), 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += row[c];
  }
  std::vector<float> out(acc.size());
  const double inv = 1.0 / static_cast<double>(rows.rows());
  for (std::size_t c = 0; c < acc.size(); ++c) {
    out[c] = static_cast<float>(acc[c] * inv);
  }
  return out;
}

template <typename Scalar>
std::vector<Scalar> Project(const Matrix<Scalar>& w, std::span<const Scalar> b,
                            std::span<const float> x) {
  std::vector<Scalar> z = Affine(w, b, x);
  const Scalar norm = Norm<Scalar>(z);
  if (!(norm > 0) || !std::isfinite(norm)) {
    throw NumericError("degenerate embedding");
  }
  for (Scalar& v : z) v /= norm;
  return z;
}

template <typename Scalar>
std::vector<Scalar> EmbedPooledClip(const BasicEncoderParams<Scalar>& p,
                                    std::span<const float> pooled) {
  return Project<Scalar>(p.w_video, p.b_video, pooled);
}

template <typename Scalar>
std::vector<Scalar> EmbedClip(const BasicEncoderParams<Scalar>& p,
                              const Matrix<float>& segment_features) {
  const std::vector<float> pooled = MeanPool(segment_features);
  return EmbedPooledClip(p, pooled);
}

template <typename Scalar>
std::vector<Scalar> EmbedCaption(const BasicEncoderParams<Scalar>& p,
                                 std::span<const float> caption_feature) {
  return Project<Scalar>(p.w_caption, p.b_caption, caption_feature);
}

template <typename Scalar>
Scalar Similarity(std::span<const Scalar> u, std::span<const Scalar> v) {
  return Dot(u, v);
}

template <typename Scalar>
LossAndGradient<Scalar> InfoNce(const BasicEncoderParams<Scalar>& p,
                                const Matrix<float>& pooled_clips,
                                const Matrix<float>& captions,
                                std::size_t batch_index) {
  const std::size_t batch = pooled_clips.rows();
  if (batch == 0 || captions.rows() != batch) {
    throw ValidationError("InfoNCE needs equal, non-empty clip and caption "
                          "batches");
  }
  const Scalar inv_tau = Scalar(1) / static_cast<Scalar>(p.temperature);

  std::vector<std::vector<Scalar>> clip_z(batch), cap_z(batch);
  std::vector<std::vector<Scalar>> clip_u(batch), cap_u(batch);
  std::vector<Scalar> clip_norm(batch), cap_norm(batch);
  auto embed = [&](const Matrix<Scalar>& w, const std::vector<Scalar>& b,
                   std::span<const float> x, std::vector<Scalar>& z,
                   std::vector<Scalar>& u, Scalar& norm) {
    z = Affine<Scalar>(w, b, x);
    norm = Norm<Scalar>(z);
    if (!(norm > 0) || !std::isfinite(norm)) {
      throw NumericError("degenerate embedding in batch " +
                         std::to_string(batch_index));
    }
    u = z;
    for (Scalar& v : u) v /= norm;
  };
  for (std::size_t i = 0; i < batch; ++i) {
    embed(p.w_video, p.b_video, pooled_clips.row(i), clip_z[i], clip_u[i],
          clip_norm[i]);
    embed(p.w_caption, p.b_caption, captions.row(i), cap_z[i], cap_u[i],
          cap_norm[i]);
  }

  // logits(i, j) = S_ij / tau for clip i and caption j.
  Matrix<Scalar> logits(batch, batch);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      logits(i, j) = Similarity<Scalar>(clip_u[i], cap_u[j]) * inv_tau;
    }
  }
  std::vector<Scalar> row_lse(batch), col_lse(batch), column(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    row_lse[i] = LogSumExp<Scalar>(logits.row(i));
  }
  for (std::size_t j = 0; j < batch; ++j) {
    for (std::size_t i = 0; i < batch; ++i) column[i] = logits(i, j);
    col_lse[j] = LogSumExp<Scalar>(column);
  }

  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    loss += static_cast<double>(row_lse[i] - logits(i, i)) +
            static_cast<double>(col_lse[i] - logits(i, i));
  }
  loss /= 2.0 * static_cast<double>(batch);
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite InfoNCE loss in batch " +
                       std::to_string(batch_index));
  }

  // dL/dS_ij = (P_ij + Q_ij - 2 [i == j]) / (2 B tau), P the row softmax and
  // Q the column softmax of the logits.
  const Scalar scale = inv_tau / static_cast<Scalar>(2 * batch);
  Matrix<Scalar> grad_s(batch, batch);
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      const Scalar row_soft = std::exp(logits(i, j) - row_lse[i]);
      const Scalar col_soft = std::exp(logits(i, j) - col_lse[j]);
      grad_s(i, j) =
          scale * (row_soft + col_soft - (i == j ? Scalar(2) : Scalar(0)));
    }
  }

  LossAndGradient<Scalar> out;
  out.loss = loss;
  out.grad = p.ZerosLike();
  const std::size_t out_dim = p.out_dim();
  std::vector<Scalar> grad_u(out_dim);
  for (std::size_t i = 0; i < batch; ++i) {
    std::fill(grad_u.begin(), grad_u.end(), Scalar(0));
    for (std::size_t j = 0; j < batch; ++j) {
      for (std::size_t k = 0; k < out_dim; ++k) {
        grad_u[k] += grad_s(i, j) * cap_u[j][k];
      }
    }
    AccumulateBranch<Scalar>(clip_u[i], clip_norm[i], grad_u,
                             pooled_clips.row(i), out.grad.w_video,
                             out.grad.b_video);
  }
  for (std::size_t j = 0; j < batch; ++j) {
    std::fill(grad_u.begin(), grad_u.end(), Scalar(0));
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t k = 0; k < out_dim; ++k) {
        grad_u[k] += grad_s(i, j) * clip_u[i][k];
      }
    }
    AccumulateBranch<Scalar>(cap_u[j], cap_norm[j], grad_u, captions.row(j),
                             out.grad.w_caption, out.grad.b_caption);
  }
  return out;
}

template <typename Scalar>
LossAndGradient<Scalar> InfoNce(const BasicEncoderParams<Scalar>& p,
                                std::span<const Matrix<float>> clip_batch,
                                std::span<const std::vector<float>> cap_batch,
                                std::size_t batch_index) {
  if (clip_batch.size() != cap_batch.size() || clip_batch.empty()) {
    throw ValidationError("InfoNCE needs equal, non-empty clip and caption "
                          "batches");
  }
  const std::size_t d = p.in_dim();
  Matrix<float> pooled(clip_batch.size(), d);
  Matrix<float> caps(cap_batch.size(), d);
  for (std::size_t i = 0; i < clip_batch.size(); ++i) {
    const std::vector<float> mean = MeanPool(clip_batch[i]);
    if (mean.size() != d || cap_batch[i].size() != d) {
      throw ValidationError("batch feature dimension mismatch");
    }
    std::copy(mean.begin(), mean.end(), pooled.row(i).begin());
    std::copy(cap_batch[i].begin(), cap_batch[i].end(), caps.row(i).begin());
  }
  return InfoNce(p, pooled, caps, batch_index);
}

std::vector<float> PooledClipFeature(const FeatureStore& store,
                                     const ClipEntry& entry,
                                     double seg_len_s) {
  return MeanPool(SegmentFeatures(store, entry.video_id,
                                  MakeSegmentGrid(entry.clip, seg_len_s)));
}

void TrainConfig::Validate() const {
  if (batch_size < 2) {
    throw ConfigError("batch_size must be >= 2 (a contrastive batch needs a "
                      "negative)");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam decay rates must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(seg_len_s > 0.0)) throw ConfigError("seg_len_s must be > 0");
}

TrainState::TrainState(EncoderParams initial, std::uint64_t seed)
    : params(std::move(initial)), rng(seed) {
  first_moment = params.ZerosLike();
  second_moment = params.ZerosLike();
}

void ApplyGradient(TrainState& state, const EncoderParams& grad,
                   const TrainConfig& cfg) {
  ++state.step;
  EncoderParams& p = state.params;
  if (cfg.optimizer == OptimizerKind::kSgd) {
    SgdUpdate(p.w_video.flat(), grad.w_video.flat(), cfg.learning_rate);
    SgdUpdate(p.b_video, grad.b_video, cfg.learning_rate);
    SgdUpdate(p.w_caption.flat(), grad.w_caption.flat(), cfg.learning_rate);
    SgdUpdate(p.b_caption, grad.b_caption, cfg.learning_rate);
    return;
  }
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  EncoderParams& m = state.first_moment;
  EncoderParams& v = state.second_moment;
  AdamUpdate(p.w_video.flat(), grad.w_video.flat(), m.w_video.flat(),
             v.w_video.flat(), cfg.learning_rate, cfg, bias1, bias2);
  AdamUpdate(p.b_video, grad.b_video, m.b_video, v.b_video, cfg.learning_rate,
             cfg, bias1, bias2);
  AdamUpdate(p.w_caption.flat(), grad.w_caption.flat(), m.w_caption.flat(),
             v.w_caption.flat(), cfg.learning_rate, cfg, bias1, bias2);
  AdamUpdate(p.b_caption, grad.b_caption, m.b_caption, v.b_caption,
             cfg.learning_rate, cfg, bias1, bias2);
}

double TrainEpoch(TrainState& state, const FeatureStore& store,
                  const ClipAssignment& clips, const TrainConfig& cfg) {
  cfg.Validate();
  std::vector<const std::string*> order;
  order.reserve(clips.size());
  for (const auto& [caption_id, entry] : clips) order.push_back(&caption_id);
  std::shuffle(order.begin(), order.end(), state.rng);

  const std::size_t d = store.dim();
  double loss_sum = 0.0;
  std::size_t n_batches = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
    const std::size_t size = std::min(cfg.batch_size, order.size() - begin);
    if (size < 2) break;
    Matrix<float> pooled(size, d);
    Matrix<float> caps(size, d);
    for (std::size_t i = 0; i < size; ++i) {
      const std::string& caption_id = *order[begin + i];
      const std::vector<float> clip =
          PooledClipFeature(store, clips.at(caption_id), cfg.seg_len_s);
      std::copy(clip.begin(), clip.end(), pooled.row(i).begin());
      const auto cap = store.caption(caption_id);
      std::copy(cap.begin(), cap.end(), caps.row(i).begin());
    }
    const LossAndGradient<float> lg =
        InfoNce(state.params, pooled, caps, n_batches);
    ApplyGradient(state, lg.grad, cfg);
    loss_sum += lg.loss;
    ++n_batches;
  }
  return n_batches == 0 ? 0.0 : loss_sum / static_cast<double>(n_batches);
}

#define CLIPEDIT_INSTANTIATE(T)                                              \
  template struct BasicEncoderParams<T>;                                     \
  template std::vector<T> Project<T>(const Matrix<T>&, std::span<const T>,   \
                                     std::span<const float>);                \
  template std::vector<T> EmbedClip<T>(const BasicEncoderParams<T>&,         \
                                       const Matrix<float>&);                \
  template std::vector<T> EmbedPooledClip<T>(const BasicEncoderParams<T>&,   \
                                             std::span<const float>);        \
  template std::vector<T> EmbedCaption<T>(const BasicEncoderParams<T>&,      \
                                          std::span<const float>);           \
  template T Similarity<T>(std::span<const T>, std::span<const T>);          \
  template LossAndGradient<T> InfoNce<T>(const BasicEncoderParams<T>&,       \
                                         const Matrix<float>&,               \
                                         const Matrix<float>&, std::size_t); \
  template LossAndGradient<T> InfoNce<T>(                                    \
      const BasicEncoderParams<T>&, std::span<const Matrix<float>>,          \
      std::span<const std::vector<float>>, std::size_t);

CLIPEDIT_INSTANTIATE(float)
CLIPEDIT_INSTANTIATE(double)
#undef CLIPEDIT_INSTANTIATE

template BasicEncoderParams<double> BasicEncoderParams<float>::Cast<double>()
    const;
template BasicEncoderParams<float> BasicEncoderParams<double>::Cast<float>()
    const;

}  // namespace clipedit
