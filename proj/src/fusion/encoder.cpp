// SPDX-License-Identifier: Apache-2.0
#include "mmrl/fusion/encoder.hpp"

#include "mmrl/common/errors.hpp"

namespace mmrl::fusion {

using nn::Tensor;

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kMultimodal:
      return "multimodal";
    case FusionMode::kVisualOnly:
      return "visual_only";
    case FusionMode::kTextOnly:
      return "text_only";
  }
  return "unknown";
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "multimodal") return FusionMode::kMultimodal;
  if (name == "visual_only") return FusionMode::kVisualOnly;
  if (name == "text_only") return FusionMode::kTextOnly;
  throw ValidationError("unknown fusion mode \"" + name + "\" (expected multimodal, visual_only or text_only)");
}

Tensor fuse(const Tensor& visual_emb, const Tensor& text_emb, FusionMode mode) {
  if (visual_emb.rank() != 2 || text_emb.rank() != 2 || visual_emb.dim(0) != text_emb.dim(0)) {
    throw ValidationError("fuse: dimension mismatch between " + nn::shape_string(visual_emb.shape()) + " and " +
                          nn::shape_string(text_emb.shape()));
  }
  const std::size_t batch = visual_emb.dim(0), dv = visual_emb.dim(1), dt = text_emb.dim(1);
  Tensor out({batch, dv + dt});
  for (std::size_t b = 0; b < batch; ++b) {
    if (mode != FusionMode::kTextOnly) {
      for (std::size_t j = 0; j < dv; ++j) out(b, j) = visual_emb(b, j);
    }
    if (mode != FusionMode::kVisualOnly) {
      for (std::size_t j = 0; j < dt; ++j) out(b, dv + j) = text_emb(b, j);
    }
  }
  return out;
}

FusionEncoder::FusionEncoder(nn::ParameterSet& params, const EncoderConfig& config, const VisualSpec& visual,
                             std::size_t vocab_size, Rng& rng)
    : config_(config), visual_(visual), vocab_size_(vocab_size) {
  if (config.d_visual == 0 || config.d_text == 0 || config.embed_dim == 0 || config.max_caption_len == 0 ||
      config.visual_hidden == 0) {
    throw ValidationError("encoder: all dimensions must be positive");
  }
  if (vocab_size < 2) throw ValidationError("encoder: vocabulary must contain PAD and UNK");
  if (visual.is_image()) {
    if (visual.image_height < 8 || visual.image_width < 8) throw ValidationError("encoder: images must be >= 8x8");
    conv1_ = nn::Conv2d(params, "encoder.conv1", 3, 8, 3, 0, rng);
    conv2_ = nn::Conv2d(params, "encoder.conv2", 8, 16, 3, 0, rng);
    const nn::Shape c1 = conv1_.output_shape({1, 3, visual.image_height, visual.image_width});
    conv2_out_ = conv2_.output_shape({1, 8, c1[2] / 2, c1[3] / 2});
    image_fc_ = nn::Linear(params, "encoder.image_fc", nn::shape_size(conv2_out_), config.d_visual, rng);
  } else {
    visual_fc1_ = nn::Linear(params, "encoder.visual_fc1", visual.feature_dim, config.visual_hidden, rng);
    visual_fc2_ = nn::Linear(params, "encoder.visual_fc2", config.visual_hidden, config.d_visual, rng);
  }
  embedding_ = nn::Embedding(params, "encoder.embedding", vocab_size, config.embed_dim, rng);
  gru_ = nn::GruCell(params, "encoder.gru", config.embed_dim, config.d_text, rng);
}

EncoderInput FusionEncoder::make_batch(std::span<const EncodedObservation* const> observations) const {
  EncoderInput input;
  input.batch = observations.size();
  const std::size_t flat = visual_.flat_size();
  std::vector<double> visual;
  visual.reserve(input.batch * flat);
  input.caption_ids.reserve(input.batch * config_.max_caption_len);
  for (const auto* obs : observations) {
    if (obs->visual.size() != flat) {
      throw ValidationError("encoder: visual input has " + std::to_string(obs->visual.size()) + " values, expected " +
                            std::to_string(flat));
    }
    if (obs->caption_ids.size() != config_.max_caption_len) {
      throw ValidationError("encoder: caption must have exactly max_caption_len ids");
    }
    visual.insert(visual.end(), obs->visual.begin(), obs->visual.end());
    input.caption_ids.insert(input.caption_ids.end(), obs->caption_ids.begin(), obs->caption_ids.end());
  }
  nn::Shape shape = visual_.is_image() ? nn::Shape{input.batch, 3, visual_.image_height, visual_.image_width}
                                       : nn::Shape{input.batch, flat};
  input.visual = Tensor(std::move(shape), std::move(visual));
  return input;
}

Tensor FusionEncoder::visual_encode(const nn::ParameterSet& params, const Tensor& visual, VisualCache* cache) const {
  if (!visual_.is_image()) {
    Tensor hidden_pre = visual_fc1_.forward(params, visual);
    Tensor out = visual_fc2_.forward(params, nn::relu(hidden_pre));
    if (cache != nullptr) {
      cache->input = visual;
      cache->hidden_pre = std::move(hidden_pre);
    }
    return out;
  }
  Tensor conv1_pre = conv1_.forward(params, visual);
  Tensor pooled = nn::mean_pool2x2(nn::relu(conv1_pre));
  Tensor conv2_pre = conv2_.forward(params, pooled);
  const std::size_t batch = visual.dim(0);
  Tensor flat = nn::relu(conv2_pre).reshaped({batch, conv2_pre.size() / batch});
  Tensor out = image_fc_.forward(params, flat);
  if (cache != nullptr) {
    cache->input = visual;
    cache->conv1_pre = std::move(conv1_pre);
    cache->pooled = std::move(pooled);
    cache->conv2_pre = std::move(conv2_pre);
  }
  return out;
}

void FusionEncoder::visual_backward(nn::ParameterSet& params, const VisualCache& cache, const Tensor& dy) const {
  if (!visual_.is_image()) {
    const Tensor dh = visual_fc2_.backward(params, nn::relu(cache.hidden_pre), dy);
    visual_fc1_.backward(params, cache.input, nn::relu_backward(cache.hidden_pre, dh));
    return;
  }
  const std::size_t batch = cache.input.dim(0);
  const Tensor flat = nn::relu(cache.conv2_pre).reshaped({batch, cache.conv2_pre.size() / batch});
  const Tensor dflat = image_fc_.backward(params, flat, dy);
  const Tensor dconv2 = nn::relu_backward(cache.conv2_pre, dflat.reshaped(cache.conv2_pre.shape()));
  const Tensor dpooled = conv2_.backward(params, cache.pooled, dconv2);
  const Tensor drelu1 = nn::mean_pool2x2_backward(cache.conv1_pre.shape(), dpooled);
  conv1_.backward(params, cache.input, nn::relu_backward(cache.conv1_pre, drelu1));
}

Tensor FusionEncoder::text_encode(const nn::ParameterSet& params, std::span<const int> ids, std::size_t batch,
                                  TextCache* cache) const {
  const std::size_t len = config_.max_caption_len;
  if (ids.size() != batch * len) throw ValidationError("text_encode: expected batch * max_caption_len ids");
  if (cache != nullptr) {
    cache->caption_ids.assign(ids.begin(), ids.end());
    cache->batch = batch;
    cache->steps.assign(len, {});
  }
  Tensor h({batch, config_.d_text});
  std::vector<int> column(batch);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t b = 0; b < batch; ++b) column[b] = ids[b * len + t];
    const Tensor x = embedding_.forward(params, column);
    h = gru_.step(params, x, h, cache != nullptr ? &cache->steps[t] : nullptr);
  }
  return h;
}

void FusionEncoder::text_backward(nn::ParameterSet& params, const TextCache& cache, const Tensor& dy) const {
  const std::size_t len = config_.max_caption_len;
  Tensor dh = dy;
  std::vector<int> column(cache.batch);
  for (std::size_t t = len; t-- > 0;) {
    auto [dx, dh_prev] = gru_.step_backward(params, cache.steps[t], dh);
    for (std::size_t b = 0; b < cache.batch; ++b) column[b] = cache.caption_ids[b * len + t];
    embedding_.backward(params, column, dx);
    dh = std::move(dh_prev);
  }
}

Tensor FusionEncoder::forward(const nn::ParameterSet& params, const EncoderInput& input, EncoderCache* cache) const {
  const FusionMode mode = config_.mode;
  Tensor visual_emb = mode == FusionMode::kTextOnly
                          ? Tensor({input.batch, config_.d_visual})
                          : visual_encode(params, input.visual, cache != nullptr ? &cache->visual : nullptr);
  Tensor text_emb = mode == FusionMode::kVisualOnly
                        ? Tensor({input.batch, config_.d_text})
                        : text_encode(params, input.caption_ids, input.batch, cache != nullptr ? &cache->text : nullptr);
  return fuse(visual_emb, text_emb, mode);
}

void FusionEncoder::backward(nn::ParameterSet& params, const EncoderCache& cache, const Tensor& dfused) const {
  const std::size_t batch = dfused.dim(0), dv = config_.d_visual, dt = config_.d_text;
  require_shape(dfused, {batch, dv + dt}, "encoder backward");
  if (config_.mode != FusionMode::kTextOnly) {
    Tensor dvis({batch, dv});
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < dv; ++j) dvis(b, j) = dfused(b, j);
    }
    visual_backward(params, cache.visual, dvis);
  }
  if (config_.mode != FusionMode::kVisualOnly) {
    Tensor dtext({batch, dt});
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < dt; ++j) dtext(b, j) = dfused(b, dv + j);
    }
    text_backward(params, cache.text, dtext);
  }
}

}  // namespace mmrl::fusion
