// SPDX-License-Identifier: Apache-2.0
//
// Early-fusion state encoder.
//
//   visual branch  features: linear(in->64) / relu / linear(64->d_visual)
//                  images:   conv(3->8, 3x3) / relu / meanpool 2x2 /
//                            conv(8->16, 3x3) / relu / flatten / linear(->d_visual)
//   text branch    embedding(vocab->embed_dim), GRU(embed_dim->d_text) over the
//                  padded caption, final hidden state
//   fusion         [visual || text]; ablation modes zero one half
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmrl/common/rng.hpp"
#include "mmrl/nn/gru.hpp"
#include "mmrl/nn/layers.hpp"
#include "mmrl/nn/parameters.hpp"
#include "mmrl/nn/tensor.hpp"

namespace mmrl::fusion {

enum class FusionMode { kMultimodal, kVisualOnly, kTextOnly };

std::string to_string(FusionMode mode);
/// Throws ValidationError for unknown names.
FusionMode parse_fusion_mode(const std::string& name);

struct EncoderConfig {
  std::size_t d_visual = 64;
  std::size_t d_text = 64;
  std::size_t embed_dim = 32;
  std::size_t max_caption_len = 24;
  std::size_t visual_hidden = 64;
  FusionMode mode = FusionMode::kMultimodal;

  std::size_t fused_dim() const { return d_visual + d_text; }
};

/// Shape of one visual observation: a feature vector, or a planar RGB image.
struct VisualSpec {
  std::size_t feature_dim = 0;  // > 0 in feature mode
  std::size_t image_height = 0;
  std::size_t image_width = 0;

  bool is_image() const { return feature_dim == 0; }
  std::size_t flat_size() const { return is_image() ? 3 * image_height * image_width : feature_dim; }
  static VisualSpec features(std::size_t dim) { return {dim, 0, 0}; }
  static VisualSpec image(std::size_t height, std::size_t width) { return {0, height, width}; }
};

/// One observation ready for the encoder: flat visual values and the
/// fixed-length caption id sequence.
struct EncodedObservation {
  std::vector<double> visual;
  std::vector<int> caption_ids;

  bool operator==(const EncodedObservation&) const = default;
};

/// A batch of observations.
struct EncoderInput {
  nn::Tensor visual;              // [batch, F] or [batch, 3, H, W]
  std::vector<int> caption_ids;   // batch * max_caption_len, row-major
  std::size_t batch = 0;
};

struct VisualCache {
  nn::Tensor input;
  nn::Tensor hidden_pre;  // feature mode: first linear output
  nn::Tensor conv1_pre, pooled, conv2_pre;
};

struct TextCache {
  std::vector<int> caption_ids;
  std::size_t batch = 0;
  std::vector<nn::GruStepCache> steps;
};

struct EncoderCache {
  VisualCache visual;
  TextCache text;
};

/// Concatenation [visual || text] per row. visual_only zeroes the text half,
/// text_only the visual half; width is always d_visual + d_text.
nn::Tensor fuse(const nn::Tensor& visual_emb, const nn::Tensor& text_emb, FusionMode mode);

class FusionEncoder {
 public:
  FusionEncoder() = default;
  FusionEncoder(nn::ParameterSet& params, const EncoderConfig& config, const VisualSpec& visual,
                std::size_t vocab_size, Rng& rng);

  const EncoderConfig& config() const { return config_; }
  const VisualSpec& visual_spec() const { return visual_; }
  std::size_t fused_dim() const { return config_.fused_dim(); }

  EncoderInput make_batch(std::span<const EncodedObservation* const> observations) const;

  nn::Tensor visual_encode(const nn::ParameterSet& params, const nn::Tensor& visual, VisualCache* cache) const;
  void visual_backward(nn::ParameterSet& params, const VisualCache& cache, const nn::Tensor& dy) const;

  /// ids: batch * max_caption_len. Throws ValidationError for ids >= vocab size.
  nn::Tensor text_encode(const nn::ParameterSet& params, std::span<const int> ids, std::size_t batch,
                         TextCache* cache) const;
  void text_backward(nn::ParameterSet& params, const TextCache& cache, const nn::Tensor& dy) const;

  /// Fused embedding [batch, fused_dim]. The masked branch is not evaluated.
  nn::Tensor forward(const nn::ParameterSet& params, const EncoderInput& input, EncoderCache* cache) const;
  void backward(nn::ParameterSet& params, const EncoderCache& cache, const nn::Tensor& dfused) const;

 private:
  EncoderConfig config_;
  VisualSpec visual_;
  std::size_t vocab_size_ = 0;
  // feature mode
  nn::Linear visual_fc1_, visual_fc2_;
  // image mode
  nn::Conv2d conv1_, conv2_;
  nn::Linear image_fc_;
  nn::Shape conv2_out_;
  // text
  nn::Embedding embedding_;
  nn::GruCell gru_;
};

}  // namespace mmrl::fusion
