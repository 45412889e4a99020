#include "mmnet/pyramid.hpp"

#include <cmath>
#include <string>

namespace mmnet {

AttentionParams make_attention(const std::vector<int>& level_channels, int out_channels,
                               int mlp_hidden, Rng& rng) {
  AttentionParams p;
  const int levels = static_cast<int>(level_channels.size());
  for (int l = 0; l < levels; ++l) {
    const int stride = 1 << (levels - 1 - l);
    if (stride == 1) {
      p.embeds.push_back(make_conv(out_channels, level_channels[static_cast<size_t>(l)], 1, 1, 1, 0, rng));
    } else {
      p.embeds.push_back(make_conv(out_channels, level_channels[static_cast<size_t>(l)], 3, 3, stride, 1, rng));
    }
  }
  // Warm start: the top level passes through as identity where channel
  // counts allow, so the fused output begins close to the features the
  // detection head is trained on; the finer embeds start damped.
  {
    ConvParams& top = p.embeds.back();
    top.kernel.fill(0.0);
    const int diag = std::min(out_channels, level_channels.back());
    for (int c = 0; c < diag; ++c) top.kernel.at4(c, c, 0, 0) = 1.0;
    for (int l = 0; l + 1 < levels; ++l)
      for (int64_t i = 0; i < p.embeds[static_cast<size_t>(l)].kernel.size(); ++i)
        p.embeds[static_cast<size_t>(l)].kernel[i] *= 0.1;
  }
  auto dense_layer = [&rng](int out, int in, Activation act) {
    DenseLayer layer;
    layer.weights = Tensor::matrix(out, in);
    layer.bias = Tensor::vec(out);
    layer.act = act;
    const double s = std::sqrt(6.0 / in);
    for (int64_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = rng.uniform(-s, s);
    return layer;
  };
  p.mlp.layers.push_back(dense_layer(mlp_hidden, levels, Activation::kRelu));
  p.mlp.layers.push_back(dense_layer(levels, mlp_hidden, Activation::kIdentity));
  // Bias the initial attention toward the top level for the same reason.
  p.mlp.layers.back().bias[levels - 1] = 3.0;
  return p;
}

ConvVars register_conv(Tape& tape, const ConvParams& p, bool requires_grad) {
  ConvVars cv;
  cv.kernel = tape.leaf(p.kernel, requires_grad);
  cv.bias = tape.leaf(p.bias, requires_grad);
  cv.stride = p.stride;
  cv.padding = p.padding;
  return cv;
}

Var apply_conv(Tape& tape, Var x, const ConvVars& cv) {
  return tape.conv2d(x, cv.kernel, cv.bias, cv.stride, cv.padding);
}

MlpVars register_mlp(Tape& tape, const MlpParams& p, bool requires_grad) {
  MlpVars mv;
  for (const DenseLayer& layer : p.layers)
    mv.layers.push_back({tape.leaf(layer.weights, requires_grad),
                         tape.leaf(layer.bias, requires_grad), layer.act});
  return mv;
}

Var apply_mlp_map(Tape& tape, Var x, const MlpVars& mv) {
  Var cur = x;
  for (const MlpVars::Layer& layer : mv.layers) {
    cur = tape.dense(cur, layer.weights, layer.bias);
    switch (layer.act) {
      case Activation::kIdentity: break;
      case Activation::kRelu: cur = tape.relu(cur); break;
      case Activation::kSigmoid: cur = tape.sigmoid(cur); break;
    }
  }
  return cur;
}

AttentionVars register_attention(Tape& tape, const AttentionParams& p, bool requires_grad) {
  AttentionVars av;
  for (const ConvParams& e : p.embeds) av.embeds.push_back(register_conv(tape, e, requires_grad));
  av.mlp = register_mlp(tape, p.mlp, requires_grad);
  return av;
}

Var embed_level_t(Tape& tape, Var level, const ConvVars& embed) {
  return apply_conv(tape, level, embed);
}

AttentionOut attention_fuse_t(Tape& tape, const std::vector<Var>& embedded, const MlpVars& mlp) {
  if (embedded.empty()) throw UsageError("attention_fuse: no levels");
  const int mlp_in = tape.value(mlp.layers.front().weights).dim(1);
  if (mlp_in != static_cast<int>(embedded.size()))
    throw ConfigError("attention_fuse: mlp input size " + std::to_string(mlp_in) +
                      " != level count " + std::to_string(embedded.size()));
  // Scale descriptors: channel sums per level, stacked along channels.
  Var descriptors = tape.channel_sum(embedded[0]);
  for (size_t l = 1; l < embedded.size(); ++l)
    descriptors = tape.concat_channels(descriptors, tape.channel_sum(embedded[l]));
  Var logits = apply_mlp_map(tape, descriptors, mlp);
  Var alpha = tape.softmax_channels(logits);
  Var fused = tape.weighted_sum_levels(embedded, alpha);
  return {fused, alpha};
}

FeatureMap embed_level(const FeatureMap& level, const ConvParams& embed, int target_h, int target_w,
                       int target_c) {
  FeatureMap out = conv2d(level, embed);
  if (out.h() != target_h || out.w() != target_w || out.c() != target_c)
    throw ConfigError("embed_level: produced " + out.shape_str() + ", target (" +
                      std::to_string(target_h) + ", " + std::to_string(target_w) + ", " +
                      std::to_string(target_c) + ")");
  return out;
}

FeatureMap scale_descriptor(const FeatureMap& embedded) { return channel_sum(embedded); }

AttentionResult attention_fuse(const std::vector<FeatureMap>& embedded, const MlpParams& mlp) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(embedded.size());
  for (const FeatureMap& e : embedded) vars.push_back(tape.leaf(e));
  MlpVars mv = register_mlp(tape, mlp, false);
  AttentionOut out = attention_fuse_t(tape, vars, mv);
  return {tape.value(out.fused), tape.value(out.alpha)};
}

}  // namespace mmnet
