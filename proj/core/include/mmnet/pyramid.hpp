#pragma once

#include <vector>

#include "mmnet/autodiff.hpp"
#include "mmnet/ops.hpp"

namespace mmnet {

// Multi-stage extractor output, finest level first; strides double per level.
struct PyramidFeatures {
  std::vector<FeatureMap> levels;
  int count() const { return static_cast<int>(levels.size()); }
  const FeatureMap& top() const { return levels.back(); }
};

// Per-level embedding convs plus the position-shared scoring MLP.
struct AttentionParams {
  std::vector<ConvParams> embeds;  // embeds[l] has stride 2^(L-1-l)
  MlpParams mlp;                   // L -> hidden -> L
};

AttentionParams make_attention(const std::vector<int>& level_channels, int out_channels,
                               int mlp_hidden, Rng& rng);

// Registered-on-tape views of the parameters.
struct ConvVars {
  Var kernel, bias;
  int stride = 1, padding = 0;
};
struct MlpVars {
  struct Layer {
    Var weights, bias;
    Activation act;
  };
  std::vector<Layer> layers;
};
struct AttentionVars {
  std::vector<ConvVars> embeds;
  MlpVars mlp;
};

ConvVars register_conv(Tape& tape, const ConvParams& p, bool requires_grad);
Var apply_conv(Tape& tape, Var x, const ConvVars& cv);
MlpVars register_mlp(Tape& tape, const MlpParams& p, bool requires_grad);
Var apply_mlp_map(Tape& tape, Var x, const MlpVars& mv);
AttentionVars register_attention(Tape& tape, const AttentionParams& p, bool requires_grad);

struct AttentionOut {
  Var fused;
  Var alpha;  // (h, w, L), rows softmax-normalized per position
};

// Graph builders.
Var embed_level_t(Tape& tape, Var level, const ConvVars& embed);
AttentionOut attention_fuse_t(Tape& tape, const std::vector<Var>& embedded, const MlpVars& mlp);

// Pure wrappers over the same graph.
FeatureMap embed_level(const FeatureMap& level, const ConvParams& embed, int target_h, int target_w,
                       int target_c);
FeatureMap scale_descriptor(const FeatureMap& embedded);  // channel sum, (h, w, 1)
struct AttentionResult {
  FeatureMap fused;
  FeatureMap alpha;
};
AttentionResult attention_fuse(const std::vector<FeatureMap>& embedded, const MlpParams& mlp);

}  // namespace mmnet
