#pragma once

// Gradient-check builders shared by the unit tests and the acceptance suite.
// Every tensor a check passes through grad_check's input list gets its
// gradient verified by central differences, parameters included.

#include "mmnet/detector.hpp"
#include "mmnet/grad_check.hpp"
#include "oracles.hpp"

namespace gradsuite {

using namespace mmnet;

constexpr double kEps = 1e-5;

inline double check_conv2d(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(5, 4, 2, rng);
  ConvParams p = make_conv(3, 2, 3, 3, 1, 1, rng);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var y = t.conv2d(in[0], in[1], in[2], 1, 1);
        return t.sum(t.mul(y, y));
      },
      {x, p.kernel, p.bias}, kEps);
}

inline double check_strided_conv2d(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(6, 6, 2, rng);
  ConvParams p = make_conv(3, 2, 3, 3, 2, 1, rng);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var y = t.conv2d(in[0], in[1], in[2], 2, 1);
        return t.sum(t.mul(y, y));
      },
      {x, p.kernel, p.bias}, kEps);
}

inline double check_sigmoid(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(4, 3, 2, rng);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var s = t.sigmoid(in[0]);
        return t.sum(t.mul(s, s));
      },
      {x}, kEps);
}

inline double check_relu(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(4, 3, 2, rng);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var s = t.relu(in[0]);
        return t.sum(t.mul(s, s));
      },
      {x}, kEps);
}

inline double check_dense_softmax(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(3, 3, 4, rng);
  Tensor w1 = Tensor::matrix(5, 4), b1 = Tensor::vec(5);
  Tensor w2 = Tensor::matrix(4, 5), b2 = Tensor::vec(4);
  for (int64_t i = 0; i < w1.size(); ++i) w1[i] = rng.uniform(-0.7, 0.7);
  for (int64_t i = 0; i < w2.size(); ++i) w2[i] = rng.uniform(-0.7, 0.7);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var h = t.relu(t.dense(in[0], in[1], in[2]));
        Var logits = t.dense(h, in[3], in[4]);
        Var sm = t.softmax_channels(logits);
        return t.sum(t.mul(sm, sm));
      },
      {x, w1, b1, w2, b2}, kEps);
}

inline double check_structural_ops(uint64_t seed) {
  Rng rng(seed);
  FeatureMap x = oracle::random_map(4, 4, 4, rng);
  FeatureMap y = oracle::random_map(4, 4, 4, rng);
  MotionField motion = MotionField::zero(4, 4);
  for (size_t i = 0; i < motion.dy.size(); ++i) {
    motion.dy[i] = rng.uniform(-1.5, 1.5);
    motion.dx[i] = rng.uniform(-1.5, 1.5);
  }
  return grad_check(
      [&motion](Tape& t, const std::vector<Var>& in) {
        Var w = t.warp(t.offset(in[0], 0.25), motion);
        Var cat = t.concat_channels(w, in[1]);
        Var pooled = t.avg_pool(cat, 2);
        Var summed = t.channel_sum(pooled);
        Var scaled = t.scale(t.add(summed, summed), 0.25);
        return t.sum(t.mul(scaled, scaled));
      },
      {x, y}, kEps);
}

inline double check_weighted_sum(uint64_t seed) {
  Rng rng(seed);
  FeatureMap a = oracle::random_map(3, 3, 4, rng);
  FeatureMap b = oracle::random_map(3, 3, 4, rng);
  FeatureMap logits = oracle::random_map(3, 3, 2, rng);
  return grad_check(
      [](Tape& t, const std::vector<Var>& in) {
        Var alpha = t.softmax_channels(in[2]);
        Var fused = t.weighted_sum_levels({in[0], in[1]}, alpha);
        return t.sum(t.mul(fused, fused));
      },
      {a, b, logits}, kEps);
}

inline double check_detection_loss(uint64_t seed) {
  Rng rng(seed);
  std::vector<TruthBox> truth{{0, 2, 4.0, 6.0, 40.0, 30.0}, {0, 0, 30.0, 33.0, 60.0, 62.0}};
  CellTargets targets = make_targets(truth, 4, 4, 16, 3);
  FeatureMap head_map = oracle::random_map(4, 4, 8, rng);
  return grad_check(
      [&targets](Tape& t, const std::vector<Var>& in) {
        return detection_loss_t(t, in[0], targets, 2.0);
      },
      {head_map}, kEps);
}

inline double check_lstm_step(uint64_t seed) {
  Rng rng(seed);
  CellParams p = make_cell(4, 2, rng);
  FeatureMap cell = oracle::random_map(6, 6, 4, rng);
  FeatureMap hidden = oracle::random_map(6, 6, 4, rng);
  ResidualGrid res = oracle::random_map(6, 6, 3, rng);
  MotionField m = MotionField::zero(6, 6);
  for (size_t i = 0; i < m.dy.size(); ++i) {
    m.dy[i] = rng.uniform(-1.5, 1.5);
    m.dx[i] = rng.uniform(-1.5, 1.5);
  }
  return grad_check(
      [&](Tape& t, const std::vector<Var>& in) {
        CellVars cv;
        cv.residual_embed = {in[3], in[4], 1, 0};
        cv.gate_g = {in[5], in[6], 1, 1};
        cv.gate_i = {in[7], in[8], 1, 1};
        cv.gate_c = {in[9], in[10], 1, 1};
        cv.gate_o = {in[11], in[12], 1, 1};
        StateVars s{in[0], in[1]};
        StateVars next = step_t(t, s, m, in[2], cv);
        next = step_t(t, next, m, in[2], cv);
        Var mix = t.add(next.cell, next.hidden);
        return t.sum(t.mul(mix, mix));
      },
      {cell, hidden, res, p.residual_embed.kernel, p.residual_embed.bias, p.gate_g.kernel,
       p.gate_g.bias, p.gate_i.kernel, p.gate_i.bias, p.gate_c.kernel, p.gate_c.bias,
       p.gate_o.kernel, p.gate_o.bias},
      kEps);
}

// Attention fuse -> one lstm step -> detection head -> loss, with every
// parameter tensor in the finite-difference sweep.
inline double check_composite(uint64_t seed) {
  Rng rng(seed);
  const int cl = 4;
  AttentionParams ap = make_attention({2, 3, cl}, cl, 8, rng);
  CellParams cp = make_cell(cl, 2, rng);
  ConvParams head = make_conv(8, cl, 1, 1, 1, 0, rng);
  std::vector<TruthBox> truth{{0, 1, 8.0, 8.0, 40.0, 44.0}};
  CellTargets targets = make_targets(truth, 3, 3, 16, 3);
  MotionField m = MotionField::zero(3, 3);
  for (size_t i = 0; i < m.dy.size(); ++i) {
    m.dy[i] = rng.uniform(-1.0, 1.0);
    m.dx[i] = rng.uniform(-1.0, 1.0);
  }
  FeatureMap l0 = oracle::random_map(12, 12, 2, rng);
  FeatureMap l1 = oracle::random_map(6, 6, 3, rng);
  FeatureMap l2 = oracle::random_map(3, 3, cl, rng);
  FeatureMap res = oracle::random_map(3, 3, 3, rng);

  std::vector<Tensor> inputs = {l0, l1, l2, res};
  for (const ConvParams& e : ap.embeds) {
    inputs.push_back(e.kernel);
    inputs.push_back(e.bias);
  }
  for (const DenseLayer& layer : ap.mlp.layers) {
    inputs.push_back(layer.weights);
    inputs.push_back(layer.bias);
  }
  for (const ConvParams* g : {&cp.residual_embed, &cp.gate_g, &cp.gate_i, &cp.gate_c, &cp.gate_o}) {
    inputs.push_back(g->kernel);
    inputs.push_back(g->bias);
  }
  inputs.push_back(head.kernel);
  inputs.push_back(head.bias);

  return grad_check(
      [&](Tape& t, const std::vector<Var>& in) {
        size_t i = 4;
        AttentionVars av;
        av.embeds.push_back({in[i], in[i + 1], 4, 1});
        i += 2;
        av.embeds.push_back({in[i], in[i + 1], 2, 1});
        i += 2;
        av.embeds.push_back({in[i], in[i + 1], 1, 0});
        i += 2;
        av.mlp.layers.push_back({in[i], in[i + 1], Activation::kRelu});
        i += 2;
        av.mlp.layers.push_back({in[i], in[i + 1], Activation::kIdentity});
        i += 2;
        CellVars cv;
        cv.residual_embed = {in[i], in[i + 1], 1, 0};
        i += 2;
        cv.gate_g = {in[i], in[i + 1], 1, 1};
        i += 2;
        cv.gate_i = {in[i], in[i + 1], 1, 1};
        i += 2;
        cv.gate_c = {in[i], in[i + 1], 1, 1};
        i += 2;
        cv.gate_o = {in[i], in[i + 1], 1, 1};
        i += 2;
        ConvVars hv{in[i], in[i + 1], 1, 0};

        std::vector<Var> embedded;
        for (int l = 0; l < 3; ++l) embedded.push_back(embed_level_t(t, in[static_cast<size_t>(l)], av.embeds[static_cast<size_t>(l)]));
        AttentionOut fused = attention_fuse_t(t, embedded, av.mlp);
        StateVars state{fused.fused, fused.fused};
        state = step_t(t, state, m, in[3], cv);
        Var hm = apply_conv(t, state.cell, hv);
        return detection_loss_t(t, hm, targets, 2.0);
      },
      inputs, kEps);
}

}  // namespace gradsuite
