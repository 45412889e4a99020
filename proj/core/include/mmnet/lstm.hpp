#pragma once

#include <utility>
#include <vector>

#include "mmnet/pyramid.hpp"

namespace mmnet {

// Carried memory of the motion-aided LSTM.
struct MemoryState {
  FeatureMap cell;
  FeatureMap hidden;
};

// Gate convolutions are 3x3 over the concatenated (warped hidden, rescaled
// residual) channels; the residual embed is a linear 1x1 conv from the 3
// image channels.
struct CellParams {
  ConvParams residual_embed;  // 3 -> residual_channels
  ConvParams gate_g, gate_i, gate_c, gate_o;
};

CellParams make_cell(int state_channels, int residual_channels, Rng& rng);

struct CellVars {
  ConvVars residual_embed, gate_g, gate_i, gate_c, gate_o;
};
CellVars register_cell(Tape& tape, const CellParams& p, bool requires_grad);

struct StateVars {
  Var cell, hidden;
};

// One recurrence step:
//   c_w = warp(cell), h_w = warp(hidden)
//   x = concat(h_w, conv(residual))
//   g = sigmoid(Wg x), i = sigmoid(Wi x), c_hat = relu(Wc x)
//   c' = g * c_w + i * c_hat
//   o = sigmoid(Wo x), h' = o * relu(c')
// The step output fed to the detection head is c'.
StateVars step_t(Tape& tape, const StateVars& state, const MotionField& motion, Var residual,
                 const CellVars& cv);

MemoryState init_state(const FeatureMap& f_atten);

struct StepResult {
  MemoryState state;
  FeatureMap output;
};
StepResult step(const MemoryState& state, const MotionField& motion, const ResidualGrid& residual,
                const CellParams& params);

// Repeated step over one GOP's P-frame inputs; returns [c_1 .. c_n].
std::vector<FeatureMap> propagate_sequence(
    const FeatureMap& init, const std::vector<std::pair<MotionField, ResidualGrid>>& inputs,
    const CellParams& params);

}  // namespace mmnet
