#include "mmnet/lstm.hpp"

namespace mmnet {

CellParams make_cell(int state_channels, int residual_channels, Rng& rng) {
  CellParams p;
  p.residual_embed = make_conv(residual_channels, 3, 1, 1, 1, 0, rng);
  // Residuals arrive area-averaged over stride x stride pixels, which
  // shrinks their magnitude well below the feature scale; start the rescale
  // conv hot so the gates see a usable signal from step one.
  for (int64_t i = 0; i < p.residual_embed.kernel.size(); ++i) p.residual_embed.kernel[i] *= 6.0;
  const int in_c = state_channels + residual_channels;
  p.gate_g = make_conv(state_channels, in_c, 3, 3, 1, 1, rng);
  p.gate_i = make_conv(state_channels, in_c, 3, 3, 1, 1, rng);
  p.gate_c = make_conv(state_channels, in_c, 3, 3, 1, 1, rng);
  p.gate_o = make_conv(state_channels, in_c, 3, 3, 1, 1, rng);
  // Keep-gate bias starts strongly positive so copy-through survives the
  // repeated per-step multiplication across a whole GOP (sigma(5)^11 is
  // still ~0.93); the new-input gate starts low and learns how much
  // residual refresh to admit.  Gate kernels start damped for the same
  // reason.
  for (ConvParams* g : {&p.gate_g, &p.gate_i, &p.gate_c, &p.gate_o})
    for (int64_t i = 0; i < g->kernel.size(); ++i) g->kernel[i] *= 0.1;
  p.gate_g.bias.fill(5.0);
  p.gate_i.bias.fill(-2.0);
  p.gate_o.bias.fill(2.0);
  return p;
}

CellVars register_cell(Tape& tape, const CellParams& p, bool requires_grad) {
  CellVars cv;
  cv.residual_embed = register_conv(tape, p.residual_embed, requires_grad);
  cv.gate_g = register_conv(tape, p.gate_g, requires_grad);
  cv.gate_i = register_conv(tape, p.gate_i, requires_grad);
  cv.gate_c = register_conv(tape, p.gate_c, requires_grad);
  cv.gate_o = register_conv(tape, p.gate_o, requires_grad);
  return cv;
}

StateVars step_t(Tape& tape, const StateVars& state, const MotionField& motion, Var residual,
                 const CellVars& cv) {
  Var c_w = tape.warp(state.cell, motion);
  Var h_w = tape.warp(state.hidden, motion);
  Var r = apply_conv(tape, residual, cv.residual_embed);
  Var x = tape.concat_channels(h_w, r);
  Var g = tape.sigmoid(apply_conv(tape, x, cv.gate_g));
  Var i = tape.sigmoid(apply_conv(tape, x, cv.gate_i));
  Var c_hat = tape.relu(apply_conv(tape, x, cv.gate_c));
  Var c_new = tape.add(tape.mul(g, c_w), tape.mul(i, c_hat));
  Var o = tape.sigmoid(apply_conv(tape, x, cv.gate_o));
  Var h_new = tape.mul(o, tape.relu(c_new));
  return StateVars{c_new, h_new};
}

MemoryState init_state(const FeatureMap& f_atten) {
  return MemoryState{f_atten, f_atten};  // independent copies by value
}

StepResult step(const MemoryState& state, const MotionField& motion, const ResidualGrid& residual,
                const CellParams& params) {
  Tape tape;
  StateVars sv{tape.leaf(state.cell), tape.leaf(state.hidden)};
  Var r = tape.leaf(residual);
  CellVars cv = register_cell(tape, params, false);
  StateVars next = step_t(tape, sv, motion, r, cv);
  MemoryState out{tape.value(next.cell), tape.value(next.hidden)};
  FeatureMap output = out.cell;
  return StepResult{std::move(out), std::move(output)};
}

std::vector<FeatureMap> propagate_sequence(
    const FeatureMap& init, const std::vector<std::pair<MotionField, ResidualGrid>>& inputs,
    const CellParams& params) {
  std::vector<FeatureMap> outputs;
  outputs.reserve(inputs.size());
  MemoryState state = init_state(init);
  for (const auto& [motion, residual] : inputs) {
    StepResult r = step(state, motion, residual, params);
    state = std::move(r.state);
    outputs.push_back(std::move(r.output));
  }
  return outputs;
}

}  // namespace mmnet
