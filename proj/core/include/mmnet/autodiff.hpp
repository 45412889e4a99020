#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mmnet/motion_warp.hpp"
#include "mmnet/ops.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode gradient tape.  One training step owns one tape; replaying it
// backward accumulates gradients for every recorded leaf exactly once.
class Tape {
 public:
  Var leaf(Tensor value, bool requires_grad = false);

  Var conv2d(Var input, Var kernel, Var bias, int stride, int padding);
  Var dense(Var input, Var weights, Var bias);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var softmax_channels(Var x);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var offset(Var a, double b);
  Var concat_channels(Var a, Var b);
  Var channel_sum(Var x);
  Var avg_pool(Var x, int k);
  Var warp(Var feat, MotionField motion);
  // out(p, ch) = sum_l alpha(p, l) * levels[l](p, ch)
  Var weighted_sum_levels(const std::vector<Var>& levels, Var alpha);
  Var sum(Var x);  // scalar

  // Escape hatch for fused ops: `back` receives the output gradient and must
  // push gradients into the inputs via accum_grad.
  Var custom(Tensor value, std::vector<Var> inputs,
             std::function<void(const Tensor& out_grad, Tape&)> back);

  void backward(Var loss);

  const Tensor& value(Var v) const;
  // Accumulated gradient; a zero tensor of matching shape if none flowed.
  Tensor grad(Var v) const;
  void accum_grad(Var v, const Tensor& g);

  int size() const { return static_cast<int>(nodes_.size()); }
  bool requires_grad(Var v) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };

  Var push(Tensor value, bool requires_grad, std::function<void(Tape&)> back);
  const Tensor* grad_ptr(int id) const;

  std::vector<Node> nodes_;

  friend struct Var;
};

}  // namespace mmnet
