#include "mmnet/grad_check.hpp"

#include <cmath>

namespace mmnet {

namespace {

double eval(const GraphFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t, false));
  Var loss = f(tape, leaves);
  return tape.value(loss)[0];
}

}  // namespace

double grad_check(const GraphFn& f, const std::vector<Tensor>& inputs, double epsilon) {
  if (epsilon < 1e-7 || epsilon > 1e-4)
    throw UsageError("grad_check: epsilon must lie in [1e-7, 1e-4]");

  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t, true));
  Var loss = f(tape, leaves);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(inputs.size());
  for (Var v : leaves) analytic.push_back(tape.grad(v));

  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (size_t t = 0; t < probe.size(); ++t) {
    for (int64_t i = 0; i < probe[t].size(); ++i) {
      const double orig = probe[t][i];
      probe[t][i] = orig + epsilon;
      const double hi = eval(f, probe);
      probe[t][i] = orig - epsilon;
      const double lo = eval(f, probe);
      probe[t][i] = orig;
      const double numeric = (hi - lo) / (2.0 * epsilon);
      const double a = analytic[t][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace mmnet
