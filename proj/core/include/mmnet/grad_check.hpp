#pragma once

#include <functional>
#include <vector>

#include "mmnet/autodiff.hpp"

namespace mmnet {

// Builds a scalar-valued graph over the given leaves (registered with
// requires_grad) and returns the loss Var.
using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central finite differences per scalar input coordinate, compared against
// tape gradients.  Returns the worst relative error over all coordinates,
// with rel = |analytic - numeric| / max(|analytic|, |numeric|, 1).
double grad_check(const GraphFn& f, const std::vector<Tensor>& inputs, double epsilon);

}  // namespace mmnet
