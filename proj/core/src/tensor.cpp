#include "mmnet/tensor.hpp"

#include <cmath>
#include <cstdio>

namespace mmnet {

std::string Tensor::shape_str() const {
  std::string s = "(";
  for (size_t i = 0; i < dims_.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d", dims_[i]);
    if (i) s += ", ";
    s += buf;
  }
  s += ")";
  return s;
}

bool Tensor::all_finite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace mmnet
