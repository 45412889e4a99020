#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

#include "mmnet/errors.hpp"

namespace mmnet {

// Dense row-major tensor of doubles, rank 1..4.
// Rank-3 tensors are feature maps laid out (row, col, channel), channel
// fastest.  Rank-4 tensors are conv kernels laid out
// (out_ch, in_ch, ky, kx).  Rank-2 tensors are (rows, cols) matrices.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    int64_t n = 1;
    for (int d : dims_) {
      if (d <= 0) throw ConfigError("Tensor dims must be positive");
      n *= d;
    }
    v_.assign(static_cast<size_t>(n), 0.0);
  }

  static Tensor map(int h, int w, int c) { return Tensor({h, w, c}); }
  static Tensor kernel(int oc, int ic, int kh, int kw) { return Tensor({oc, ic, kh, kw}); }
  static Tensor matrix(int rows, int cols) { return Tensor({rows, cols}); }
  static Tensor vec(int n) { return Tensor({n}); }
  static Tensor scalar(double x) {
    Tensor t({1});
    t.v_[0] = x;
    return t;
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }
  int64_t size() const { return static_cast<int64_t>(v_.size()); }
  bool empty() const { return v_.empty(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](int64_t i) { return v_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return v_[static_cast<size_t>(i)]; }

  // Rank-3 feature map accessors.
  int h() const { assert(rank() == 3); return dims_[0]; }
  int w() const { assert(rank() == 3); return dims_[1]; }
  int c() const { assert(rank() == 3); return dims_[2]; }
  double& at(int y, int x, int ch) {
    assert(rank() == 3);
    return v_[(static_cast<size_t>(y) * dims_[1] + x) * dims_[2] + ch];
  }
  double at(int y, int x, int ch) const {
    assert(rank() == 3);
    return v_[(static_cast<size_t>(y) * dims_[1] + x) * dims_[2] + ch];
  }

  // Rank-4 kernel accessors.
  double& at4(int oc, int ic, int ky, int kx) {
    assert(rank() == 4);
    return v_[((static_cast<size_t>(oc) * dims_[1] + ic) * dims_[2] + ky) * dims_[3] + kx];
  }
  double at4(int oc, int ic, int ky, int kx) const {
    assert(rank() == 4);
    return v_[((static_cast<size_t>(oc) * dims_[1] + ic) * dims_[2] + ky) * dims_[3] + kx];
  }

  // Rank-2 matrix accessors.
  double& at2(int r, int c) {
    assert(rank() == 2);
    return v_[static_cast<size_t>(r) * dims_[1] + c];
  }
  double at2(int r, int c) const {
    assert(rank() == 2);
    return v_[static_cast<size_t>(r) * dims_[1] + c];
  }

  bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }
  std::string shape_str() const;
  bool all_finite() const;
  void fill(double x) { v_.assign(v_.size(), x); }

 private:
  std::vector<int> dims_;
  std::vector<double> v_;
};

// Pipeline tensors: a FeatureMap is a rank-3 Tensor (height, width, channels);
// a RawFrame is a FeatureMap holding an image with 3 channels in [0, 1].
using FeatureMap = Tensor;
using RawFrame = Tensor;

}  // namespace mmnet
