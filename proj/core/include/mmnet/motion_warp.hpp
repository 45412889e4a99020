#pragma once

#include <vector>

#include "mmnet/tensor.hpp"

namespace mmnet {

// One motion vector per macroblock, backward convention: the source block in
// the reference frame sits at (current position + mv).  Units are pixels.
// Values are real so that imported quarter-pel data round-trips; the internal
// encoder only ever emits integers.
struct MacroblockMotion {
  double dy = 0.0;
  double dx = 0.0;
};

// Dense grid of block motions covering a frame.
struct MotionGrid {
  int block_size = 16;
  int rows = 0;
  int cols = 0;
  std::vector<MacroblockMotion> mv;  // row-major

  const MacroblockMotion& at(int r, int c) const { return mv[static_cast<size_t>(r) * cols + c]; }
  MacroblockMotion& at(int r, int c) { return mv[static_cast<size_t>(r) * cols + c]; }
};

// Per-feature-cell backward displacement in feature-grid units.
struct MotionField {
  int height = 0;
  int width = 0;
  std::vector<double> dy;  // row-major
  std::vector<double> dx;

  static MotionField zero(int h, int w) {
    MotionField f;
    f.height = h;
    f.width = w;
    f.dy.assign(static_cast<size_t>(h) * w, 0.0);
    f.dx.assign(static_cast<size_t>(h) * w, 0.0);
    return f;
  }
  static MotionField uniform(int h, int w, double vy, double vx) {
    MotionField f = zero(h, w);
    for (double& v : f.dy) v = vy;
    for (double& v : f.dx) v = vx;
    return f;
  }
  double at_dy(int y, int x) const { return dy[static_cast<size_t>(y) * width + x]; }
  double at_dx(int y, int x) const { return dx[static_cast<size_t>(y) * width + x]; }
};

// Residual image resized to the feature grid (area average per channel).
using ResidualGrid = FeatureMap;

// Block motions -> feature-grid displacements: per-pixel motion (constant over
// each block) is area-averaged over the pixels a feature cell covers, then
// divided by the spatial stride.
MotionField mv_to_feature_grid(const MotionGrid& motions, int frame_h, int frame_w, int feat_h,
                               int feat_w);

ResidualGrid residual_to_feature_grid(const FeatureMap& residual, int feat_h, int feat_w);

// out(p, ch) = sum_q G(q, p + m(p)) * feat(q, ch) with the separable tent
// kernel G; samples outside the grid contribute zero.  Linear in feat.
FeatureMap bilinear_warp(const FeatureMap& feat, const MotionField& motion);

// Adjoint of bilinear_warp for a fixed motion field.
FeatureMap bilinear_warp_backward(const FeatureMap& upstream, const MotionField& motion);

}  // namespace mmnet
