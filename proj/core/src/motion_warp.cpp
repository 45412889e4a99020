#include "mmnet/motion_warp.hpp"

#include <cmath>
#include <string>

namespace mmnet {

MotionField mv_to_feature_grid(const MotionGrid& motions, int frame_h, int frame_w, int feat_h,
                               int feat_w) {
  if (feat_h <= 0 || feat_w <= 0) throw ConfigError("mv_to_feature_grid: empty feature grid");
  if (frame_h % feat_h != 0 || frame_w % feat_w != 0)
    throw ConfigError("mv_to_feature_grid: non-integer stride (" + std::to_string(frame_h) + "x" +
                      std::to_string(frame_w) + " onto " + std::to_string(feat_h) + "x" +
                      std::to_string(feat_w) + ")");
  const int sy = frame_h / feat_h;
  const int sx = frame_w / feat_w;
  const int bs = motions.block_size;

  MotionField field = MotionField::zero(feat_h, feat_w);
  for (int fy = 0; fy < feat_h; ++fy) {
    for (int fx = 0; fx < feat_w; ++fx) {
      double sum_dy = 0.0, sum_dx = 0.0;
      for (int py = fy * sy; py < (fy + 1) * sy; ++py) {
        const int br = std::min(py / bs, motions.rows - 1);
        for (int px = fx * sx; px < (fx + 1) * sx; ++px) {
          const int bc = std::min(px / bs, motions.cols - 1);
          const MacroblockMotion& m = motions.at(br, bc);
          sum_dy += m.dy;
          sum_dx += m.dx;
        }
      }
      const double inv = 1.0 / (static_cast<double>(sy) * sx);
      field.dy[static_cast<size_t>(fy) * feat_w + fx] = sum_dy * inv / sy;
      field.dx[static_cast<size_t>(fy) * feat_w + fx] = sum_dx * inv / sx;
    }
  }
  return field;
}

ResidualGrid residual_to_feature_grid(const FeatureMap& residual, int feat_h, int feat_w) {
  if (residual.h() % feat_h != 0 || residual.w() % feat_w != 0)
    throw ConfigError("residual_to_feature_grid: non-integer stride");
  const int sy = residual.h() / feat_h;
  const int sx = residual.w() / feat_w;
  const int ch = residual.c();
  ResidualGrid grid = Tensor::map(feat_h, feat_w, ch);
  const double inv = 1.0 / (static_cast<double>(sy) * sx);
  for (int fy = 0; fy < feat_h; ++fy)
    for (int fx = 0; fx < feat_w; ++fx) {
      double* dst = grid.data() + (static_cast<size_t>(fy) * feat_w + fx) * ch;
      for (int py = fy * sy; py < (fy + 1) * sy; ++py)
        for (int px = fx * sx; px < (fx + 1) * sx; ++px) {
          const double* src = residual.data() + (static_cast<size_t>(py) * residual.w() + px) * ch;
          for (int i = 0; i < ch; ++i) dst[i] += src[i] * inv;
        }
    }
  return grid;
}

FeatureMap bilinear_warp(const FeatureMap& feat, const MotionField& motion) {
  if (feat.h() != motion.height || feat.w() != motion.width)
    throw UsageError("bilinear_warp: feature " + feat.shape_str() + " vs motion " +
                     std::to_string(motion.height) + "x" + std::to_string(motion.width));
  const int h = feat.h(), w = feat.w(), ch = feat.c();
  FeatureMap out = Tensor::map(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sy = y + motion.at_dy(y, x);
      const double sx = x + motion.at_dx(y, x);
      const int y0 = static_cast<int>(std::floor(sy));
      const int x0 = static_cast<int>(std::floor(sx));
      const double fy = sy - y0, fx = sx - x0;
      const double wgt[4] = {(1.0 - fy) * (1.0 - fx), (1.0 - fy) * fx, fy * (1.0 - fx), fy * fx};
      const int yy[4] = {y0, y0, y0 + 1, y0 + 1};
      const int xx[4] = {x0, x0 + 1, x0, x0 + 1};
      double* dst = out.data() + (static_cast<size_t>(y) * w + x) * ch;
      for (int t = 0; t < 4; ++t) {
        if (wgt[t] == 0.0 || yy[t] < 0 || yy[t] >= h || xx[t] < 0 || xx[t] >= w) continue;
        const double* src = feat.data() + (static_cast<size_t>(yy[t]) * w + xx[t]) * ch;
        for (int i = 0; i < ch; ++i) dst[i] += wgt[t] * src[i];
      }
    }
  }
  return out;
}

FeatureMap bilinear_warp_backward(const FeatureMap& upstream, const MotionField& motion) {
  if (upstream.h() != motion.height || upstream.w() != motion.width)
    throw UsageError("bilinear_warp_backward: dim mismatch");
  const int h = upstream.h(), w = upstream.w(), ch = upstream.c();
  FeatureMap d = Tensor::map(h, w, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sy = y + motion.at_dy(y, x);
      const double sx = x + motion.at_dx(y, x);
      const int y0 = static_cast<int>(std::floor(sy));
      const int x0 = static_cast<int>(std::floor(sx));
      const double fy = sy - y0, fx = sx - x0;
      const double wgt[4] = {(1.0 - fy) * (1.0 - fx), (1.0 - fy) * fx, fy * (1.0 - fx), fy * fx};
      const int yy[4] = {y0, y0, y0 + 1, y0 + 1};
      const int xx[4] = {x0, x0 + 1, x0, x0 + 1};
      const double* up = upstream.data() + (static_cast<size_t>(y) * w + x) * ch;
      for (int t = 0; t < 4; ++t) {
        if (wgt[t] == 0.0 || yy[t] < 0 || yy[t] >= h || xx[t] < 0 || xx[t] >= w) continue;
        double* dst = d.data() + (static_cast<size_t>(yy[t]) * w + xx[t]) * ch;
        for (int i = 0; i < ch; ++i) dst[i] += wgt[t] * up[i];
      }
    }
  }
  return d;
}

}  // namespace mmnet
