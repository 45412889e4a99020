#include "mmnet/viz.hpp"

#include <algorithm>
#include <cmath>

namespace mmnet {

namespace {

void hsv_to_rgb(double h, double s, double v, double* rgb) {
  // h in [0, 1), s, v in [0, 1]
  const double hh = h * 6.0;
  const int i = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
  switch (i) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}

}  // namespace

RawFrame viz_motion_field(const MotionField& field) {
  if (field.height <= 0 || field.width <= 0) throw UsageError("viz_motion_field: zero-size field");
  double max_mag = 0.0;
  for (size_t i = 0; i < field.dy.size(); ++i)
    max_mag = std::max(max_mag, std::hypot(field.dy[i], field.dx[i]));

  RawFrame img = Tensor::map(field.height, field.width, 3);
  for (int y = 0; y < field.height; ++y)
    for (int x = 0; x < field.width; ++x) {
      const double dy = field.at_dy(y, x), dx = field.at_dx(y, x);
      const double mag = std::hypot(dy, dx);
      const double sat = max_mag > 0.0 ? mag / max_mag : 0.0;
      const double hue = (std::atan2(dy, dx) + 3.14159265358979323846) / (2 * 3.14159265358979323846);
      double rgb[3];
      hsv_to_rgb(std::min(hue, 0.999999), sat, 1.0, rgb);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = rgb[c];
    }
  return img;
}

Tensor viz_memory(const FeatureMap& cell, int out_h, int out_w) {
  const int h = cell.h(), w = cell.w(), ch = cell.c();
  Tensor heat = Tensor::map(h, w, 1);
  double lo = 1e300, hi = -1e300;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) acc += std::abs(cell.at(y, x, c));
      acc /= ch;
      heat.at(y, x, 0) = acc;
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
  const double span = hi - lo;
  for (int64_t i = 0; i < heat.size(); ++i) heat[i] = span > 0.0 ? (heat[i] - lo) / span : 0.0;

  Tensor out = Tensor::map(out_h, out_w, 1);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      out.at(y, x, 0) = heat.at(std::min(y * h / out_h, h - 1), std::min(x * w / out_w, w - 1), 0);
  return out;
}

}  // namespace mmnet
