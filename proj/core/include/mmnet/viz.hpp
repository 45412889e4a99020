#pragma once

#include "mmnet/motion_warp.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

// Color-wheel rendering of a motion field: hue from atan2(dy, dx),
// saturation proportional to magnitude over the field max, white at zero
// motion.
RawFrame viz_motion_field(const MotionField& field);

// Channel-mean |cell| heatmap, min-max normalized to grayscale and upscaled
// to (out_h, out_w) by nearest neighbor.  Returns an (out_h, out_w, 1) map.
Tensor viz_memory(const FeatureMap& cell, int out_h, int out_w);

}  // namespace mmnet
