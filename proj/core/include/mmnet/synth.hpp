#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mmnet/tensor.hpp"

namespace mmnet {

// Object classes rendered by the generator.
enum ObjectClass { kRectangle = 0, kEllipse = 1, kTriangle = 2 };
constexpr int kNumClasses = 3;

struct ObjectSpec {
  int cls = kRectangle;
  double box_h = 20.0, box_w = 20.0;  // pixels
  double y = 0.0, x = 0.0;            // top-left at frame 0
  double vy = 0.0, vx = 0.0;          // pixels/frame
};

struct SceneConfig {
  int height = 80;
  int width = 80;
  int frames = 24;
  int objects = 2;
  double speed_min = 0.0, speed_max = 4.0;  // pixels/frame
  double size_min = 18.0, size_max = 28.0;  // box side, pixels
  double noise_amp = 0.08;                  // texture amplitude
  // When non-empty these override the random draws above.
  std::vector<ObjectSpec> explicit_objects;
};

struct TruthBox {
  int frame = 0;
  int cls = 0;
  double y1 = 0, x1 = 0, y2 = 0, x2 = 0;  // pixels, y2 > y1, x2 > x1
};

// Ground truth with object identity: boxes[frame][obj].  The object count is
// constant over a clip and the per-frame ordering is stable, so index within
// a frame identifies the instance.
struct SyntheticSceneTruth {
  int frames = 0;
  int objects = 0;
  std::vector<std::vector<TruthBox>> boxes;
};

// Textured rectangles/ellipses/triangles moving with constant velocity over a
// static textured background, bouncing at borders.  Deterministic given seed.
std::pair<std::vector<RawFrame>, SyntheticSceneTruth> generate_synthetic_video(
    const SceneConfig& config, uint64_t seed);

}  // namespace mmnet
