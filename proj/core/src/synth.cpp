#include "mmnet/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mmnet/rng.hpp"

namespace mmnet {

namespace {

// Pixels live on the dyadic k/256 grid so codec arithmetic (residual
// subtraction, motion-compensated addition) is exact in doubles and in the
// f32 sidecar payload.
double quant256(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return std::min(255.0, std::floor(v * 256.0)) / 256.0;
}

// Deterministic texture hash, independent of draw order.
double hash_noise(uint64_t seed, int64_t a, int64_t b, int64_t c) {
  uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  h ^= static_cast<uint64_t>(a) * 0xff51afd7ed558ccdull;
  h = (h ^ (h >> 33)) * 0xc4ceb9fe1a85ec53ull;
  h ^= static_cast<uint64_t>(b) * 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 29)) * 0xff51afd7ed558ccdull;
  h ^= static_cast<uint64_t>(c) * 0xc4ceb9fe1a85ec53ull;
  h ^= h >> 32;
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

struct ObjectState {
  ObjectSpec spec;
  double y, x, vy, vx;
  double base[3];
  uint64_t texture_seed;
};

// Class base colors keep classes visually separable.
constexpr double kClassColor[kNumClasses][3] = {
    {0.85, 0.25, 0.25},
    {0.25, 0.80, 0.30},
    {0.30, 0.40, 0.90},
};

bool covers(const ObjectState& o, double py, double px) {
  const double h = o.spec.box_h, w = o.spec.box_w;
  const double ly = py - o.y, lx = px - o.x;
  if (ly < 0 || lx < 0 || ly >= h || lx >= w) return false;
  switch (o.spec.cls) {
    case kRectangle:
      return true;
    case kEllipse: {
      const double cy = h / 2, cx = w / 2;
      const double dy = (ly - cy) / cy, dx = (lx - cx) / cx;
      return dy * dy + dx * dx <= 1.0;
    }
    case kTriangle: {
      // Apex top-center, base at the bottom edge.
      const double t = ly / h;  // 0 at apex row, 1 at base
      const double half = (w / 2) * t;
      return std::abs(lx - w / 2) <= half;
    }
    default:
      return false;
  }
}

}  // namespace

std::pair<std::vector<RawFrame>, SyntheticSceneTruth> generate_synthetic_video(
    const SceneConfig& config, uint64_t seed) {
  const int H = config.height, W = config.width;
  if (H <= 0 || W <= 0 || config.frames <= 0) throw ConfigError("scene: empty dims or frame count");

  Rng rng(seed);
  Rng obj_rng = rng.fork(1);

  std::vector<ObjectState> objs;
  if (!config.explicit_objects.empty()) {
    for (const ObjectSpec& s : config.explicit_objects) {
      if (s.box_h > H || s.box_w > W) throw ConfigError("scene: object larger than frame");
      ObjectState o;
      o.spec = s;
      o.y = s.y;
      o.x = s.x;
      o.vy = s.vy;
      o.vx = s.vx;
      for (int c = 0; c < 3; ++c) o.base[c] = kClassColor[s.cls % kNumClasses][c];
      o.texture_seed = seed * 1000003ull + objs.size() + 7;
      objs.push_back(o);
    }
  } else {
    if (config.size_max > std::min(H, W)) throw ConfigError("scene: object larger than frame");
    for (int i = 0; i < config.objects; ++i) {
      ObjectState o;
      o.spec.cls = obj_rng.uniform_int(0, kNumClasses - 1);
      o.spec.box_h = obj_rng.uniform(config.size_min, config.size_max);
      o.spec.box_w = obj_rng.uniform(config.size_min, config.size_max);
      o.y = obj_rng.uniform(0.0, H - o.spec.box_h);
      o.x = obj_rng.uniform(0.0, W - o.spec.box_w);
      const double speed = obj_rng.uniform(config.speed_min, config.speed_max);
      const double angle = obj_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      o.vy = speed * std::sin(angle);
      o.vx = speed * std::cos(angle);
      for (int c = 0; c < 3; ++c)
        o.base[c] = std::clamp(kClassColor[o.spec.cls][c] + obj_rng.uniform(-0.08, 0.08), 0.0, 1.0);
      o.texture_seed = seed * 1000003ull + static_cast<uint64_t>(i) + 7;
      objs.push_back(o);
    }
  }

  // Static background, computed once.
  RawFrame background = Tensor::map(H, W, 3);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c)
        background.at(y, x, c) =
            quant256(0.5 + (hash_noise(seed, y, x, c) - 0.5) * 2.0 * config.noise_amp);

  std::vector<RawFrame> frames;
  frames.reserve(static_cast<size_t>(config.frames));
  SyntheticSceneTruth truth;
  truth.frames = config.frames;
  truth.objects = static_cast<int>(objs.size());
  truth.boxes.resize(static_cast<size_t>(config.frames));

  for (int f = 0; f < config.frames; ++f) {
    RawFrame frame = background;
    for (size_t oi = 0; oi < objs.size(); ++oi) {
      const ObjectState& o = objs[oi];
      const int y_lo = std::max(0, static_cast<int>(std::floor(o.y)));
      const int y_hi = std::min(H - 1, static_cast<int>(std::ceil(o.y + o.spec.box_h)));
      const int x_lo = std::max(0, static_cast<int>(std::floor(o.x)));
      const int x_hi = std::min(W - 1, static_cast<int>(std::ceil(o.x + o.spec.box_w)));
      for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x) {
          if (!covers(o, y + 0.5, x + 0.5)) continue;
          // Texture rides in object-local coordinates so it translates
          // rigidly with the object.
          const int64_t u = static_cast<int64_t>(std::floor(y - o.y));
          const int64_t v = static_cast<int64_t>(std::floor(x - o.x));
          for (int c = 0; c < 3; ++c) {
            const double n = (hash_noise(o.texture_seed, u, v, c) - 0.5) * 2.0 * config.noise_amp;
            frame.at(y, x, c) = quant256(o.base[c] + n);
          }
        }
      TruthBox tb;
      tb.frame = f;
      tb.cls = o.spec.cls;
      tb.y1 = o.y;
      tb.x1 = o.x;
      tb.y2 = o.y + o.spec.box_h;
      tb.x2 = o.x + o.spec.box_w;
      truth.boxes[static_cast<size_t>(f)].push_back(tb);
    }
    frames.push_back(std::move(frame));

    for (ObjectState& o : objs) {
      o.y += o.vy;
      o.x += o.vx;
      if (o.y < 0) {
        o.y = -o.y;
        o.vy = -o.vy;
      }
      if (o.y + o.spec.box_h > H) {
        o.y = 2 * (H - o.spec.box_h) - o.y;
        o.vy = -o.vy;
      }
      if (o.x < 0) {
        o.x = -o.x;
        o.vx = -o.vx;
      }
      if (o.x + o.spec.box_w > W) {
        o.x = 2 * (W - o.spec.box_w) - o.x;
        o.vx = -o.vx;
      }
    }
  }
  return {std::move(frames), std::move(truth)};
}

}  // namespace mmnet
