#include "mmnet/codec.hpp"

#include <cmath>
#include <string>

namespace mmnet {

namespace {

std::vector<double> luma_plane(const RawFrame& f) {
  const int n = f.h() * f.w();
  std::vector<double> luma(static_cast<size_t>(n));
  const double* src = f.data();
  for (int i = 0; i < n; ++i)
    luma[static_cast<size_t>(i)] = (src[i * 3] + src[i * 3 + 1] + src[i * 3 + 2]) / 3.0;
  return luma;
}

double block_sad(const std::vector<double>& cur, const std::vector<double>& ref, int w, int cy,
                 int cx, int ry, int rx, double bail) {
  double sad = 0.0;
  for (int y = 0; y < kMacroblockSize; ++y) {
    const double* a = cur.data() + static_cast<size_t>(cy + y) * w + cx;
    const double* b = ref.data() + static_cast<size_t>(ry + y) * w + rx;
    for (int x = 0; x < kMacroblockSize; ++x) sad += std::abs(a[x] - b[x]);
    // Strict comparison keeps exact SADs for tie-breaking.
    if (sad > bail) return sad;
  }
  return sad;
}

// Bilinear sample with in-bounds guarantee checked by the caller.
double sample_bilinear(const RawFrame& f, double y, double x, int c) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  const int y1 = fy > 0.0 ? y0 + 1 : y0;
  const int x1 = fx > 0.0 ? x0 + 1 : x0;
  const double v00 = f.at(y0, x0, c), v01 = f.at(y0, x1, c);
  const double v10 = f.at(y1, x0, c), v11 = f.at(y1, x1, c);
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
}

RawFrame compensate(const RawFrame& ref, const MotionGrid& motions) {
  const int H = ref.h(), W = ref.w();
  const int bs = motions.block_size;
  RawFrame out = Tensor::map(H, W, 3);
  for (int br = 0; br < motions.rows; ++br) {
    for (int bc = 0; bc < motions.cols; ++bc) {
      const MacroblockMotion& m = motions.at(br, bc);
      const double sy0 = br * bs + m.dy;
      const double sx0 = bc * bs + m.dx;
      if (sy0 < 0 || sx0 < 0 || std::ceil(sy0) + bs - 1 > H - 1 || std::ceil(sx0) + bs - 1 > W - 1)
        throw DataError("decode: motion vector points outside frame at block (" +
                        std::to_string(br) + ", " + std::to_string(bc) + ")");
      const bool integral = (m.dy == std::floor(m.dy)) && (m.dx == std::floor(m.dx));
      for (int y = 0; y < bs && br * bs + y < H; ++y)
        for (int x = 0; x < bs && bc * bs + x < W; ++x) {
          const int oy = br * bs + y, ox = bc * bs + x;
          for (int c = 0; c < 3; ++c)
            out.at(oy, ox, c) = integral
                                    ? ref.at(oy + static_cast<int>(m.dy), ox + static_cast<int>(m.dx), c)
                                    : sample_bilinear(ref, oy + m.dy, ox + m.dx, c);
        }
    }
  }
  return out;
}

double quantize255(double v) { return std::round(v * 255.0) / 255.0; }

}  // namespace

std::vector<Gop> block_match_encode(const std::vector<RawFrame>& frames, const EncodeOptions& opt) {
  if (frames.empty()) throw UsageError("encode: no frames");
  if (opt.gop_len < 1) throw ConfigError("encode: gop_len must be >= 1");
  if (opt.search_range < 0) throw ConfigError("encode: search_range must be >= 0");
  const int H = frames[0].h(), W = frames[0].w();
  if (H % kMacroblockSize != 0 || W % kMacroblockSize != 0)
    throw ConfigError("encode: frame dims " + frames[0].shape_str() + " not divisible by " +
                      std::to_string(kMacroblockSize));
  const int rows = H / kMacroblockSize, cols = W / kMacroblockSize;
  const int R = opt.search_range;

  std::vector<Gop> gops;
  for (size_t start = 0; start < frames.size(); start += static_cast<size_t>(opt.gop_len)) {
    Gop gop;
    gop.iframe = frames[start];
    RawFrame recon = gop.iframe;
    std::vector<double> ref_luma = luma_plane(recon);
    const size_t end = std::min(frames.size(), start + static_cast<size_t>(opt.gop_len));
    for (size_t fi = start + 1; fi < end; ++fi) {
      const RawFrame& cur = frames[fi];
      if (cur.h() != H || cur.w() != W) throw ConfigError("encode: frame dims changed mid-clip");
      std::vector<double> cur_luma = luma_plane(cur);

      PFrameData pf;
      pf.motions.block_size = kMacroblockSize;
      pf.motions.rows = rows;
      pf.motions.cols = cols;
      pf.motions.mv.assign(static_cast<size_t>(rows) * cols, MacroblockMotion{});
      for (int br = 0; br < rows; ++br) {
        for (int bc = 0; bc < cols; ++bc) {
          const int cy = br * kMacroblockSize, cx = bc * kMacroblockSize;
          double best = 1e300;
          int best_dy = 0, best_dx = 0, best_norm = 1 << 30;
          for (int dy = -R; dy <= R; ++dy) {
            const int ry = cy + dy;
            if (ry < 0 || ry + kMacroblockSize > H) continue;
            for (int dx = -R; dx <= R; ++dx) {
              const int rx = cx + dx;
              if (rx < 0 || rx + kMacroblockSize > W) continue;
              const double sad = block_sad(cur_luma, ref_luma, W, cy, cx, ry, rx, best);
              const int norm = dy * dy + dx * dx;
              if (sad < best || (sad == best && norm < best_norm)) {
                best = sad;
                best_dy = dy;
                best_dx = dx;
                best_norm = norm;
              }
            }
          }
          pf.motions.at(br, bc) = MacroblockMotion{static_cast<double>(best_dy),
                                                   static_cast<double>(best_dx)};
        }
      }

      RawFrame predicted = compensate(recon, pf.motions);
      pf.residual = Tensor::map(H, W, 3);
      for (int64_t i = 0; i < pf.residual.size(); ++i) {
        double r = cur[i] - predicted[i];
        if (opt.quantize_residual) r = quantize255(r);
        pf.residual[i] = r;
      }

      for (int64_t i = 0; i < recon.size(); ++i) recon[i] = predicted[i] + pf.residual[i];
      ref_luma = luma_plane(recon);
      gop.pframes.push_back(std::move(pf));
    }
    gops.push_back(std::move(gop));
  }
  return gops;
}

std::vector<RawFrame> decode_reconstruct(const Gop& gop) {
  std::vector<RawFrame> out;
  out.reserve(static_cast<size_t>(gop.length()));
  out.push_back(gop.iframe);
  for (const PFrameData& pf : gop.pframes) {
    RawFrame frame = compensate(out.back(), pf.motions);
    if (!frame.same_shape(pf.residual)) throw DataError("decode: residual dims mismatch");
    for (int64_t i = 0; i < frame.size(); ++i) frame[i] += pf.residual[i];
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace mmnet
