#pragma once

#include <vector>

#include "mmnet/motion_warp.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

constexpr int kMacroblockSize = 16;

// P-frame payload: one motion vector per macroblock plus a full-frame signed
// residual image.  Reconstruction of the source frame is exact while the
// residual is unquantized.
struct PFrameData {
  MotionGrid motions;
  FeatureMap residual;  // (h, w, 3), values in [-1, 1]
};

// One I-frame followed by n P-frames; each P-frame references its
// reconstructed predecessor.
struct Gop {
  RawFrame iframe;
  std::vector<PFrameData> pframes;
  int length() const { return 1 + static_cast<int>(pframes.size()); }
};

struct EncodeOptions {
  int gop_len = 12;
  int search_range = 8;
  bool quantize_residual = false;  // round residuals to 1/255 steps
};

// Exhaustive integer-pel block matching on luma (channel mean), SAD
// criterion.  Ties prefer the smaller |mv| and then earlier row-major scan
// order.  The reference is always the reconstructed predecessor.
std::vector<Gop> block_match_encode(const std::vector<RawFrame>& frames, const EncodeOptions& opt);

// Frame k = motion-compensated copy of frame k-1 plus residual.  Fractional
// motion vectors (imported data) are sampled bilinearly.
std::vector<RawFrame> decode_reconstruct(const Gop& gop);

}  // namespace mmnet
