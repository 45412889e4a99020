#pragma once

#include <string>

#include "mmnet/tensor.hpp"

namespace mmnet {

// Binary portable pixmap (P6) / graymap (P5), 8-bit.  Values are clamped to
// [0, 1] and quantized on write; read maps back to [0, 1].
void write_ppm(const std::string& path, const RawFrame& image);
RawFrame read_ppm(const std::string& path);
void write_pgm(const std::string& path, const Tensor& gray);  // (h, w, 1)

}  // namespace mmnet
