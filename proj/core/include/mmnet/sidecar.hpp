#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmnet/codec.hpp"

namespace mmnet {

// Sidecar format (little-endian): magic "MMGP", version u32, gop count u32;
// per GOP: height u32, width u32, n u32, I-frame as 3 f32 planes; per
// P-frame: block size u16, grid rows u32, grid cols u32, per-block motion
// (dy f32, dx f32), residual as 3 f32 planes.  Fractional motion values are
// accepted on import even though the internal encoder emits integers.
void export_sidecar(std::ostream& os, const std::vector<Gop>& gops);
std::vector<Gop> import_sidecar(std::istream& is);

void save_gops(const std::string& path, const std::vector<Gop>& gops);
std::vector<Gop> load_gops(const std::string& path);

}  // namespace mmnet
