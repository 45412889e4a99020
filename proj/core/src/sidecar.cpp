#include "mmnet/sidecar.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mmnet {

static_assert(std::endian::native == std::endian::little, "sidecar io assumes little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'M', 'G', 'P'};
constexpr uint32_t kVersion = 1;

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  uint32_t u32() {
    uint32_t v = 0;
    read(&v, 4);
    return v;
  }
  uint16_t u16() {
    uint16_t v = 0;
    read(&v, 2);
    return v;
  }
  float f32() {
    float v = 0;
    read(&v, 4);
    return v;
  }
  void read(void* dst, size_t n) {
    is_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!is_) throw DataError("sidecar: truncated stream at byte " + std::to_string(offset_));
    offset_ += static_cast<int64_t>(n);
  }
  int64_t offset() const { return offset_; }

 private:
  std::istream& is_;
  int64_t offset_ = 0;
};

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u16(std::ostream& os, uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); }
void put_f32(std::ostream& os, float v) { os.write(reinterpret_cast<const char*>(&v), 4); }

void write_planes(std::ostream& os, const FeatureMap& img) {
  for (int c = 0; c < img.c(); ++c)
    for (int y = 0; y < img.h(); ++y)
      for (int x = 0; x < img.w(); ++x) put_f32(os, static_cast<float>(img.at(y, x, c)));
}

FeatureMap read_planes(Reader& r, int h, int w, int channels) {
  FeatureMap img = Tensor::map(h, w, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(y, x, c) = static_cast<double>(r.f32());
  return img;
}

}  // namespace

void export_sidecar(std::ostream& os, const std::vector<Gop>& gops) {
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(gops.size()));
  for (const Gop& gop : gops) {
    put_u32(os, static_cast<uint32_t>(gop.iframe.h()));
    put_u32(os, static_cast<uint32_t>(gop.iframe.w()));
    put_u32(os, static_cast<uint32_t>(gop.pframes.size()));
    write_planes(os, gop.iframe);
    for (const PFrameData& pf : gop.pframes) {
      put_u16(os, static_cast<uint16_t>(pf.motions.block_size));
      put_u32(os, static_cast<uint32_t>(pf.motions.rows));
      put_u32(os, static_cast<uint32_t>(pf.motions.cols));
      for (const MacroblockMotion& m : pf.motions.mv) {
        put_f32(os, static_cast<float>(m.dy));
        put_f32(os, static_cast<float>(m.dx));
      }
      write_planes(os, pf.residual);
    }
  }
  if (!os) throw DataError("sidecar: write failed");
}

std::vector<Gop> import_sidecar(std::istream& is) {
  Reader r(is);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("sidecar: bad magic at byte 0");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("sidecar: unsupported version " + std::to_string(version) + " at byte 4");
  const uint32_t count = r.u32();
  if (count > 1u << 20) throw DataError("sidecar: implausible gop count at byte 8");

  std::vector<Gop> gops;
  gops.reserve(count);
  for (uint32_t g = 0; g < count; ++g) {
    const uint32_t h = r.u32();
    const uint32_t w = r.u32();
    if (h == 0 || w == 0 || h > 1u << 14 || w > 1u << 14)
      throw DataError("sidecar: implausible frame dims at byte " + std::to_string(r.offset() - 8));
    const uint32_t n = r.u32();
    Gop gop;
    gop.iframe = read_planes(r, static_cast<int>(h), static_cast<int>(w), 3);
    for (uint32_t k = 0; k < n; ++k) {
      PFrameData pf;
      pf.motions.block_size = static_cast<int>(r.u16());
      if (pf.motions.block_size <= 0)
        throw DataError("sidecar: bad block size at byte " + std::to_string(r.offset() - 2));
      pf.motions.rows = static_cast<int>(r.u32());
      pf.motions.cols = static_cast<int>(r.u32());
      if (pf.motions.rows <= 0 || pf.motions.cols <= 0 ||
          static_cast<int64_t>(pf.motions.rows) * pf.motions.cols > (1 << 24))
        throw DataError("sidecar: implausible motion grid at byte " + std::to_string(r.offset() - 8));
      pf.motions.mv.resize(static_cast<size_t>(pf.motions.rows) * pf.motions.cols);
      for (MacroblockMotion& m : pf.motions.mv) {
        m.dy = static_cast<double>(r.f32());
        m.dx = static_cast<double>(r.f32());
      }
      pf.residual = read_planes(r, static_cast<int>(h), static_cast<int>(w), 3);
      gop.pframes.push_back(std::move(pf));
    }
    gops.push_back(std::move(gop));
  }
  return gops;
}

void save_gops(const std::string& path, const std::vector<Gop>& gops) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  export_sidecar(os, gops);
}

std::vector<Gop> load_gops(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  return import_sidecar(is);
}

}  // namespace mmnet
