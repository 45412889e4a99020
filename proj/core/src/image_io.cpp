#include "mmnet/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace mmnet {

namespace {

// Pixel bytes map to the dyadic grid value k/256; flooring is the exact
// inverse for values already on the grid.
uint8_t to_byte(double v) {
  const double k = std::floor(std::clamp(v, 0.0, 1.0) * 256.0);
  return static_cast<uint8_t>(std::min(k, 255.0));
}

int read_pnm_int(std::istream& is, const std::string& path) {
  // Skips whitespace and '#' comments.
  while (true) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int v = -1;
  is >> v;
  if (!is || v < 0) throw DataError("ppm " + path + ": malformed header");
  return v;
}

}  // namespace

void write_ppm(const std::string& path, const RawFrame& image) {
  if (image.rank() != 3 || image.c() != 3) throw UsageError("write_ppm: need (h, w, 3) image");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  os << "P6\n" << image.w() << " " << image.h() << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(image.w()) * 3);
  for (int y = 0; y < image.h(); ++y) {
    for (int x = 0; x < image.w(); ++x)
      for (int c = 0; c < 3; ++c) row[static_cast<size_t>(x) * 3 + c] = to_byte(image.at(y, x, c));
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw DataError("write failed: " + path);
}

RawFrame read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || m1 != '6') throw DataError("ppm " + path + ": not a binary P6 file");
  const int w = read_pnm_int(is, path);
  const int h = read_pnm_int(is, path);
  const int maxval = read_pnm_int(is, path);
  if (maxval != 255) throw DataError("ppm " + path + ": only maxval 255 supported");
  is.get();  // single whitespace after maxval
  RawFrame img = Tensor::map(h, w, 3);
  std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!is) throw DataError("ppm " + path + ": truncated pixel data");
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[static_cast<size_t>(x) * 3 + c] / 256.0;
  }
  return img;
}

void write_pgm(const std::string& path, const Tensor& gray) {
  if (gray.rank() != 3 || gray.c() != 1) throw UsageError("write_pgm: need (h, w, 1) image");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  os << "P5\n" << gray.w() << " " << gray.h() << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(gray.w()));
  for (int y = 0; y < gray.h(); ++y) {
    for (int x = 0; x < gray.w(); ++x) row[static_cast<size_t>(x)] = to_byte(gray.at(y, x, 0));
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace mmnet
