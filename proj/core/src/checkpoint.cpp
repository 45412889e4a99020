#include "mmnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace mmnet {

static_assert(std::endian::native == std::endian::little, "checkpoint io assumes little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'M', 'N', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

uint32_t get_u32(std::istream& is, const std::string& path, int64_t* offset) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw DataError("checkpoint " + path + ": truncated at byte " + std::to_string(*offset));
  *offset += 4;
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for write: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  for (const auto& [name, t] : tensors) {
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) put_u32(os, static_cast<uint32_t>(t.dim(i)));
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
  }
  if (!os) throw DataError("write failed: " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  int64_t offset = 0;
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("checkpoint " + path + ": bad magic at byte 0");
  offset += 4;
  const uint32_t version = get_u32(is, path, &offset);
  if (version != kVersion)
    throw DataError("checkpoint " + path + ": unsupported version " + std::to_string(version));

  std::map<std::string, Tensor> out;
  while (true) {
    is.peek();
    if (is.eof()) break;
    const uint32_t name_len = get_u32(is, path, &offset);
    if (name_len > 4096)
      throw DataError("checkpoint " + path + ": implausible name length at byte " +
                      std::to_string(offset - 4));
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw DataError("checkpoint " + path + ": truncated at byte " + std::to_string(offset));
    offset += name_len;
    const uint32_t rank = get_u32(is, path, &offset);
    if (rank == 0 || rank > 4)
      throw DataError("checkpoint " + path + ": bad rank at byte " + std::to_string(offset - 4));
    std::vector<int> dims(rank);
    for (uint32_t i = 0; i < rank; ++i) dims[i] = static_cast<int>(get_u32(is, path, &offset));
    Tensor t(dims);
    is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
    if (!is) throw DataError("checkpoint " + path + ": truncated at byte " + std::to_string(offset));
    offset += t.size() * 8;
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace mmnet
