#pragma once

#include <cstdint>
#include <random>

namespace mmnet {

// Seeded generator with hand-rolled mappings so streams are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : g_(seed) {}

  uint64_t next_u64() { return g_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(g_() % static_cast<uint64_t>(hi - lo + 1));
  }

  // Derive an independent stream, e.g. one per clip or per object.
  Rng fork(uint64_t salt) {
    return Rng(g_() ^ (salt * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull));
  }

 private:
  std::mt19937_64 g_;
};

}  // namespace mmnet
