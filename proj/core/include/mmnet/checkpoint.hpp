#pragma once

#include <map>
#include <string>

#include "mmnet/tensor.hpp"

namespace mmnet {

// Parameter checkpoint: little-endian binary, magic "MMNT", version u32,
// then per-tensor records (name length u32, name bytes, rank u32,
// dims u32 x rank, f64 payload).  Records are written in name order so the
// byte stream is reproducible.
void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace mmnet
