#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcnas/tensornn/net.hpp"

namespace tcnas::tensornn {

// TNN1 checkpoint, little-endian:
//   "TNN1" | u16 version=1 | u32 spec JSON length | canonical spec JSON
//   per tensor (visit_all order): u8 rank | u32 dims[rank] | float32 data
//   u32 CRC32 over everything before it
std::vector<uint8_t> checkpoint_to_bytes(const Net& net);
Net checkpoint_from_bytes(std::span<const uint8_t> bytes);

void save_checkpoint(const Net& net, const std::string& path);
Net load_checkpoint(const std::string& path);

uint64_t model_hash(const Net& net); // FNV-1a of the checkpoint bytes

} // namespace tcnas::tensornn
