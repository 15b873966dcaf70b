#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcnas/flowio/dataset.hpp"

namespace tcnas::flowio {

// FLOWSET container, little-endian:
//   "FTS1" | u16 version=1 | u8 format (0 flat, 1 timeseries) | u8 reserved
//   u32 dim0 | u32 dim1 | u64 sample count | u16 class count
//   class names as u16 length-prefixed UTF-8
//   per sample: u16 label | u8 split tag | dim0*dim1 raw bytes
//               | ceil(dim0*dim1/8) mask bytes, bit-packed LSB-first
//   u32 CRC32 over everything before it
std::vector<uint8_t> flowset_to_bytes(const Dataset& ds);
Dataset flowset_from_bytes(std::span<const uint8_t> bytes);

void write_flowset(const Dataset& ds, const std::string& path);
Dataset read_flowset(const std::string& path);

} // namespace tcnas::flowio
