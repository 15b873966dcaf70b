#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tcnas::tensornn {

enum class Padding : uint8_t { valid = 0, same = 1 };
enum class PoolKind : uint8_t { max = 0, avg = 1 };

struct PoolSpec {
    PoolKind kind = PoolKind::max;
    int size = 2;
    bool operator==(const PoolSpec&) const = default;
};

// One search-space block: Conv1D -> BN -> ReLU -> optional pool -> optional dropout.
struct BlockSpec {
    int filters = 16;
    int kernel = 3;
    int stride = 1;
    Padding padding = Padding::valid;
    std::optional<PoolSpec> pool;
    float dropout = 0.0f; // 0 = no dropout layer
    bool operator==(const BlockSpec&) const = default;
};

struct InputShape {
    int length = 0;   // sequence axis (flat: 784 bytes, time series: 10 packets)
    int channels = 0; // per-step features (flat: 1, time series: 1000 bytes)
    bool operator==(const InputShape&) const = default;
};

// The network genome: block list plus the implicit GAP -> dense -> softmax head.
struct ArchSpec {
    std::vector<BlockSpec> blocks;
    int num_classes = 2;
    InputShape input;
    bool operator==(const ArchSpec&) const = default;
};

nlohmann::json arch_to_json(const ArchSpec& spec);
ArchSpec arch_from_json(const nlohmann::json& j);

// Compact dump with alphabetically ordered keys; the hashing/logging form.
std::string canonical_json(const ArchSpec& spec);
uint64_t spec_hash(const ArchSpec& spec);

const char* padding_name(Padding p);
const char* pool_name(PoolKind k);

// Reference architectures found by the search on the two input formats.
ArchSpec preset_flat(int num_classes = 20);
ArchSpec preset_timeseries(int num_classes = 20);

} // namespace tcnas::tensornn
