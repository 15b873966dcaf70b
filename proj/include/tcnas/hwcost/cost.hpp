#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcnas/tensornn/arch.hpp"

namespace tcnas::hwcost {

using tensornn::ArchSpec;

// Output shape of one inference layer. Dense/GAP outputs use len = 1.
struct LayerShape {
    std::string name; // conv1, bn1, relu1, pool1, ..., gap, dense, softmax
    int len = 0;
    int ch = 0;
    int64_t elems() const { return static_cast<int64_t>(len) * ch; }
};

struct LayerCost {
    std::string name;
    int out_len = 0;
    int out_ch = 0;
    int64_t params = 0;
    int64_t flops = 0;
};

struct CostReport {
    int64_t params = 0;     // trainable weights + BN moving statistics
    int64_t flops = 0;      // one inference, MAC counted as 2
    int64_t max_tensor = 0; // largest layer output element count (input buffer excluded)
    std::vector<LayerCost> per_layer;
    bool valid = true;
    std::string error; // InvalidSpec message when !valid

    nlohmann::json to_json() const;
};

struct Thresholds {
    int64_t max_params = 70'000;
    int64_t max_flops = 3'000'000;
    int64_t max_tensor = 6'000;
};

// Per-layer output shapes. Conv length: valid floor((L-k)/s)+1, same ceil(L/s).
// Pool length: ceil(L/size). Throws Error("InvalidSpec") when any length < 1.
std::vector<LayerShape> shape_plan(const ArchSpec& spec);

int64_t count_params(const ArchSpec& spec);
int64_t count_flops(const ArchSpec& spec);
int64_t max_tensor(const ArchSpec& spec);

CostReport cost_report(const ArchSpec& spec); // throws on invalid spec

// Strict comparison against every threshold; invalid specs are infeasible.
std::pair<bool, CostReport> feasible(const ArchSpec& spec, const Thresholds& th);

} // namespace tcnas::hwcost
