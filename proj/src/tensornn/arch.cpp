#include "tcnas/tensornn/arch.hpp"

#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"

namespace tcnas::tensornn {

using nlohmann::json;

const char* padding_name(Padding p) { return p == Padding::valid ? "valid" : "same"; }
const char* pool_name(PoolKind k) { return k == PoolKind::max ? "max" : "avg"; }

static Padding padding_from(const std::string& s) {
    if (s == "valid") return Padding::valid;
    if (s == "same") return Padding::same;
    fail("InvalidSpec", "unknown padding '" + s + "'");
}

static PoolKind pool_from(const std::string& s) {
    if (s == "max") return PoolKind::max;
    if (s == "avg") return PoolKind::avg;
    fail("InvalidSpec", "unknown pool kind '" + s + "'");
}

json arch_to_json(const ArchSpec& spec) {
    json blocks = json::array();
    for (const auto& b : spec.blocks) {
        json jb{{"filters", b.filters},
                {"kernel", b.kernel},
                {"stride", b.stride},
                {"padding", padding_name(b.padding)},
                {"dropout", b.dropout}};
        jb["pool"] = b.pool ? json{{"kind", pool_name(b.pool->kind)}, {"size", b.pool->size}}
                            : json(nullptr);
        blocks.push_back(std::move(jb));
    }
    return json{{"blocks", std::move(blocks)},
                {"input", {{"length", spec.input.length}, {"channels", spec.input.channels}}},
                {"num_classes", spec.num_classes}};
}

ArchSpec arch_from_json(const json& j) {
    try {
        ArchSpec spec;
        spec.num_classes = j.at("num_classes").get<int>();
        spec.input.length = j.at("input").at("length").get<int>();
        spec.input.channels = j.at("input").at("channels").get<int>();
        for (const auto& jb : j.at("blocks")) {
            BlockSpec b;
            b.filters = jb.at("filters").get<int>();
            b.kernel = jb.at("kernel").get<int>();
            b.stride = jb.at("stride").get<int>();
            b.padding = padding_from(jb.at("padding").get<std::string>());
            b.dropout = jb.at("dropout").get<float>();
            if (jb.contains("pool") && !jb.at("pool").is_null()) {
                PoolSpec p;
                p.kind = pool_from(jb.at("pool").at("kind").get<std::string>());
                p.size = jb.at("pool").at("size").get<int>();
                b.pool = p;
            }
            spec.blocks.push_back(b);
        }
        return spec;
    } catch (const json::exception& e) {
        fail("InvalidSpec", std::string("malformed architecture JSON: ") + e.what());
    }
}

std::string canonical_json(const ArchSpec& spec) {
    // nlohmann::json orders object keys lexicographically, so dump() is stable
    return arch_to_json(spec).dump();
}

uint64_t spec_hash(const ArchSpec& spec) { return fnv1a64(canonical_json(spec)); }

ArchSpec preset_flat(int num_classes) {
    ArchSpec s;
    s.input = {784, 1};
    s.num_classes = num_classes;
    s.blocks = {
        {25, 7, 4, Padding::valid, PoolSpec{PoolKind::avg, 2}, 0.0f},
        {90, 7, 5, Padding::valid, std::nullopt, 0.0f},
        {70, 4, 4, Padding::same, std::nullopt, 0.0f},
        {47, 3, 1, Padding::same, std::nullopt, 0.0f},
    };
    return s;
}

ArchSpec preset_timeseries(int num_classes) {
    ArchSpec s;
    s.input = {10, 1000};
    s.num_classes = num_classes;
    s.blocks = {
        {17, 3, 1, Padding::same, std::nullopt, 0.0f},
        {112, 4, 1, Padding::same, std::nullopt, 0.0f},
    };
    return s;
}

} // namespace tcnas::tensornn
