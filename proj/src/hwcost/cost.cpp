#include "tcnas/hwcost/cost.hpp"

#include "tcnas/common/error.hpp"

namespace tcnas::hwcost {

using tensornn::BlockSpec;
using tensornn::Padding;

static int conv_out_len(int in_len, const BlockSpec& b) {
    if (b.padding == Padding::valid) {
        if (in_len < b.kernel) return 0;
        return (in_len - b.kernel) / b.stride + 1;
    }
    return (in_len + b.stride - 1) / b.stride; // ceil(L/s)
}

static int pool_out_len(int in_len, int size) { return (in_len + size - 1) / size; }

std::vector<LayerShape> shape_plan(const ArchSpec& spec) {
    if (spec.input.length < 1 || spec.input.channels < 1)
        fail("InvalidSpec", "input shape must be positive");
    if (spec.num_classes < 2) fail("InvalidSpec", "need at least 2 classes");

    std::vector<LayerShape> plan;
    int len = spec.input.length;
    int ch = spec.input.channels;
    for (size_t i = 0; i < spec.blocks.size(); ++i) {
        const auto& b = spec.blocks[i];
        if (b.filters < 1 || b.kernel < 1 || b.stride < 1)
            fail("InvalidSpec", "block " + std::to_string(i) + " has a non-positive hyperparameter");
        const int out = conv_out_len(len, b);
        if (out < 1)
            fail("InvalidSpec", "block " + std::to_string(i) + ": conv output length " +
                                    std::to_string(out) + " from input length " + std::to_string(len));
        len = out;
        ch = b.filters;
        const std::string n = std::to_string(i + 1);
        plan.push_back({"conv" + n, len, ch});
        plan.push_back({"bn" + n, len, ch});
        plan.push_back({"relu" + n, len, ch});
        if (b.pool) {
            if (b.pool->size < 2)
                fail("InvalidSpec", "block " + std::to_string(i) + ": pool size < 2");
            len = pool_out_len(len, b.pool->size);
            plan.push_back({"pool" + n, len, ch});
        }
    }
    plan.push_back({"gap", 1, ch});
    plan.push_back({"dense", 1, spec.num_classes});
    plan.push_back({"softmax", 1, spec.num_classes});
    return plan;
}

CostReport cost_report(const ArchSpec& spec) {
    const auto plan = shape_plan(spec);

    CostReport r;
    size_t li = 0;
    int in_ch = spec.input.channels;
    for (const auto& b : spec.blocks) {
        const auto& conv = plan[li++];
        const auto& bn = plan[li++];
        const auto& relu = plan[li++];
        const int64_t out = conv.elems();
        // MAC = 2 FLOPs; bias add folded into the MAC count
        r.per_layer.push_back({conv.name, conv.len, conv.ch,
                               static_cast<int64_t>(b.kernel) * in_ch * b.filters + b.filters,
                               2LL * b.kernel * in_ch * b.filters * conv.len});
        // gamma, beta + moving mean/var: all four live in flash at deployment
        r.per_layer.push_back({bn.name, bn.len, bn.ch, 4LL * b.filters, out});
        r.per_layer.push_back({relu.name, relu.len, relu.ch, 0, out});
        if (b.pool) {
            const auto& pool = plan[li++];
            r.per_layer.push_back({pool.name, pool.len, pool.ch, 0, pool.elems()});
        }
        in_ch = b.filters;
    }
    const auto& gap = plan[li++];
    const auto& dense = plan[li++];
    const auto& softmax = plan[li++];
    r.per_layer.push_back({gap.name, gap.len, gap.ch, 0, gap.elems()});
    r.per_layer.push_back({dense.name, dense.len, dense.ch,
                           static_cast<int64_t>(in_ch) * spec.num_classes + spec.num_classes,
                           2LL * in_ch * spec.num_classes});
    r.per_layer.push_back({softmax.name, softmax.len, softmax.ch, 0, softmax.elems()});

    for (const auto& l : r.per_layer) {
        r.params += l.params;
        r.flops += l.flops;
        r.max_tensor = std::max(r.max_tensor, static_cast<int64_t>(l.out_len) * l.out_ch);
    }
    return r;
}

int64_t count_params(const ArchSpec& spec) { return cost_report(spec).params; }
int64_t count_flops(const ArchSpec& spec) { return cost_report(spec).flops; }
int64_t max_tensor(const ArchSpec& spec) { return cost_report(spec).max_tensor; }

std::pair<bool, CostReport> feasible(const ArchSpec& spec, const Thresholds& th) {
    CostReport r;
    try {
        r = cost_report(spec);
    } catch (const Error& e) {
        r.valid = false;
        r.error = e.what();
        return {false, r};
    }
    const bool ok = r.params < th.max_params && r.flops < th.max_flops && r.max_tensor < th.max_tensor;
    return {ok, r};
}

nlohmann::json CostReport::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : per_layer)
        layers.push_back({{"name", l.name},
                          {"out_shape", {l.out_len, l.out_ch}},
                          {"params", l.params},
                          {"flops", l.flops}});
    nlohmann::json j{{"params", params},
                     {"flops", flops},
                     {"max_tensor", max_tensor},
                     {"per_layer", std::move(layers)},
                     {"valid", valid}};
    if (!valid) j["error"] = error;
    return j;
}

} // namespace tcnas::hwcost
