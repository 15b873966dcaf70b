#include "tcnas/nas/search.hpp"

#include <algorithm>
#include <future>
#include <semaphore>

#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"

namespace tcnas::nas {

using tensornn::Padding;
using tensornn::PoolKind;
using tensornn::PoolSpec;
using tensornn::spec_hash;

BlockSpec random_block(const SearchSpace& space, Rng& rng) {
    BlockSpec b;
    b.filters = static_cast<int>(rng.uniform_int(space.filters_min, space.filters_max));
    b.kernel = static_cast<int>(rng.uniform_int(space.kernel_min, space.kernel_max));
    b.stride = static_cast<int>(rng.uniform_int(space.stride_min, space.stride_max));
    b.padding = rng.bernoulli(0.5) ? Padding::same : Padding::valid;
    if (rng.bernoulli(0.5)) {
        PoolSpec p;
        p.kind = rng.bernoulli(0.5) ? PoolKind::avg : PoolKind::max;
        p.size = space.pool_sizes[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(space.pool_sizes.size()) - 1))];
        b.pool = p;
    }
    b.dropout = rng.bernoulli(0.5) ? rng.uniform_float(space.dropout_min, space.dropout_max) : 0.0f;
    return b;
}

namespace {

std::optional<PoolSpec> random_pool(const SearchSpace& space, Rng& rng) {
    if (!rng.bernoulli(0.5)) return std::nullopt;
    PoolSpec p;
    p.kind = rng.bernoulli(0.5) ? PoolKind::avg : PoolKind::max;
    p.size = space.pool_sizes[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(space.pool_sizes.size()) - 1))];
    return p;
}

// Resample one field until it differs; bounded so degenerate one-value spaces
// cannot spin forever.
constexpr int kResampleCap = 100;

void modify_one_field(BlockSpec& b, const SearchSpace& space, Rng& rng) {
    const auto field = rng.uniform_int(0, 5);
    for (int tries = 0; tries < kResampleCap; ++tries) {
        switch (field) {
        case 0: {
            const auto v = static_cast<int>(rng.uniform_int(space.filters_min, space.filters_max));
            if (v == b.filters) continue;
            b.filters = v;
            return;
        }
        case 1: {
            const auto v = static_cast<int>(rng.uniform_int(space.kernel_min, space.kernel_max));
            if (v == b.kernel) continue;
            b.kernel = v;
            return;
        }
        case 2: {
            const auto v = static_cast<int>(rng.uniform_int(space.stride_min, space.stride_max));
            if (v == b.stride) continue;
            b.stride = v;
            return;
        }
        case 3:
            b.padding = b.padding == Padding::valid ? Padding::same : Padding::valid;
            return;
        case 4: {
            const auto p = random_pool(space, rng);
            if (p == b.pool) continue;
            b.pool = p;
            return;
        }
        default: {
            const float v =
                rng.bernoulli(0.5) ? rng.uniform_float(space.dropout_min, space.dropout_max) : 0.0f;
            if (v == b.dropout) continue;
            b.dropout = v;
            return;
        }
        }
    }
}

bool better_candidate(double val_a, int64_t params_a, uint64_t hash_a, double val_b,
                      int64_t params_b, uint64_t hash_b) {
    if (val_a != val_b) return val_a > val_b;
    if (params_a != params_b) return params_a < params_b;
    return hash_a < hash_b;
}

uint64_t child_seed(const SearchConfig& cfg, int generation, int index) {
    return mix_seed(cfg.seed, 0xc41d * static_cast<uint64_t>(generation + 1) +
                                  static_cast<uint64_t>(index + 7));
}

// Build + train one candidate with seeds derived from (search seed, gen, idx),
// so results are identical no matter how many workers run.
std::pair<Net, double> train_candidate(const ArchSpec& spec, const flowio::Dataset& ds,
                                       const SearchConfig& cfg, int generation, int index) {
    const uint64_t seed = child_seed(cfg, generation, index);
    Net net = tensornn::build<float>(spec, mix_seed(seed, 0xb11d));
    tensornn::TrainConfig tc = cfg.train;
    tc.seed = mix_seed(seed, 0x7247);
    auto [trained, hist] = tensornn::train(std::move(net), ds, tc);
    const double val = hist.best_epoch >= 0 ? hist.val_accuracy[hist.best_epoch] : -1.0;
    return {std::move(trained), val};
}

} // namespace

ArchSpec mutate(const ArchSpec& parent, const SearchSpace& space, Rng& rng) {
    ArchSpec child = parent;
    const auto n = static_cast<int64_t>(child.blocks.size());
    int kind;
    do {
        kind = static_cast<int>(rng.uniform_int(0, 2));
    } while ((kind == 2 && n <= 1) || (kind == 1 && n >= space.max_blocks));

    if (kind == 0) {
        const auto bi = static_cast<size_t>(rng.uniform_int(0, n - 1));
        modify_one_field(child.blocks[bi], space, rng);
    } else if (kind == 1) {
        const auto pos = static_cast<size_t>(rng.uniform_int(0, n));
        child.blocks.insert(child.blocks.begin() + static_cast<long>(pos),
                            random_block(space, rng));
    } else {
        const auto pos = static_cast<size_t>(rng.uniform_int(0, n - 1));
        child.blocks.erase(child.blocks.begin() + static_cast<long>(pos));
    }
    return child;
}

ArchSpec random_feasible_seed(const SearchSpace& space, const hwcost::Thresholds& th,
                              tensornn::InputShape input, int num_classes, Rng& rng,
                              int attempt_cap) {
    for (int i = 0; i < attempt_cap; ++i) {
        ArchSpec spec;
        spec.input = input;
        spec.num_classes = num_classes;
        spec.blocks = {random_block(space, rng)};
        if (hwcost::feasible(spec, th).first) return spec;
    }
    fail("MutationStarvation", "no feasible single-block seed after " +
                                   std::to_string(attempt_cap) +
                                   " draws; thresholds too tight for the space");
}

GenerationResult next_generation(const ArchSpec& parent, const flowio::Dataset& ds,
                                 const SearchConfig& cfg, Rng& rng, int generation) {
    GenerationResult res;
    std::vector<size_t> feasible_slots;
    int draw = 0;
    for (int slot = 0; slot < cfg.children; ++slot) {
        bool found = false;
        for (int attempt = 0; attempt < cfg.mutation_attempt_cap; ++attempt) {
            ArchSpec cand = mutate(parent, cfg.space, rng);
            const auto [ok, cost] = hwcost::feasible(cand, cfg.thresholds);
            CandidateRecord rec;
            rec.generation = generation;
            rec.index = draw++;
            rec.hash = spec_hash(cand);
            rec.spec = std::move(cand);
            rec.feasible = ok;
            rec.params = cost.params;
            rec.flops = cost.flops;
            rec.max_tensor = cost.max_tensor;
            res.candidates.push_back(std::move(rec));
            if (ok) {
                feasible_slots.push_back(res.candidates.size() - 1);
                found = true;
                break;
            }
            ++res.discarded;
        }
        if (!found)
            fail("MutationStarvation",
                 "generation " + std::to_string(generation) + ": no feasible child within " +
                     std::to_string(cfg.mutation_attempt_cap) + " draws");
    }

    // children are independent; train them concurrently when allowed
    std::vector<std::pair<Net, double>> outcomes(feasible_slots.size());
    if (cfg.threads > 1) {
        std::counting_semaphore<256> gate(std::min(cfg.threads, 256));
        std::vector<std::future<void>> futures;
        futures.reserve(feasible_slots.size());
        for (size_t i = 0; i < feasible_slots.size(); ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                gate.acquire();
                const auto& rec = res.candidates[feasible_slots[i]];
                outcomes[i] = train_candidate(rec.spec, ds, cfg, generation, rec.index);
                gate.release();
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (size_t i = 0; i < feasible_slots.size(); ++i) {
            const auto& rec = res.candidates[feasible_slots[i]];
            outcomes[i] = train_candidate(rec.spec, ds, cfg, generation, rec.index);
        }
    }

    size_t best = 0;
    for (size_t i = 0; i < feasible_slots.size(); ++i) {
        auto& rec = res.candidates[feasible_slots[i]];
        rec.trained = true;
        rec.val_accuracy = outcomes[i].second;
        const auto& cur = res.candidates[feasible_slots[best]];
        if (i > 0 && better_candidate(rec.val_accuracy, rec.params, rec.hash, cur.val_accuracy,
                                      cur.params, cur.hash))
            best = i;
    }
    const auto& best_rec = res.candidates[feasible_slots[best]];
    res.new_parent = best_rec.spec;
    res.best_model = std::move(outcomes[best].first);
    res.best_val = best_rec.val_accuracy;
    res.best_hash = best_rec.hash;
    return res;
}

SearchResult search(const ArchSpec& a0, const flowio::Dataset& ds, const SearchConfig& cfg) {
    const auto [seed_ok, seed_cost] = hwcost::feasible(a0, cfg.thresholds);
    if (!seed_ok)
        fail("InfeasibleSeed", "initial architecture violates the thresholds (params " +
                                   std::to_string(seed_cost.params) + ", flops " +
                                   std::to_string(seed_cost.flops) + ", max tensor " +
                                   std::to_string(seed_cost.max_tensor) + ")");

    SearchResult out;
    auto [a0_model, a0_val] = train_candidate(a0, ds, cfg, 0, -1);

    CandidateRecord seed_rec;
    seed_rec.generation = 0;
    seed_rec.index = -1;
    seed_rec.spec = a0;
    seed_rec.hash = spec_hash(a0);
    seed_rec.feasible = true;
    seed_rec.params = seed_cost.params;
    seed_rec.flops = seed_cost.flops;
    seed_rec.max_tensor = seed_cost.max_tensor;
    seed_rec.trained = true;
    seed_rec.val_accuracy = a0_val;
    out.log.candidates.push_back(seed_rec);

    out.best_spec = a0;
    out.best_model = std::move(a0_model);
    out.best_val = a0_val;
    uint64_t best_hash = seed_rec.hash;
    int64_t best_params = seed_rec.params;

    ArchSpec parent = a0;
    Rng rng(mix_seed(cfg.seed, 0xea5));
    for (int g = 1; g <= cfg.generations; ++g) {
        const uint64_t parent_hash = spec_hash(parent);
        GenerationResult gen = next_generation(parent, ds, cfg, rng, g);

        int64_t gen_best_params = 0;
        for (const auto& rec : gen.candidates) {
            if (rec.hash == gen.best_hash) gen_best_params = rec.params;
            out.log.candidates.push_back(rec);
        }
        if (better_candidate(gen.best_val, gen_best_params, gen.best_hash, out.best_val,
                             best_params, best_hash)) {
            out.best_spec = gen.new_parent;
            out.best_model = std::move(gen.best_model);
            out.best_val = gen.best_val;
            best_hash = gen.best_hash;
            best_params = gen_best_params;
        }
        out.log.generations.push_back({g, parent_hash, gen.discarded, gen.best_hash, gen.best_val,
                                       best_hash, out.best_val});
        parent = gen.new_parent;
    }
    return out;
}

std::string SearchLog::to_jsonl() const {
    std::string out;
    for (const auto& rec : candidates) {
        nlohmann::json j{{"type", "candidate"},
                         {"gen", rec.generation},
                         {"idx", rec.index},
                         {"hash", hex64(rec.hash)},
                         {"feasible", rec.feasible},
                         {"cost",
                          {{"params", rec.params},
                           {"flops", rec.flops},
                           {"max_tensor", rec.max_tensor}}},
                         {"trained", rec.trained},
                         {"spec", tensornn::arch_to_json(rec.spec)}};
        if (rec.trained) j["val_acc"] = rec.val_accuracy;
        out += j.dump() + "\n";
    }
    for (const auto& g : generations) {
        const nlohmann::json j{{"type", "generation"},
                               {"gen", g.generation},
                               {"parent", hex64(g.parent_hash)},
                               {"discarded", g.discarded},
                               {"best_hash", hex64(g.best_hash)},
                               {"best_val", g.best_val},
                               {"global_best_hash", hex64(g.global_best_hash)},
                               {"global_best_val", g.global_best_val}};
        out += j.dump() + "\n";
    }
    return out;
}

uint64_t SearchLog::hash() const { return fnv1a64(to_jsonl()); }

} // namespace tcnas::nas
