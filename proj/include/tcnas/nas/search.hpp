#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnas/common/rng.hpp"
#include "tcnas/flowio/dataset.hpp"
#include "tcnas/hwcost/cost.hpp"
#include "tcnas/tensornn/train.hpp"

namespace tcnas::nas {

using tensornn::ArchSpec;
using tensornn::BlockSpec;
using tensornn::Net;

struct SearchSpace {
    int filters_min = 16, filters_max = 128;
    int kernel_min = 2, kernel_max = 7;
    int stride_min = 1, stride_max = 7;
    float dropout_min = 0.1f, dropout_max = 0.5f;
    std::vector<int> pool_sizes{2, 3};
    int max_blocks = 8;
};

struct SearchConfig {
    int generations = 100;
    int children = 15;
    SearchSpace space;
    hwcost::Thresholds thresholds;
    tensornn::TrainConfig train; // applied to every candidate
    uint64_t seed = 0;
    int mutation_attempt_cap = 200; // draws per needed child before starvation
    int threads = 1;                // concurrent candidate trainings
};

// Every field uniform over its range; pool and dropout each present with
// probability 1/2.
BlockSpec random_block(const SearchSpace& space, Rng& rng);

// Exactly one mutation: modify (resample one hyperparameter of one block until
// it differs), add (insert a random block), or remove (disallowed at one
// block). Disallowed kinds are re-drawn. Feasibility is the caller's job.
ArchSpec mutate(const ArchSpec& parent, const SearchSpace& space, Rng& rng);

// Single random feasible block, re-drawn up to the attempt cap.
ArchSpec random_feasible_seed(const SearchSpace& space, const hwcost::Thresholds& th,
                              tensornn::InputShape input, int num_classes, Rng& rng,
                              int attempt_cap = 200);

struct CandidateRecord {
    int generation = 0;
    int index = 0; // draw order within the generation; -1 for the seed a0
    ArchSpec spec;
    uint64_t hash = 0;
    bool feasible = false;
    int64_t params = 0, flops = 0, max_tensor = 0;
    bool trained = false;
    double val_accuracy = -1.0;
};

struct GenerationRecord {
    int generation = 0;
    uint64_t parent_hash = 0;
    size_t discarded = 0;
    uint64_t best_hash = 0;
    double best_val = -1.0;
    uint64_t global_best_hash = 0;
    double global_best_val = -1.0;
};

struct SearchLog {
    std::vector<CandidateRecord> candidates;
    std::vector<GenerationRecord> generations;

    std::string to_jsonl() const;
    uint64_t hash() const; // FNV-1a of to_jsonl(), the reproducibility check
};

struct GenerationResult {
    ArchSpec new_parent;
    Net best_model;
    double best_val = -1.0;
    uint64_t best_hash = 0;
    std::vector<CandidateRecord> candidates;
    size_t discarded = 0;
};

// Mutates until cfg.children feasible children exist (infeasible draws are
// logged, never trained), trains them, and selects the val-accuracy argmax
// (ties: fewer params, then lower hash). Throws MutationStarvation.
GenerationResult next_generation(const ArchSpec& parent, const flowio::Dataset& ds,
                                 const SearchConfig& cfg, Rng& rng, int generation);

struct SearchResult {
    ArchSpec best_spec;
    Net best_model;
    double best_val = -1.0;
    SearchLog log;
};

// Evolutionary loop: a0 (trained, generation 0) plus cfg.generations rounds of
// next_generation; returns the feasible candidate with the highest val
// accuracy seen anywhere. Throws InfeasibleSeed when a0 breaks the thresholds.
SearchResult search(const ArchSpec& a0, const flowio::Dataset& ds, const SearchConfig& cfg);

} // namespace tcnas::nas
