#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcnas/flowio/packet.hpp"

namespace tcnas::flowio {

enum class SampleFormat : uint8_t { flat = 0, timeseries = 1 };
enum class Split : uint8_t { train = 0, val = 1, test = 2 };

// One encoded flow. Bytes are kept pre-normalization (value/255 happens when a
// batch is assembled), so on-disk round trips are trivially exact.
struct Sample {
    std::vector<uint8_t> bytes; // dim0*dim1, row-major (length x channels)
    std::vector<uint8_t> mask;  // 1 = perturbable payload byte, 0 = header/padding
    uint16_t label = 0;
};

// Immutable after construction; safe to share read-only across threads.
struct Dataset {
    SampleFormat format = SampleFormat::flat;
    uint32_t dim0 = 0; // sequence length (flat: 784, time series: 10)
    uint32_t dim1 = 0; // channels (flat: 1, time series: 1000)
    std::vector<std::string> class_names;
    std::vector<Sample> samples;
    std::vector<Split> split_tags; // one per sample

    size_t size() const { return samples.size(); }
    size_t num_classes() const { return class_names.size(); }
    size_t elems() const { return static_cast<size_t>(dim0) * dim1; }
    std::vector<size_t> indices_of(Split s) const;
};

// Concatenate packet bytes, truncate/zero-pad to `length`, mark payload
// positions perturbable. Throws EmptyFlow.
Sample encode_flat(const RawFlow& flow, size_t length = 784);

// First n_packets packets as rows of an n_packets x n_bytes matrix; missing
// rows stay zero with zero mask.
Sample encode_timeseries(const RawFlow& flow, size_t n_packets = 10, size_t n_bytes = 1000);

// Stratified two-stage split: test_frac of each class to test, then
// val_frac_of_train of the remaining pool to val. Deterministic per seed.
Dataset split_dataset(Dataset ds, double test_frac, double val_frac_of_train, uint64_t seed);

std::vector<size_t> class_counts(const Dataset& ds);
uint64_t dataset_hash(const Dataset& ds);

} // namespace tcnas::flowio
