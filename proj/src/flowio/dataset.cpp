#include "tcnas/flowio/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"
#include "tcnas/common/rng.hpp"

namespace tcnas::flowio {

std::vector<size_t> Dataset::indices_of(Split s) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < split_tags.size(); ++i)
        if (split_tags[i] == s) idx.push_back(i);
    return idx;
}

Sample encode_flat(const RawFlow& flow, size_t length) {
    if (flow.packets.empty()) fail("EmptyFlow", "cannot encode a flow with no packets");
    Sample s;
    s.label = flow.label;
    s.bytes.assign(length, 0);
    s.mask.assign(length, 0);
    size_t pos = 0;
    for (const auto& pkt : flow.packets) {
        const size_t hdr = pkt.header_len();
        for (size_t i = 0; i < pkt.link_payload.size() && pos < length; ++i, ++pos) {
            s.bytes[pos] = pkt.link_payload[i];
            s.mask[pos] = i >= hdr ? 1 : 0;
        }
        if (pos >= length) break;
    }
    return s;
}

Sample encode_timeseries(const RawFlow& flow, size_t n_packets, size_t n_bytes) {
    if (flow.packets.empty()) fail("EmptyFlow", "cannot encode a flow with no packets");
    Sample s;
    s.label = flow.label;
    s.bytes.assign(n_packets * n_bytes, 0);
    s.mask.assign(n_packets * n_bytes, 0);
    const size_t rows = std::min(n_packets, flow.packets.size());
    for (size_t p = 0; p < rows; ++p) {
        const auto& pkt = flow.packets[p];
        const size_t hdr = pkt.header_len();
        const size_t n = std::min(n_bytes, pkt.link_payload.size());
        uint8_t* row = s.bytes.data() + p * n_bytes;
        uint8_t* mrow = s.mask.data() + p * n_bytes;
        for (size_t i = 0; i < n; ++i) {
            row[i] = pkt.link_payload[i];
            mrow[i] = i >= hdr ? 1 : 0;
        }
    }
    return s;
}

Dataset split_dataset(Dataset ds, double test_frac, double val_frac_of_train, uint64_t seed) {
    if (!(test_frac > 0.0 && test_frac < 1.0 && val_frac_of_train > 0.0 && val_frac_of_train < 1.0))
        fail("InvalidArgument", "split fractions must lie in (0, 1)");

    std::vector<std::vector<size_t>> by_class(ds.num_classes());
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto label = ds.samples[i].label;
        if (label >= ds.num_classes()) fail("ShapeMismatch", "label out of range");
        by_class[label].push_back(i);
    }
    for (size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < 3)
            fail("ClassTooSmall", "class " + std::to_string(c) + " has " +
                                      std::to_string(by_class[c].size()) + " samples, need >= 3");

    ds.split_tags.assign(ds.samples.size(), Split::train);
    Rng rng(mix_seed(seed, 0x5117));
    for (auto& members : by_class) {
        rng.shuffle(members);
        const size_t n = members.size();
        const auto n_test = static_cast<size_t>(std::llround(test_frac * static_cast<double>(n)));
        const size_t pool = n - n_test;
        const auto n_val =
            static_cast<size_t>(std::llround(val_frac_of_train * static_cast<double>(pool)));
        for (size_t i = 0; i < n; ++i) {
            const Split tag = i < n_test           ? Split::test
                              : i < n_test + n_val ? Split::val
                                                   : Split::train;
            ds.split_tags[members[i]] = tag;
        }
    }
    return ds;
}

std::vector<size_t> class_counts(const Dataset& ds) {
    std::vector<size_t> counts(ds.num_classes(), 0);
    for (const auto& s : ds.samples) ++counts[s.label];
    return counts;
}

uint64_t dataset_hash(const Dataset& ds) {
    uint64_t h = fnv1a64(&ds.format, 1);
    h = fnv1a64(&ds.dim0, 4, h);
    h = fnv1a64(&ds.dim1, 4, h);
    for (const auto& name : ds.class_names) h = fnv1a64(name, h);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        h = fnv1a64(s.bytes.data(), s.bytes.size(), h);
        h = fnv1a64(s.mask.data(), s.mask.size(), h);
        h = fnv1a64(&s.label, 2, h);
        h = fnv1a64(&ds.split_tags[i], 1, h);
    }
    return h;
}

} // namespace tcnas::flowio
