#include "tcnas/flowio/flowset.hpp"

#include "tcnas/common/binio.hpp"
#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"

namespace tcnas::flowio {

namespace {
constexpr char kMagic[4] = {'F', 'T', 'S', '1'};
constexpr uint16_t kVersion = 1;
} // namespace

std::vector<uint8_t> flowset_to_bytes(const Dataset& ds) {
    if (ds.samples.size() != ds.split_tags.size())
        fail("ShapeMismatch", "split tags and samples disagree");
    if (ds.format == SampleFormat::flat && ds.dim1 != 1)
        fail("ShapeMismatch", "flat datasets require dim1 == 1");
    const size_t elems = ds.elems();
    const size_t mask_bytes = (elems + 7) / 8;

    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    w.u8(static_cast<uint8_t>(ds.format));
    w.u8(0);
    w.u32(ds.dim0);
    w.u32(ds.dim1);
    w.u64(ds.samples.size());
    w.u16(static_cast<uint16_t>(ds.class_names.size()));
    for (const auto& name : ds.class_names) {
        w.u16(static_cast<uint16_t>(name.size()));
        w.str(name);
    }
    std::vector<uint8_t> packed(mask_bytes);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (s.bytes.size() != elems || s.mask.size() != elems)
            fail("ShapeMismatch", "sample " + std::to_string(i) + " does not match dim0*dim1");
        if (s.label >= ds.class_names.size())
            fail("ShapeMismatch", "sample " + std::to_string(i) + " label out of range");
        w.u16(s.label);
        w.u8(static_cast<uint8_t>(ds.split_tags[i]));
        w.bytes(s.bytes.data(), elems);
        std::fill(packed.begin(), packed.end(), uint8_t(0));
        for (size_t j = 0; j < elems; ++j)
            if (s.mask[j]) packed[j >> 3] |= uint8_t(1u << (j & 7));
        w.bytes(packed.data(), mask_bytes);
    }
    const uint32_t crc = crc32(w.data().data(), w.size());
    w.u32(crc);
    return w.take();
}

Dataset flowset_from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail("BadMagic", "not a FLOWSET file");
    if (bytes.size() < 4 + 2 + 2 + 8 + 8 + 2 + 4)
        fail("ShapeMismatch", "file too short for a FLOWSET header");

    const size_t body_len = bytes.size() - 4;
    uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body_len, 4);
    if (crc32(bytes.data(), body_len) != stored_crc)
        fail("ChecksumMismatch", "FLOWSET CRC32 check failed");

    ByteReader r(bytes.first(body_len), "ShapeMismatch");
    r.take(4);
    const uint16_t version = r.u16();
    if (version != kVersion)
        fail("VersionMismatch", "FLOWSET version " + std::to_string(version) + ", expected 1");

    Dataset ds;
    const uint8_t format = r.u8();
    if (format > 1) fail("ShapeMismatch", "unknown format code " + std::to_string(format));
    ds.format = static_cast<SampleFormat>(format);
    r.u8(); // reserved
    ds.dim0 = r.u32();
    ds.dim1 = r.u32();
    const uint64_t count = r.u64();
    const uint16_t n_classes = r.u16();
    if (ds.format == SampleFormat::flat && ds.dim1 != 1)
        fail("ShapeMismatch", "flat FLOWSET with dim1 != 1");
    for (uint16_t c = 0; c < n_classes; ++c) {
        const uint16_t len = r.u16();
        const auto raw = r.take(len);
        ds.class_names.emplace_back(reinterpret_cast<const char*>(raw.data()), raw.size());
    }

    const size_t elems = ds.elems();
    const size_t mask_bytes = (elems + 7) / 8;
    ds.samples.reserve(count);
    ds.split_tags.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        Sample s;
        s.label = r.u16();
        if (s.label >= n_classes)
            fail("ShapeMismatch", "sample " + std::to_string(i) + " label out of range");
        const uint8_t tag = r.u8();
        if (tag > 2) fail("ShapeMismatch", "sample " + std::to_string(i) + " has split tag " +
                                               std::to_string(tag));
        const auto raw = r.take(elems);
        s.bytes.assign(raw.begin(), raw.end());
        const auto packed = r.take(mask_bytes);
        s.mask.resize(elems);
        for (size_t j = 0; j < elems; ++j) s.mask[j] = (packed[j >> 3] >> (j & 7)) & 1u;
        ds.samples.push_back(std::move(s));
        ds.split_tags.push_back(static_cast<Split>(tag));
    }
    if (!r.done()) fail("ShapeMismatch", "trailing bytes after the last sample");
    return ds;
}

void write_flowset(const Dataset& ds, const std::string& path) {
    const auto bytes = flowset_to_bytes(ds);
    write_file(path, std::span<const uint8_t>(bytes));
}

Dataset read_flowset(const std::string& path) {
    const auto bytes = read_file(path);
    return flowset_from_bytes(bytes);
}

} // namespace tcnas::flowio
