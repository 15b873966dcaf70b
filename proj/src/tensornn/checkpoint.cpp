#include "tcnas/tensornn/checkpoint.hpp"

#include "tcnas/common/binio.hpp"
#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"

namespace tcnas::tensornn {

namespace {
constexpr char kMagic[4] = {'T', 'N', 'N', '1'};
constexpr uint16_t kVersion = 1;

struct TensorDims {
    std::vector<uint32_t> dims;
    size_t elems() const {
        size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

// Shape headers in visit_all order, derived from the spec.
std::vector<TensorDims> tensor_dims(const ArchSpec& spec) {
    std::vector<TensorDims> out;
    uint32_t cin = static_cast<uint32_t>(spec.input.channels);
    for (const auto& b : spec.blocks) {
        const auto f = static_cast<uint32_t>(b.filters);
        out.push_back({{static_cast<uint32_t>(b.kernel), cin, f}}); // conv w
        out.push_back({{f}});                                       // conv bias
        for (int i = 0; i < 4; ++i) out.push_back({{f}});           // gamma/beta/mm/mv
        cin = f;
    }
    const auto k = static_cast<uint32_t>(spec.num_classes);
    out.push_back({{cin, k}}); // dense w
    out.push_back({{k}});      // dense b
    return out;
}
} // namespace

std::vector<uint8_t> checkpoint_to_bytes(const Net& net) {
    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    const std::string spec_json = canonical_json(net.spec);
    w.u32(static_cast<uint32_t>(spec_json.size()));
    w.str(spec_json);

    const auto dims = tensor_dims(net.spec);
    size_t ti = 0;
    net.visit_all_const([&](const std::vector<float>& t) {
        const auto& d = dims[ti++];
        w.u8(static_cast<uint8_t>(d.dims.size()));
        for (auto dim : d.dims) w.u32(dim);
        w.bytes(t.data(), t.size() * sizeof(float));
    });
    w.u32(crc32(w.data().data(), w.size()));
    return w.take();
}

Net checkpoint_from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail("BadMagic", "not a TNN1 checkpoint");
    if (bytes.size() < 14) fail("ShapeMismatch", "file too short for a checkpoint header");

    const size_t body_len = bytes.size() - 4;
    uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body_len, 4);
    if (crc32(bytes.data(), body_len) != stored_crc)
        fail("ChecksumMismatch", "checkpoint CRC32 check failed");

    ByteReader r(bytes.first(body_len), "ShapeMismatch");
    r.take(4);
    const uint16_t version = r.u16();
    if (version != kVersion)
        fail("VersionMismatch", "checkpoint version " + std::to_string(version) + ", expected 1");
    const uint32_t json_len = r.u32();
    const auto raw_json = r.take(json_len);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw_json.begin(), raw_json.end());
    } catch (const nlohmann::json::exception& e) {
        fail("ShapeMismatch", std::string("unparseable spec JSON: ") + e.what());
    }
    const ArchSpec spec = arch_from_json(j);

    Net net = build<float>(spec, 0);
    const auto dims = tensor_dims(spec);
    size_t ti = 0;
    net.visit_all([&](std::vector<float>& t) {
        const auto& expect = dims[ti++];
        const uint8_t rank = r.u8();
        if (rank != expect.dims.size())
            fail("ShapeMismatch", "tensor " + std::to_string(ti - 1) + " rank mismatch");
        for (auto dim : expect.dims) {
            const uint32_t got = r.u32();
            if (got != dim)
                fail("ShapeMismatch", "tensor " + std::to_string(ti - 1) + " dim " +
                                          std::to_string(got) + " != " + std::to_string(dim));
        }
        const auto raw = r.take(expect.elems() * sizeof(float));
        t.resize(expect.elems());
        std::memcpy(t.data(), raw.data(), raw.size());
    });
    if (!r.done()) fail("ShapeMismatch", "trailing bytes after the last tensor");
    return net;
}

void save_checkpoint(const Net& net, const std::string& path) {
    const auto bytes = checkpoint_to_bytes(net);
    write_file(path, std::span<const uint8_t>(bytes));
}

Net load_checkpoint(const std::string& path) { return checkpoint_from_bytes(read_file(path)); }

uint64_t model_hash(const Net& net) {
    const auto bytes = checkpoint_to_bytes(net);
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace tcnas::tensornn
