#include "tcnas/flowio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tcnas/common/error.hpp"
#include "tcnas/common/rng.hpp"

namespace tcnas::flowio {

namespace {

constexpr int kHeaderLen = 40; // 20-byte IP header + 20-byte TCP header
constexpr int kMotifLen = 24;
constexpr int kMotifJitter = 8;
constexpr int kMinPackets = 2;
constexpr int kMaxPackets = 6;
constexpr int kMinPayload = 320;
constexpr int kMaxPayload = 440;

int motif_offset(int cls) { return 16 + 37 * (cls % 8); }

// Faint per-class shift of the uniform payload noise, spread over [-10, 10].
int noise_bias(int cls, int n_classes) {
    if (n_classes < 2) return 0;
    const double t = static_cast<double>(cls) / (n_classes - 1);
    return static_cast<int>(std::lround(-10.0 + 20.0 * t));
}

} // namespace

std::vector<RawFlow> synth_flows(int n_classes, int flows_per_class, uint64_t seed) {
    if (n_classes < 2) fail("InvalidArgument", "need at least 2 classes");
    if (flows_per_class < 1) fail("InvalidArgument", "need at least 1 flow per class");

    const Rng master(mix_seed(seed, 0x5f107));

    std::vector<std::vector<uint8_t>> motifs(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        Rng mr = master.fork(0x700 + static_cast<uint64_t>(c));
        motifs[c].resize(kMotifLen);
        for (auto& b : motifs[c]) b = mr.byte();
    }

    std::vector<RawFlow> flows;
    flows.reserve(static_cast<size_t>(n_classes) * flows_per_class);
    uint64_t flow_id = 0;
    for (int c = 0; c < n_classes; ++c) {
        const int bias = noise_bias(c, n_classes);
        for (int f = 0; f < flows_per_class; ++f, ++flow_id) {
            Rng rng = master.fork(0x1000 + flow_id);
            RawFlow flow;
            flow.label = static_cast<uint16_t>(c);
            flow.key.src_port = static_cast<uint16_t>(1024 + (flow_id % 50000));
            flow.key.dst_port = static_cast<uint16_t>(rng.uniform_int(1, 65535));
            flow.key.protocol = 6;

            const auto n_pkts = static_cast<int>(rng.uniform_int(kMinPackets, kMaxPackets));
            uint64_t ts_sec = 1600000000ull + flow_id;
            for (int p = 0; p < n_pkts; ++p) {
                Packet pkt;
                pkt.ts_sec = ts_sec;
                pkt.ts_nsec = static_cast<uint32_t>(rng.uniform_int(0, 999999)) * 1000u;
                ts_sec += static_cast<uint64_t>(rng.uniform_int(0, 1));
                pkt.ip_header_len = 20;
                pkt.transport_header_len = 20;
                pkt.transport = Transport::tcp;
                pkt.key = flow.key;

                const auto payload_len = static_cast<int>(rng.uniform_int(kMinPayload, kMaxPayload));
                pkt.link_payload.resize(kHeaderLen + payload_len);
                // header: class-independent noise, IP address bytes zeroed as
                // the real preprocessing would leave them
                pkt.link_payload[0] = 0x45;
                for (int i = 1; i < kHeaderLen; ++i)
                    pkt.link_payload[i] = (i >= 12 && i < 20) ? 0 : rng.byte();

                uint8_t* payload = pkt.link_payload.data() + kHeaderLen;
                for (int i = 0; i < payload_len; ++i) {
                    const int v = static_cast<int>(rng.uniform_int(0, 255)) + bias;
                    payload[i] = static_cast<uint8_t>(std::clamp(v, 0, 255));
                }
                const int off =
                    motif_offset(c) + static_cast<int>(rng.uniform_int(0, kMotifJitter));
                for (int i = 0; i < kMotifLen && off + i < payload_len; ++i)
                    payload[off + i] = motifs[c][i];

                flow.packets.push_back(std::move(pkt));
            }
            flows.push_back(std::move(flow));
        }
    }
    return flows;
}

Dataset synth_dataset(int n_classes, int flows_per_class, SampleFormat format, uint64_t seed) {
    const auto flows = synth_flows(n_classes, flows_per_class, seed);

    Dataset ds;
    ds.format = format;
    if (format == SampleFormat::flat) {
        ds.dim0 = 784;
        ds.dim1 = 1;
    } else {
        ds.dim0 = 10;
        ds.dim1 = 1000;
    }
    for (int c = 0; c < n_classes; ++c) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "class_%02d", c);
        ds.class_names.emplace_back(buf);
    }
    ds.samples.reserve(flows.size());
    for (const auto& flow : flows)
        ds.samples.push_back(format == SampleFormat::flat ? encode_flat(flow)
                                                          : encode_timeseries(flow));
    ds.split_tags.assign(ds.samples.size(), Split::train);
    return ds;
}

} // namespace tcnas::flowio
