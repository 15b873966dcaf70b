#include "tcnas/flowio/packet.hpp"

#include <cstdio>
#include <unordered_map>

#include "tcnas/common/binio.hpp"
#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"

namespace tcnas::flowio {

std::string FlowKey::str() const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u:%u -> %u.%u.%u.%u:%u proto %u", src_ip[0],
                  src_ip[1], src_ip[2], src_ip[3], src_port, dst_ip[0], dst_ip[1], dst_ip[2],
                  dst_ip[3], dst_port, protocol);
    return buf;
}

size_t FlowKeyHash::operator()(const FlowKey& k) const {
    uint8_t raw[13];
    std::memcpy(raw, k.src_ip.data(), 4);
    std::memcpy(raw + 4, k.dst_ip.data(), 4);
    raw[8] = static_cast<uint8_t>(k.src_port >> 8);
    raw[9] = static_cast<uint8_t>(k.src_port);
    raw[10] = static_cast<uint8_t>(k.dst_port >> 8);
    raw[11] = static_cast<uint8_t>(k.dst_port);
    raw[12] = k.protocol;
    return static_cast<size_t>(fnv1a64(raw, sizeof(raw)));
}

namespace {

constexpr uint32_t kMagicUsec = 0xa1b2c3d4u;
constexpr uint32_t kMagicUsecSwapped = 0xd4c3b2a1u;
constexpr uint32_t kMagicNsec = 0xa1b23c4du;
constexpr uint32_t kMagicNsecSwapped = 0x4d3cb2a1u;
constexpr uint32_t kLinkTypeEthernet = 1;
constexpr uint16_t kEtherTypeIpv4 = 0x0800;
constexpr size_t kEthernetHeaderLen = 14;

uint32_t bswap32(uint32_t v) { return __builtin_bswap32(v); }
uint16_t be16(const uint8_t* p) { return static_cast<uint16_t>(p[0] << 8 | p[1]); }

} // namespace

ParsedCapture parse_pcap(std::span<const uint8_t> file_bytes) {
    ByteReader r(file_bytes, "TruncatedHeader");
    if (r.remaining() < 24) fail("BadMagic", "file shorter than the 24-byte PCAP global header");

    const uint32_t magic_raw = r.u32();
    bool swapped = false;
    bool nanos = false;
    switch (magic_raw) {
    case kMagicUsec: break;
    case kMagicNsec: nanos = true; break;
    case kMagicUsecSwapped: swapped = true; break;
    case kMagicNsecSwapped:
        swapped = true;
        nanos = true;
        break;
    default: fail("BadMagic", "not a classic PCAP file (magic " + hex64(magic_raw) + ")");
    }
    auto rd32 = [&]() {
        const uint32_t v = r.u32();
        return swapped ? bswap32(v) : v;
    };

    r.take(2 + 2 + 4 + 4 + 4); // version, thiszone, sigfigs, snaplen
    const uint32_t link_type = rd32();
    if (link_type != kLinkTypeEthernet)
        fail("UnsupportedLinkType", "link type " + std::to_string(link_type) + ", only Ethernet (1)");

    ParsedCapture out;
    while (!r.done()) {
        if (r.remaining() < 16)
            fail("TruncatedHeader", "dangling " + std::to_string(r.remaining()) +
                                        " bytes where a 16-byte record header was declared");
        const uint32_t ts_sec = rd32();
        const uint32_t ts_frac = rd32();
        const uint32_t incl_len = rd32();
        rd32(); // orig_len
        if (r.remaining() < incl_len)
            fail("TruncatedHeader", "record declares " + std::to_string(incl_len) +
                                        " bytes, file has " + std::to_string(r.remaining()));
        const auto frame = r.take(incl_len);

        if (frame.size() < kEthernetHeaderLen + 20 ||
            be16(frame.data() + 12) != kEtherTypeIpv4) {
            ++out.skipped;
            continue;
        }
        const uint8_t* ip = frame.data() + kEthernetHeaderLen;
        const size_t captured = frame.size() - kEthernetHeaderLen;
        if ((ip[0] >> 4) != 4) {
            ++out.skipped;
            continue;
        }
        const uint16_t ihl = static_cast<uint16_t>((ip[0] & 0x0f) * 4);
        const uint16_t total_len = be16(ip + 2);
        const uint16_t frag = static_cast<uint16_t>(be16(ip + 6) & 0x1fff);
        const uint8_t proto = ip[9];
        if (ihl < 20 || ihl > captured || frag != 0) {
            ++out.skipped;
            continue;
        }
        // Ethernet frames may carry trailing pad bytes; trust the IP total
        // length when it is plausible.
        size_t len = captured;
        if (total_len >= ihl && total_len <= captured) len = total_len;

        uint16_t thl = 0;
        Transport transport;
        if (proto == 6) {
            transport = Transport::tcp;
            if (len < size_t(ihl) + 20) {
                ++out.skipped;
                continue;
            }
            thl = static_cast<uint16_t>((ip[ihl + 12] >> 4) * 4);
            if (thl < 20) {
                ++out.skipped;
                continue;
            }
        } else if (proto == 17) {
            transport = Transport::udp;
            thl = 8;
        } else {
            ++out.skipped;
            continue;
        }
        if (size_t(ihl) + thl > len) {
            ++out.skipped;
            continue;
        }

        Packet pkt;
        pkt.ts_sec = ts_sec;
        pkt.ts_nsec = nanos ? ts_frac : ts_frac * 1000u;
        pkt.ip_header_len = ihl;
        pkt.transport_header_len = thl;
        pkt.transport = transport;
        std::memcpy(pkt.key.src_ip.data(), ip + 12, 4);
        std::memcpy(pkt.key.dst_ip.data(), ip + 16, 4);
        pkt.key.src_port = be16(ip + ihl);
        pkt.key.dst_port = be16(ip + ihl + 2);
        pkt.key.protocol = proto;
        pkt.link_payload.assign(ip, ip + len);
        std::fill(pkt.link_payload.begin() + 12, pkt.link_payload.begin() + 20, uint8_t(0));
        out.packets.push_back(std::move(pkt));
    }
    return out;
}

std::vector<RawFlow> assemble_flows(std::span<const Packet> packets, const Labeler& labeler,
                                    bool strict) {
    std::vector<RawFlow> flows;
    std::unordered_map<FlowKey, size_t, FlowKeyHash> index;
    for (const auto& pkt : packets) {
        auto [it, inserted] = index.try_emplace(pkt.key, flows.size());
        if (inserted) flows.push_back(RawFlow{pkt.key, {}, 0});
        flows[it->second].packets.push_back(pkt);
    }

    std::vector<RawFlow> labeled;
    labeled.reserve(flows.size());
    for (auto& f : flows) {
        const auto label = labeler(f.key);
        if (!label) {
            if (strict) fail("UnlabeledFlow", "no label for flow " + f.key.str());
            continue;
        }
        f.label = *label;
        labeled.push_back(std::move(f));
    }
    return labeled;
}

} // namespace tcnas::flowio
