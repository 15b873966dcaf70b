#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcnas::flowio {

// Directional 5-tuple: (A->B) and (B->A) are distinct flows.
struct FlowKey {
    std::array<uint8_t, 4> src_ip{};
    std::array<uint8_t, 4> dst_ip{};
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    uint8_t protocol = 0;

    bool operator==(const FlowKey&) const = default;
    std::string str() const;
};

struct FlowKeyHash {
    size_t operator()(const FlowKey& k) const;
};

enum class Transport : uint8_t { tcp = 6, udp = 17 };

// One captured IPv4 TCP/UDP packet with the Ethernet layer removed and the IP
// address bytes zeroed. The original 5-tuple is kept aside for flow grouping.
struct Packet {
    uint64_t ts_sec = 0;
    uint32_t ts_nsec = 0;
    std::vector<uint8_t> link_payload; // IP header onward, addresses zeroed
    uint16_t ip_header_len = 0;
    uint16_t transport_header_len = 0;
    Transport transport = Transport::tcp;
    FlowKey key;

    size_t header_len() const { return size_t(ip_header_len) + transport_header_len; }
};

struct ParsedCapture {
    std::vector<Packet> packets;
    size_t skipped = 0; // non-IPv4, non-TCP/UDP, fragments, malformed frames
};

// Classic PCAP only (magic a1b2c3d4 / d4c3b2a1 and the nanosecond variants),
// Ethernet link type. Throws BadMagic / UnsupportedLinkType / TruncatedHeader.
ParsedCapture parse_pcap(std::span<const uint8_t> file_bytes);

struct RawFlow {
    FlowKey key;
    std::vector<Packet> packets; // capture order
    uint16_t label = 0;
};

using Labeler = std::function<std::optional<uint16_t>(const FlowKey&)>;

// Groups packets by exact directional 5-tuple, preserving per-flow capture
// order; flows appear in order of first packet. Unlabeled flows throw
// UnlabeledFlow in strict mode and are dropped otherwise.
std::vector<RawFlow> assemble_flows(std::span<const Packet> packets, const Labeler& labeler,
                                    bool strict = true);

} // namespace tcnas::flowio
