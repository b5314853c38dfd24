#pragma once

#include <cstdint>
#include <optional>

#include "psfp/time48.hpp"

namespace psfp {

struct IpFields {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint8_t dscp = 0;           // 6 bit
    uint8_t next_protocol = 0;  // 8 bit
    uint16_t l4_src = 0;
    uint16_t l4_dst = 0;
};

// Header prepended on the first pipeline pass and consumed on the second.
// Adds exactly 7 bytes to the on-wire size while attached.
struct RecircHeader {
    static constexpr uint32_t kWireBytes = 7;

    uint32_t frame_bytes = 0;      // original frame size, without this header
    uint64_t t_rel_adj_ns = 0;     // delta-adjusted relative hyperperiod position
};

// A simulated Ethernet frame.
struct Frame {
    uint32_t ingress_port = 0;
    Timestamp48 arrival = 0;  // first-pass ingress timestamp
    uint32_t size_bytes = 0;  // on-wire frame size, excluding any recirc header

    bool has_vlan = false;
    uint8_t pcp = 0;   // 3 bit
    bool dei = false;  // drop eligible indicator; set => pre-colored yellow
    uint16_t vid = 0;  // 12 bit

    uint64_t eth_src = 0;  // 48 bit
    uint64_t eth_dst = 0;  // 48 bit
    std::optional<IpFields> ip;

    std::optional<RecircHeader> recirc;  // present only on the second pass

    // Simulator bookkeeping, not on the wire.
    uint32_t source_id = 0;
    uint64_t seq = 0;
};

}  // namespace psfp
