#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "psfp/frame.hpp"

namespace psfp {

// 802.1CB stream identification functions. Which header fields participate,
// and whether they match exact or ternary, is fixed per function.
enum class StreamIdKind : uint8_t {
    NullStream = 0,  // eth_dst exact, vlan exact
    SourceMac = 1,   // eth_src exact, eth_dst ternary, vlan exact
    IpTernary = 2,   // eth_src/eth_dst ternary, vlan exact, IP 5-tuple+DSCP ternary
    IpExact = 3,     // eth_dst exact, vlan exact, IP 5-tuple+DSCP exact
};

inline constexpr int kStreamIdKindCount = 4;

const char* to_string(StreamIdKind kind);

struct TernaryField {
    uint64_t value = 0;
    uint64_t mask = 0;  // 0 = wildcard, all-ones within width = exact

    bool matches(uint64_t v) const { return ((v ^ value) & mask) == 0; }
};

struct StreamIdKey {
    StreamIdKind kind = StreamIdKind::NullStream;
    TernaryField eth_src;  // participates in SourceMac (exact) and IpTernary
    TernaryField eth_dst;  // participates in all kinds
    uint16_t vlan_id = 0;  // always exact
    TernaryField ip_src;
    TernaryField ip_dst;
    TernaryField dscp;
    TernaryField next_protocol;
    TernaryField l4_src;
    TernaryField l4_dst;

    bool matches(const Frame& f) const;
};

struct StreamFilterEntry {
    StreamIdKey key;
    uint32_t stream_handle = 0;
    uint32_t gate_id = 0;
    uint32_t meter_id = 0;
    std::optional<uint32_t> max_sdu_bytes;
    bool max_sdu_exceeded_enabled = false;
};

// Maximum stream identification entries per function, mirroring the capacity
// of the modeled hardware tables. Soft limits, enforced at table-load time.
struct FilterCapacityLimits {
    std::array<uint32_t, kStreamIdKindCount> per_kind = {35840, 4096, 2048, 32768};

    uint32_t limit(StreamIdKind kind) const {
        return per_kind[static_cast<size_t>(kind)];
    }
};

// Ordered stream identification table. Lookup is first match in insertion
// order, which fixes ternary overlap deterministically.
class FilterTable {
public:
    FilterTable() = default;
    explicit FilterTable(FilterCapacityLimits limits) : limits_(limits) {}

    // Returns an error message on capacity overflow or duplicate handle.
    std::optional<std::string> add(const StreamFilterEntry& entry);

    // First matching entry, or nullptr when the frame is not identified
    // (frame becomes best-effort, PSFP not applied). Untagged frames never match.
    const StreamFilterEntry* classify(const Frame& frame) const;

    enum class SduDecision : uint8_t {
        Pass,
        DropOversize,          // this frame only
        DropOversizeAndBlock,  // frame dropped, stream permanently blocked
        DropBlocked,           // stream already permanently blocked
    };

    // Maximum-SDU filter plus the permanent stream block. frame_bytes is the
    // original frame size, excluding the recirculation header.
    SduDecision check_sdu(uint32_t frame_bytes, const StreamFilterEntry& entry);

    bool is_blocked(uint32_t stream_handle) const {
        return blocked_.count(stream_handle) != 0;
    }
    // Control-plane reset; the only way a blocked flag is ever cleared.
    void reset_block(uint32_t stream_handle) { blocked_.erase(stream_handle); }

    size_t size() const { return entries_.size(); }
    uint32_t count(StreamIdKind kind) const {
        return kind_counts_[static_cast<size_t>(kind)];
    }
    const std::vector<StreamFilterEntry>& entries() const { return entries_; }
    const FilterCapacityLimits& limits() const { return limits_; }

private:
    std::vector<StreamFilterEntry> entries_;
    std::array<uint32_t, kStreamIdKindCount> kind_counts_ = {0, 0, 0, 0};
    std::unordered_set<uint32_t> handles_;
    std::unordered_set<uint32_t> blocked_;
    FilterCapacityLimits limits_;
};

}  // namespace psfp
