#include "psfp/stream_filter.hpp"

namespace psfp {

const char* to_string(StreamIdKind kind) {
    switch (kind) {
        case StreamIdKind::NullStream: return "null_stream";
        case StreamIdKind::SourceMac: return "source_mac";
        case StreamIdKind::IpTernary: return "ip_ternary";
        case StreamIdKind::IpExact: return "ip_exact";
    }
    return "?";
}

bool StreamIdKey::matches(const Frame& f) const {
    if (!f.has_vlan || f.vid != vlan_id) return false;
    switch (kind) {
        case StreamIdKind::NullStream:
            return eth_dst.matches(f.eth_dst);
        case StreamIdKind::SourceMac:
            return eth_src.matches(f.eth_src) && eth_dst.matches(f.eth_dst);
        case StreamIdKind::IpTernary:
        case StreamIdKind::IpExact: {
            if (!f.ip) return false;
            const IpFields& ip = *f.ip;
            bool src_ok = kind == StreamIdKind::IpExact || eth_src.matches(f.eth_src);
            return src_ok && eth_dst.matches(f.eth_dst) && ip_src.matches(ip.src) &&
                   ip_dst.matches(ip.dst) && dscp.matches(ip.dscp) &&
                   next_protocol.matches(ip.next_protocol) &&
                   l4_src.matches(ip.l4_src) && l4_dst.matches(ip.l4_dst);
        }
    }
    return false;
}

std::optional<std::string> FilterTable::add(const StreamFilterEntry& entry) {
    size_t kind_idx = static_cast<size_t>(entry.key.kind);
    if (kind_counts_[kind_idx] + 1 > limits_.per_kind[kind_idx]) {
        return "capacity exceeded for " + std::string(to_string(entry.key.kind)) +
               " entries (limit " + std::to_string(limits_.per_kind[kind_idx]) + ")";
    }
    if (!handles_.insert(entry.stream_handle).second) {
        return "duplicate stream_handle " + std::to_string(entry.stream_handle);
    }
    kind_counts_[kind_idx]++;
    entries_.push_back(entry);
    return std::nullopt;
}

const StreamFilterEntry* FilterTable::classify(const Frame& frame) const {
    if (!frame.has_vlan) return nullptr;
    for (const StreamFilterEntry& e : entries_) {
        if (e.key.matches(frame)) return &e;
    }
    return nullptr;
}

FilterTable::SduDecision FilterTable::check_sdu(uint32_t frame_bytes,
                                                const StreamFilterEntry& entry) {
    if (entry.max_sdu_bytes && frame_bytes > *entry.max_sdu_bytes) {
        if (entry.max_sdu_exceeded_enabled) {
            blocked_.insert(entry.stream_handle);
            return SduDecision::DropOversizeAndBlock;
        }
        return SduDecision::DropOversize;
    }
    if (is_blocked(entry.stream_handle)) return SduDecision::DropBlocked;
    return SduDecision::Pass;
}

}  // namespace psfp
