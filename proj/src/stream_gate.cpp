#include "psfp/stream_gate.hpp"

#include <algorithm>
#include <cassert>

namespace psfp {

DeltaOffset make_delta_offset(int64_t delta_ns, Duration hyperperiod) {
    assert(hyperperiod > 0);
    uint64_t magnitude =
        (delta_ns < 0 ? static_cast<uint64_t>(-(delta_ns + 1)) + 1
                      : static_cast<uint64_t>(delta_ns)) %
        hyperperiod;
    return DeltaOffset{delta_ns < 0 && magnitude != 0, magnitude};
}

RelativePosition relative_position(Timestamp48 t_i, Timestamp48 t_jh, Duration h) {
    Duration diff = wrap_diff(t_i, t_jh);
    if (diff < h) return {diff, false};
    return {diff % h, true};
}

Duration apply_delta(Duration t_rel, const DeltaOffset& delta, Duration h) {
    assert(t_rel < h && delta.magnitude < h);
    if (delta.negative) {
        if (delta.magnitude > t_rel) return h - delta.magnitude + t_rel;  // underflow
        return t_rel - delta.magnitude;
    }
    uint64_t sum = t_rel + delta.magnitude;
    if (sum >= h) return sum - h;  // overflow
    return sum;
}

StreamGate::StreamGate(StreamGateConfig cfg, const TruncationWindow& window)
    : cfg_(std::move(cfg)), window_(window) {
    table_.reserve(cfg_.open_entries.size());
    for (const GateSlice& s : cfg_.open_entries) {
        // Bounds are truncated at table-build time; end_ns may equal h == span,
        // so the exclusive end key is the raw shift, not the masked key.
        table_.push_back({window_.truncate(s.start_ns),
                          static_cast<uint32_t>(s.end_ns >> window_.low_bit), s.ipv});
    }
    remaining_octets_ = cfg_.octet_budget_bytes.value_or(0);
}

StreamGate::Decision StreamGate::decide(Duration t_rel_adj) const {
    assert(t_rel_adj < cfg_.hyperperiod_ns);
    uint32_t key = window_.truncate(t_rel_adj);
    auto it = std::upper_bound(
        table_.begin(), table_.end(), key,
        [](uint32_t k, const TruncatedEntry& e) { return k < e.start_key; });
    if (it == table_.begin()) return {};
    --it;
    if (key < it->end_key) return {true, it->ipv};
    return {};
}

bool StreamGate::consume_budget(uint64_t frame_bytes) {
    if (!cfg_.octets_exceeded_enabled) return true;
    if (frame_bytes > remaining_octets_) {
        permanently_closed_ = true;
        return false;
    }
    remaining_octets_ -= frame_bytes;
    return true;
}

}  // namespace psfp
