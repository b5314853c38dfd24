#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "psfp/time48.hpp"

namespace psfp {

// Signed offset as the data plane sees it: the control plane determines the
// sign and pushes magnitude and sign separately, magnitude already reduced
// modulo the port's hyperperiod.
struct DeltaOffset {
    bool negative = false;
    uint64_t magnitude = 0;
};

DeltaOffset make_delta_offset(int64_t delta_ns, Duration hyperperiod);

struct RelativePosition {
    Duration value = 0;
    bool used_fallback = false;  // tick jitter or 48-bit wrap exceeded h
};

// Maps an absolute arrival timestamp to its position within the hyperperiod,
// given the stored timestamp of the last hyperperiod tick. The plain wrapped
// subtraction covers the common case; results >= h (late ticks, wrap) fall
// back to full modular reduction so the result is always < h.
RelativePosition relative_position(Timestamp48 t_i, Timestamp48 t_jh, Duration h);

// (t_rel + delta) mod h, computed branch-wise the way the data plane does:
// separate paths for no-overflow, overflow (sum >= h) and underflow
// (|delta| > t_rel). Requires t_rel < h and delta.magnitude < h.
Duration apply_delta(Duration t_rel, const DeltaOffset& delta, Duration h);

// One open time slice of an extended stream GCL, as absolute offsets within
// the hyperperiod. Closed slices are the gaps in between.
struct GateSlice {
    uint64_t start_ns = 0;  // inclusive
    uint64_t end_ns = 0;    // exclusive; start < end <= h
    std::optional<uint8_t> ipv;  // egress-queue override; absent => use PCP
};

struct StreamGateConfig {
    uint32_t gate_id = 0;
    uint32_t port = 0;
    Duration hyperperiod_ns = 0;
    std::vector<GateSlice> open_entries;  // disjoint, sorted by start
    bool invalid_rx_enabled = false;
    bool octets_exceeded_enabled = false;
    std::optional<uint64_t> octet_budget_bytes;  // per gate per hyperperiod
};

// A stream gate instance: the range-match table over truncated slice keys
// plus the permanent-close and octet-budget registers.
class StreamGate {
public:
    StreamGate(StreamGateConfig cfg, const TruncationWindow& window);

    struct Decision {
        bool open = false;
        std::optional<uint8_t> ipv;
    };

    // Range match of the truncated relative position against the truncated
    // open entries. Pure slice membership; the permanent-close register is
    // checked separately so the drop reason stays distinguishable.
    Decision decide(Duration t_rel_adj) const;

    bool permanently_closed() const { return permanently_closed_; }

    // A frame arrived in a closed slice; closes the gate permanently when
    // GateClosedDueToInvalidRX is enabled.
    void note_closed_arrival() {
        if (cfg_.invalid_rx_enabled) permanently_closed_ = true;
    }

    // Octet budget register. Returns false when the frame does not fit, in
    // which case the frame is dropped and the gate permanently closed.
    // No-op (true) unless GateClosedDueToOctetsExceeded is enabled.
    bool consume_budget(uint64_t frame_bytes);

    // Hyperperiod tick: refill the octet budget register.
    void on_tick() { remaining_octets_ = cfg_.octet_budget_bytes.value_or(0); }

    // Control-plane reset of the permanent-close register.
    void reset_close() { permanently_closed_ = false; }

    uint64_t remaining_octets() const { return remaining_octets_; }
    const StreamGateConfig& config() const { return cfg_; }

private:
    struct TruncatedEntry {
        uint32_t start_key;  // inclusive
        uint32_t end_key;    // exclusive
        std::optional<uint8_t> ipv;
    };

    StreamGateConfig cfg_;
    TruncationWindow window_;
    std::vector<TruncatedEntry> table_;
    bool permanently_closed_ = false;
    uint64_t remaining_octets_ = 0;
};

}  // namespace psfp
