#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "psfp/flow_meter.hpp"
#include "psfp/frame.hpp"
#include "psfp/stream_filter.hpp"
#include "psfp/stream_gate.hpp"
#include "psfp/time48.hpp"

namespace psfp {

enum class DropReason : uint8_t {
    MaxSdu = 0,
    StreamBlocked,
    GateClosed,
    GatePermanentlyClosed,
    OctetsExceeded,
    MeterRed,
    MeterBlocked,
    Yellow,
};

inline constexpr int kDropReasonCount = 8;

const char* to_string(DropReason reason);

enum class OutcomeKind : uint8_t { Forward, BestEffort, Drop, Recirculate };

struct ProcessResult {
    OutcomeKind kind = OutcomeKind::Drop;
    std::optional<DropReason> reason;
    std::optional<Color> color;        // final color, when the meter ran
    uint8_t priority = 0;              // IPV when the slice carries one, else PCP
    bool dei_out = false;              // DEI on egress
    Timestamp48 recirc_arrival = 0;    // second-pass arrival, kind == Recirculate
    int64_t stream_handle = -1;        // -1 when unidentified
    uint64_t t_rel_adj = 0;
};

struct TickJitter {
    enum class Kind : uint8_t { None, Constant, Uniform } kind = Kind::None;
    int64_t ns = 0;  // constant per-tick drift, or uniform bound [-ns, +ns]
};

struct PortConfig {
    uint32_t port_id = 0;
    bool has_ticks = false;
    Duration hyperperiod_ns = 0;
    Timestamp48 tick_phase = 0;  // time of the first tick
    TickJitter jitter;
    Duration recirc_delay_ns = 1000;
};

// The per-port periodic trigger supports at most this many distinct
// hyperperiods on one switch.
inline constexpr int kMaxTickPorts = 8;

// Tick times tick_phase + k*h (mod 2^48) up to `until`, with the configured
// jitter accumulating tick over tick.
std::vector<Timestamp48> schedule_ticks(const PortConfig& port, Timestamp48 until,
                                        std::mt19937_64& rng);

struct BridgeCounters {
    uint64_t ingested = 0;      // first-pass arrivals
    uint64_t forwarded = 0;     // passed all PSFP conditions
    uint64_t best_effort = 0;   // no VLAN tag or filter miss
    std::array<uint64_t, kDropReasonCount> drops{};
    uint64_t recirc_in_flight = 0;
    uint64_t recirc_leg_bytes = 0;  // bytes on the recirculation leg, incl. header
    uint64_t relpos_fallbacks = 0;  // relative_position needed the modular fallback

    uint64_t dropped_total() const {
        uint64_t n = 0;
        for (uint64_t d : drops) n += d;
        return n;
    }
    // Ingested frames are always accounted for: forwarded, best-effort,
    // dropped with a reason, or still on the recirculation leg.
    bool conserved() const {
        return ingested == forwarded + best_effort + dropped_total() + recirc_in_flight;
    }
};

struct TraceRecord {
    Timestamp48 ts = 0;
    uint32_t port = 0;
    int64_t stream_handle = -1;
    OutcomeKind outcome = OutcomeKind::Drop;
    std::optional<DropReason> reason;
    std::optional<Color> color;
    uint8_t priority = 0;
    uint32_t size_bytes = 0;
    uint64_t t_rel_adj = 0;
};

// The PSFP pipeline of one switch: per-port hyperperiod registers and delta
// tables, the stream filter table, stream gate and flow meter instances, and
// the two-pass recirculation model. Single-threaded; driven by the event loop.
class Bridge {
public:
    Bridge(std::vector<PortConfig> ports, FilterTable filter,
           std::vector<StreamGateConfig> gates, std::map<uint32_t, TrTcmConfig> meters,
           TruncationWindow window);

    // One pipeline pass for a frame delivered at `now` (== frame.arrival on
    // the first pass). First pass of a tagged frame computes the delta-adjusted
    // relative position, attaches the recirculation header and asks the caller
    // to redeliver the frame at recirc_arrival. The second pass runs the
    // filter -> gate -> meter chain; the first failed condition drops the
    // frame with that reason. Untagged frames and filter misses are
    // best-effort and leave PSFP state untouched.
    ProcessResult process(Frame& frame, Timestamp48 now);

    // Hyperperiod tick for a port: store the timestamp register and reset the
    // octet budget registers of the port's gates.
    void on_tick(uint32_t port, Timestamp48 t);

    // Atomic replacement of a port's (sign, magnitude) delta pair; reduced
    // modulo the port hyperperiod first. Affects frames whose first pass
    // happens after this call.
    void set_delta(uint32_t port, int64_t delta_ns);

    const BridgeCounters& counters() const { return counters_; }
    const PortConfig& port_config(uint32_t port) const;
    Duration port_hyperperiod(uint32_t port) const;
    std::optional<Timestamp48> last_tick(uint32_t port) const;
    std::optional<Timestamp48> first_tick(uint32_t port) const;
    DeltaOffset delta(uint32_t port) const;
    bool delta_negative(uint32_t port) const;

    FilterTable& filter() { return filter_; }
    StreamGate* gate(uint32_t gate_id);
    TrTcm* meter(uint32_t meter_id);
    const std::vector<uint32_t>& tick_ports() const { return tick_ports_; }

    void set_trace_sink(std::function<void(const TraceRecord&)> sink) {
        trace_sink_ = std::move(sink);
    }

private:
    struct PortRuntime {
        PortConfig cfg;
        std::optional<Timestamp48> last_tick;
        std::optional<Timestamp48> first_tick;
        DeltaOffset delta;
        std::vector<StreamGate*> gates;  // gates on this port, id order
    };

    ProcessResult first_pass(Frame& frame, Timestamp48 now, PortRuntime& port);
    ProcessResult second_pass(Frame& frame, Timestamp48 now);
    void emit_trace(const Frame& frame, Timestamp48 now, const ProcessResult& r);

    std::map<uint32_t, PortRuntime> ports_;
    std::vector<uint32_t> tick_ports_;
    FilterTable filter_;
    std::map<uint32_t, StreamGate> gates_;
    std::map<uint32_t, TrTcm> meters_;
    TruncationWindow window_;
    BridgeCounters counters_;
    std::function<void(const TraceRecord&)> trace_sink_;
};

}  // namespace psfp
