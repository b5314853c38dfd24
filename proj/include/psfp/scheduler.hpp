#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psfp/stream_gate.hpp"
#include "psfp/time48.hpp"

namespace psfp {

// One slice of a per-stream gate control list, in relative time steps.
struct GclSlice {
    Duration duration_ns = 0;
    bool open = false;
    std::optional<uint8_t> ipv;
    std::optional<uint64_t> octet_budget_bytes;
};

struct StreamGclSpec {
    uint32_t gate_id = 0;
    Duration period_ns = 0;  // must equal the sum of slice durations
    std::vector<GclSlice> slices;
    bool invalid_rx_enabled = false;
    bool octets_exceeded_enabled = false;
};

enum class ScheduleErrorCode {
    HyperperiodOutOfRange,
    EntryBudgetExceeded,
    BoundaryGranularity,
    BadSlice,
};

const char* to_string(ScheduleErrorCode code);

struct ScheduleError : std::runtime_error {
    ScheduleError(ScheduleErrorCode c, const std::string& msg)
        : std::runtime_error(msg), code(c) {}
    ScheduleErrorCode code;
};

// LCM of all stream GCL periods on a port. Fails with HyperperiodOutOfRange
// when the result leaves the resolution window of the truncation
// configuration: [granularity, 2^(low_bit+20)] ns.
Duration hyperperiod(std::span<const Duration> periods, const TruncationWindow& window);

struct ExpandedGcl {
    std::vector<GateSlice> open_entries;  // disjoint, sorted, within [0, h)
    // Sum of per-slice octet budgets over all repetitions; the per-hyperperiod
    // value the gate's budget register is reset to at each tick.
    std::optional<uint64_t> octet_budget_bytes;
};

// Extends a stream GCL to the hyperperiod: repeats the slice pattern
// h / period times, keeps the open slices as absolute [start, end) offsets,
// and merges entries that become adjacent across repetition boundaries
// (only when their IPV agrees). Requires h to be a multiple of the period.
ExpandedGcl expand(const StreamGclSpec& spec, Duration h);

// Validates slice durations and boundary granularity for one GCL.
// Boundaries must be multiples of the truncation granularity; finer
// boundaries are rejected rather than silently rounded.
void validate_gcl(const StreamGclSpec& spec, const TruncationWindow& window);

struct CompiledPort {
    uint32_t port = 0;
    Duration hyperperiod_ns = 0;
    std::vector<StreamGateConfig> gates;
};

// Compiles all stream GCLs of one ingress port into gate configurations
// sharing the port hyperperiod.
CompiledPort compile_port(uint32_t port, std::span<const StreamGclSpec> specs,
                          const TruncationWindow& window);

// Human-readable compilation report for one port.
std::string describe(const CompiledPort& port);

}  // namespace psfp
