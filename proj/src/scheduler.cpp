#include "psfp/scheduler.hpp"

#include <numeric>
#include <sstream>

namespace psfp {

namespace {
using u128 = unsigned __int128;
}

const char* to_string(ScheduleErrorCode code) {
    switch (code) {
        case ScheduleErrorCode::HyperperiodOutOfRange: return "HyperperiodOutOfRange";
        case ScheduleErrorCode::EntryBudgetExceeded: return "EntryBudgetExceeded";
        case ScheduleErrorCode::BoundaryGranularity: return "BoundaryGranularity";
        case ScheduleErrorCode::BadSlice: return "BadSlice";
    }
    return "?";
}

Duration hyperperiod(std::span<const Duration> periods, const TruncationWindow& window) {
    if (periods.empty()) {
        throw ScheduleError(ScheduleErrorCode::BadSlice, "no GCL periods given");
    }
    u128 lcm = 1;
    for (Duration p : periods) {
        if (p == 0) throw ScheduleError(ScheduleErrorCode::BadSlice, "zero GCL period");
        lcm = lcm / std::gcd(static_cast<uint64_t>(lcm % p), p) * p;
        if (lcm > window.span()) {
            std::ostringstream os;
            os << "hyperperiod exceeds the " << window.span()
               << " ns span of the truncation window (low_bit " << window.low_bit << ")";
            throw ScheduleError(ScheduleErrorCode::HyperperiodOutOfRange, os.str());
        }
    }
    if (lcm < window.granularity()) {
        throw ScheduleError(ScheduleErrorCode::HyperperiodOutOfRange,
                            "hyperperiod below the truncation granularity");
    }
    return static_cast<Duration>(lcm);
}

void validate_gcl(const StreamGclSpec& spec, const TruncationWindow& window) {
    if (spec.slices.empty()) {
        throw ScheduleError(ScheduleErrorCode::BadSlice, "GCL has no slices");
    }
    uint64_t granule = window.granularity();
    uint64_t offset = 0;
    for (const GclSlice& s : spec.slices) {
        if (s.duration_ns == 0) {
            throw ScheduleError(ScheduleErrorCode::BadSlice, "zero-duration GCL slice");
        }
        offset += s.duration_ns;
        if (offset % granule != 0) {
            std::ostringstream os;
            os << "slice boundary at " << offset << " ns is not a multiple of the "
               << granule << " ns truncation granularity";
            throw ScheduleError(ScheduleErrorCode::BoundaryGranularity, os.str());
        }
    }
    if (offset != spec.period_ns) {
        std::ostringstream os;
        os << "slice durations sum to " << offset << " ns, period is "
           << spec.period_ns << " ns";
        throw ScheduleError(ScheduleErrorCode::BadSlice, os.str());
    }
}

ExpandedGcl expand(const StreamGclSpec& spec, Duration h) {
    if (spec.period_ns == 0 || h % spec.period_ns != 0) {
        throw ScheduleError(ScheduleErrorCode::BadSlice,
                            "hyperperiod is not a multiple of the GCL period");
    }
    ExpandedGcl out;
    uint64_t repetitions = h / spec.period_ns;
    u128 budget = 0;
    bool has_budget = false;
    for (uint64_t rep = 0; rep < repetitions; ++rep) {
        uint64_t base = rep * spec.period_ns;
        uint64_t offset = 0;
        for (const GclSlice& s : spec.slices) {
            uint64_t start = base + offset;
            offset += s.duration_ns;
            if (!s.open) continue;
            if (s.octet_budget_bytes) {
                has_budget = true;
                budget += *s.octet_budget_bytes;
            }
            if (!out.open_entries.empty()) {
                GateSlice& last = out.open_entries.back();
                if (last.end_ns == start && last.ipv == s.ipv) {
                    last.end_ns = base + offset;
                    continue;
                }
            }
            out.open_entries.push_back({start, base + offset, s.ipv});
        }
    }
    if (has_budget) out.octet_budget_bytes = static_cast<uint64_t>(budget);
    return out;
}

CompiledPort compile_port(uint32_t port, std::span<const StreamGclSpec> specs,
                          const TruncationWindow& window) {
    std::vector<Duration> periods;
    periods.reserve(specs.size());
    for (const StreamGclSpec& spec : specs) {
        validate_gcl(spec, window);
        periods.push_back(spec.period_ns);
    }
    CompiledPort out;
    out.port = port;
    out.hyperperiod_ns = hyperperiod(periods, window);
    for (const StreamGclSpec& spec : specs) {
        ExpandedGcl expanded = expand(spec, out.hyperperiod_ns);
        StreamGateConfig cfg;
        cfg.gate_id = spec.gate_id;
        cfg.port = port;
        cfg.hyperperiod_ns = out.hyperperiod_ns;
        cfg.open_entries = std::move(expanded.open_entries);
        cfg.invalid_rx_enabled = spec.invalid_rx_enabled;
        cfg.octets_exceeded_enabled = spec.octets_exceeded_enabled;
        cfg.octet_budget_bytes = expanded.octet_budget_bytes;
        out.gates.push_back(std::move(cfg));
    }
    return out;
}

std::string describe(const CompiledPort& port) {
    std::ostringstream os;
    os << "port " << port.port << ": hyperperiod " << port.hyperperiod_ns << " ns\n";
    for (const StreamGateConfig& g : port.gates) {
        uint64_t open_ns = 0;
        for (const GateSlice& s : g.open_entries) open_ns += s.end_ns - s.start_ns;
        os << "  gate " << g.gate_id << ": " << g.open_entries.size()
           << " open entries, open " << open_ns << "/" << g.hyperperiod_ns << " ns";
        if (g.octet_budget_bytes) os << ", octet budget " << *g.octet_budget_bytes << " B";
        os << "\n";
    }
    return os.str();
}

}  // namespace psfp
