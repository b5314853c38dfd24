#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "psfp/bridge.hpp"
#include "psfp/control_sync.hpp"
#include "psfp/flow_meter.hpp"
#include "psfp/scheduler.hpp"
#include "psfp/stream_filter.hpp"

namespace psfp {

struct SourceConfig {
    std::string name;
    uint32_t id = 0;  // assigned in file order
    uint32_t port = 0;
    uint64_t rate_bps = 0;
    uint32_t frame_bytes = 0;
    Timestamp48 start_ns = 0;
    Timestamp48 stop_ns = 0;
    bool has_vlan = false;
    uint16_t vid = 0;
    uint8_t pcp = 0;
    bool dei = false;
    uint64_t eth_src = 0;
    uint64_t eth_dst = 0;
    std::optional<IpFields> ip;
    bool measure_latency = false;
};

struct LinkConfig {
    uint64_t capacity_bps = 0;
    uint64_t queue_limit_bytes = 0;  // waiting bytes, excluding the frame in service
};

struct ControlEvent {
    enum class Kind : uint8_t {
        SetDelta,
        SetDropOnYellow,
        SetMarkAllRed,
        SetColorMode,
        ResetStreamBlock,
        ResetGateClose,
        ResetMeterBlock,
    };
    Timestamp48 time_ns = 0;
    Kind kind = Kind::SetDelta;
    uint32_t target = 0;  // port, meter, gate or stream handle, per kind
    int64_t delta_ns = 0;
    bool flag = false;
    ColorMode color_mode = ColorMode::Blind;
};

struct RunConfig {
    Duration duration_ns = 0;
    Duration bin_ns = 0;
    uint64_t seed = 0;
};

// A fully validated and compiled experiment description: every static check
// has passed, gate tables are expanded, and the run can no longer fail
// validation.
struct CompiledScenario {
    std::string name;
    TruncationWindow window;
    RunConfig run;
    std::vector<PortConfig> ports;
    FilterTable filter;
    std::vector<StreamGateConfig> gates;
    std::map<uint32_t, TrTcmConfig> meters;
    std::vector<SourceConfig> sources;
    std::optional<LinkConfig> link;
    std::vector<ControlEvent> control_events;
    SyncConfig sync;
    std::string compile_report;
};

struct ValidationIssue {
    std::string where;  // JSON path of the offending element
    std::string code;
    std::string message;
};

struct LoadResult {
    std::optional<CompiledScenario> scenario;
    std::vector<ValidationIssue> issues;

    bool ok() const { return scenario.has_value(); }
};

inline constexpr uint32_t kDefaultGateEntryLimit = 2048;
inline constexpr uint64_t kDefaultRateScale = 1000;

// Parses, validates and compiles a scenario document. rate_scale divides all
// bit rates (source rates, link capacity, CIR/EIR); byte quantities and
// durations are untouched. On any validation issue no scenario is produced.
LoadResult load_scenario(const nlohmann::json& doc, uint64_t rate_scale);
LoadResult load_scenario_file(const std::string& path, uint64_t rate_scale);

std::string format_issues(const std::vector<ValidationIssue>& issues);

uint64_t parse_mac(const std::string& s);   // throws std::invalid_argument
uint32_t parse_ipv4(const std::string& s);  // throws std::invalid_argument

}  // namespace psfp
