#include "psfp/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace psfp {

using nlohmann::json;

uint64_t parse_mac(const std::string& s) {
    unsigned int b[6];
    char tail = 0;
    if (std::sscanf(s.c_str(), "%2x:%2x:%2x:%2x:%2x:%2x%c", &b[0], &b[1], &b[2], &b[3],
                    &b[4], &b[5], &tail) != 6) {
        throw std::invalid_argument("bad MAC address '" + s + "'");
    }
    uint64_t v = 0;
    for (int i = 0; i < 6; ++i) v = (v << 8) | b[i];
    return v;
}

uint32_t parse_ipv4(const std::string& s) {
    unsigned int b[4];
    char tail = 0;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &b[0], &b[1], &b[2], &b[3], &tail) != 4 ||
        b[0] > 255 || b[1] > 255 || b[2] > 255 || b[3] > 255) {
        throw std::invalid_argument("bad IPv4 address '" + s + "'");
    }
    return (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3];
}

std::string format_issues(const std::vector<ValidationIssue>& issues) {
    std::ostringstream os;
    for (const ValidationIssue& i : issues) {
        os << i.where << ": [" << i.code << "] " << i.message << "\n";
    }
    return os.str();
}

namespace {

// Collects validation issues while walking the document; helpers return
// defaults after recording an issue so the walk can continue and report
// everything in one pass.
struct Loader {
    const json& doc;
    uint64_t rate_scale;
    std::vector<ValidationIssue> issues;
    CompiledScenario out;

    void fail(const std::string& where, const std::string& code,
              const std::string& message) {
        issues.push_back({where, code, message});
    }

    const json* get(const json& j, const std::string& where, const char* key,
                    bool required) {
        if (!j.is_object()) {
            fail(where, "type", "expected an object");
            return nullptr;
        }
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) fail(where, "missing_field", std::string("missing '") + key + "'");
            return nullptr;
        }
        return &*it;
    }

    uint64_t get_u64(const json& j, const std::string& where, const char* key,
                     bool required, uint64_t def = 0) {
        const json* v = get(j, where, key, required);
        if (!v) return def;
        if (!v->is_number_unsigned()) {
            fail(where + "." + key, "type", "expected a non-negative integer");
            return def;
        }
        return v->get<uint64_t>();
    }

    int64_t get_i64(const json& j, const std::string& where, const char* key,
                    bool required, int64_t def = 0) {
        const json* v = get(j, where, key, required);
        if (!v) return def;
        if (!v->is_number_integer()) {
            fail(where + "." + key, "type", "expected an integer");
            return def;
        }
        return v->get<int64_t>();
    }

    bool get_bool(const json& j, const std::string& where, const char* key,
                  bool required, bool def = false) {
        const json* v = get(j, where, key, required);
        if (!v) return def;
        if (!v->is_boolean()) {
            fail(where + "." + key, "type", "expected a boolean");
            return def;
        }
        return v->get<bool>();
    }

    std::string get_str(const json& j, const std::string& where, const char* key,
                        bool required, const std::string& def = "") {
        const json* v = get(j, where, key, required);
        if (!v) return def;
        if (!v->is_string()) {
            fail(where + "." + key, "type", "expected a string");
            return def;
        }
        return v->get<std::string>();
    }

    uint64_t scaled_rate(uint64_t bps) { return bps / rate_scale; }

    void check_keys(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
        if (!j.is_object()) return;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!allowed.count(it.key())) {
                fail(where + "." + it.key(), "unknown_field",
                     "field not allowed here");
            }
        }
    }

    void load();
    void load_run();
    void load_ports(std::map<uint32_t, PortConfig>& ports);
    void load_gates(std::map<uint32_t, PortConfig>& ports,
                    std::map<uint32_t, uint32_t>& gate_port);
    void load_meters();
    void load_filter(const std::map<uint32_t, uint32_t>& gate_port);
    void load_sources(const std::map<uint32_t, PortConfig>& ports,
                      const std::map<uint32_t, uint32_t>& gate_port);
    void load_link();
    void load_control_events(const std::map<uint32_t, PortConfig>& ports);
    void load_sync(const std::map<uint32_t, PortConfig>& ports);

    TernaryField ternary(const json& j, const std::string& where, const char* key,
                         bool exact_required, uint64_t width_mask,
                         bool mac_format);
};

TernaryField Loader::ternary(const json& j, const std::string& where, const char* key,
                             bool exact_required, uint64_t width_mask, bool mac_format) {
    std::string mask_key = std::string(key) + "_mask";
    const json* v = get(j, where, key, exact_required);
    TernaryField f;
    if (!v) {
        if (j.is_object() && j.contains(mask_key)) {
            fail(where + "." + mask_key, "semantic", "mask given without a value");
        }
        return f;  // wildcard
    }
    auto parse_one = [&](const json& x, const std::string& w) -> uint64_t {
        try {
            if (x.is_string()) {
                return mac_format ? parse_mac(x.get<std::string>())
                                  : parse_ipv4(x.get<std::string>());
            }
            if (x.is_number_unsigned()) return x.get<uint64_t>();
        } catch (const std::invalid_argument& e) {
            fail(w, "parse", e.what());
            return 0;
        }
        fail(w, "type", "expected a number or address string");
        return 0;
    };
    f.value = parse_one(*v, where + "." + key);
    f.mask = width_mask;  // value without mask: exact
    if (j.is_object() && j.contains(mask_key)) {
        if (exact_required) {
            fail(where + "." + mask_key, "semantic",
                 "mask not allowed on an exact-match field");
        } else {
            f.mask = parse_one(j.at(mask_key), where + "." + mask_key) & width_mask;
        }
    }
    if ((f.value & ~width_mask) != 0) {
        fail(where + "." + key, "range", "value does not fit the field width");
    }
    f.value &= width_mask;
    return f;
}

void Loader::load_run() {
    const json* run = get(doc, "$", "run", true);
    if (!run) return;
    check_keys(*run, "run", {"duration_ns", "bin_ns", "seed"});
    out.run.duration_ns = get_u64(*run, "run", "duration_ns", true);
    out.run.bin_ns = get_u64(*run, "run", "bin_ns", true);
    out.run.seed = get_u64(*run, "run", "seed", false, 1);
    if (out.run.duration_ns == 0) {
        fail("run.duration_ns", "range", "duration must be positive");
    } else if (out.run.bin_ns == 0 || out.run.duration_ns % out.run.bin_ns != 0) {
        fail("run.bin_ns", "range", "bin width must divide the run duration");
    }
    if (out.run.duration_ns > kTimestampMax) {
        fail("run.duration_ns", "range", "duration exceeds the 48-bit timestamp range");
    }
}

void Loader::load_ports(std::map<uint32_t, PortConfig>& ports) {
    const json* arr = get(doc, "$", "ports", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("ports", "type", "expected an array");
        return;
    }
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& p = (*arr)[i];
        std::string where = "ports[" + std::to_string(i) + "]";
        check_keys(p, where, {"id", "tick_phase_ns", "recirc_delay_ns", "tick_jitter"});
        PortConfig cfg;
        cfg.port_id = static_cast<uint32_t>(get_u64(p, where, "id", true));
        cfg.tick_phase = get_u64(p, where, "tick_phase_ns", false, 0) & kTimestampMask;
        cfg.recirc_delay_ns = get_u64(p, where, "recirc_delay_ns", false, 1000);
        if (const json* jit = get(p, where, "tick_jitter", false)) {
            check_keys(*jit, where + ".tick_jitter", {"mode", "ns"});
            std::string mode = get_str(*jit, where + ".tick_jitter", "mode", true);
            if (mode == "constant") {
                cfg.jitter.kind = TickJitter::Kind::Constant;
            } else if (mode == "uniform") {
                cfg.jitter.kind = TickJitter::Kind::Uniform;
            } else if (mode == "none") {
                cfg.jitter.kind = TickJitter::Kind::None;
            } else {
                fail(where + ".tick_jitter.mode", "value",
                     "expected none, constant or uniform");
            }
            cfg.jitter.ns = get_i64(*jit, where + ".tick_jitter", "ns", false, 0);
            if (cfg.jitter.kind == TickJitter::Kind::Uniform && cfg.jitter.ns < 0) {
                fail(where + ".tick_jitter.ns", "range",
                     "uniform jitter bound must be non-negative");
            }
        }
        if (!ports.emplace(cfg.port_id, cfg).second) {
            fail(where + ".id", "duplicate", "duplicate port id");
        }
    }
}

void Loader::load_gates(std::map<uint32_t, PortConfig>& ports,
                        std::map<uint32_t, uint32_t>& gate_port) {
    const json* arr = get(doc, "$", "gates", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("gates", "type", "expected an array");
        return;
    }
    std::map<uint32_t, std::vector<StreamGclSpec>> per_port;
    std::map<uint32_t, std::vector<std::string>> per_port_where;
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& g = (*arr)[i];
        std::string where = "gates[" + std::to_string(i) + "]";
        check_keys(g, where,
                   {"id", "port", "period_ns", "slices", "invalid_rx", "octets_exceeded"});
        StreamGclSpec spec;
        spec.gate_id = static_cast<uint32_t>(get_u64(g, where, "id", true));
        uint32_t port = static_cast<uint32_t>(get_u64(g, where, "port", true));
        spec.period_ns = get_u64(g, where, "period_ns", true);
        spec.invalid_rx_enabled = get_bool(g, where, "invalid_rx", false);
        spec.octets_exceeded_enabled = get_bool(g, where, "octets_exceeded", false);
        const json* slices = get(g, where, "slices", true);
        if (slices && slices->is_array()) {
            for (size_t k = 0; k < slices->size(); ++k) {
                const json& s = (*slices)[k];
                std::string swhere = where + ".slices[" + std::to_string(k) + "]";
                check_keys(s, swhere,
                           {"duration_ns", "state", "ipv", "octet_budget_bytes"});
                GclSlice slice;
                slice.duration_ns = get_u64(s, swhere, "duration_ns", true);
                std::string state = get_str(s, swhere, "state", true);
                if (state == "open") {
                    slice.open = true;
                } else if (state == "closed") {
                    slice.open = false;
                } else {
                    fail(swhere + ".state", "value", "expected open or closed");
                }
                if (s.is_object() && s.contains("ipv")) {
                    uint64_t ipv = get_u64(s, swhere, "ipv", false);
                    if (ipv > 7) fail(swhere + ".ipv", "range", "IPV is 3 bits");
                    slice.ipv = static_cast<uint8_t>(ipv & 7);
                }
                if (s.is_object() && s.contains("octet_budget_bytes")) {
                    slice.octet_budget_bytes = get_u64(s, swhere, "octet_budget_bytes", false);
                }
                spec.slices.push_back(slice);
            }
        } else if (slices) {
            fail(where + ".slices", "type", "expected an array");
        }
        if (!gate_port.emplace(spec.gate_id, port).second) {
            fail(where + ".id", "duplicate", "duplicate gate id");
        }
        if (spec.octets_exceeded_enabled &&
            std::none_of(spec.slices.begin(), spec.slices.end(),
                         [](const GclSlice& s) { return s.octet_budget_bytes.has_value(); })) {
            fail(where, "semantic",
                 "octets_exceeded requires an octet_budget_bytes on some slice");
        }
        per_port[port].push_back(std::move(spec));
        per_port_where[port].push_back(where);
    }

    uint32_t entry_limit = static_cast<uint32_t>(
        get_u64(doc, "$", "gate_entry_limit", false, kDefaultGateEntryLimit));
    uint64_t total_entries = 0;
    for (auto& [port, specs] : per_port) {
        ports.try_emplace(port, PortConfig{port, false, 0, 0, {}, 1000});
        try {
            CompiledPort compiled =
                compile_port(port, std::span<const StreamGclSpec>(specs), out.window);
            PortConfig& pc = ports.at(port);
            pc.has_ticks = true;
            pc.hyperperiod_ns = compiled.hyperperiod_ns;
            for (StreamGateConfig& g : compiled.gates) {
                total_entries += g.open_entries.size();
                out.gates.push_back(std::move(g));
            }
            out.compile_report += describe(compiled);
        } catch (const ScheduleError& e) {
            fail(per_port_where[port].front(), to_string(e.code), e.what());
        }
    }
    if (total_entries > entry_limit) {
        fail("gates", "EntryBudgetExceeded",
             "gate table needs " + std::to_string(total_entries) +
                 " open entries, limit is " + std::to_string(entry_limit));
    }
    std::sort(out.gates.begin(), out.gates.end(),
              [](const StreamGateConfig& a, const StreamGateConfig& b) {
                  return a.gate_id < b.gate_id;
              });
}

void Loader::load_meters() {
    const json* arr = get(doc, "$", "meters", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("meters", "type", "expected an array");
        return;
    }
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& m = (*arr)[i];
        std::string where = "meters[" + std::to_string(i) + "]";
        check_keys(m, where,
                   {"id", "cir_bps", "eir_bps", "cbs_bytes", "ebs_bytes", "color_mode",
                    "drop_on_yellow", "mark_all_red"});
        uint32_t id = static_cast<uint32_t>(get_u64(m, where, "id", true));
        TrTcmConfig cfg;
        cfg.cir_bps = scaled_rate(get_u64(m, where, "cir_bps", true));
        cfg.eir_bps = scaled_rate(get_u64(m, where, "eir_bps", true));
        cfg.cbs_bytes = get_u64(m, where, "cbs_bytes", true);
        cfg.ebs_bytes = get_u64(m, where, "ebs_bytes", true);
        cfg.drop_on_yellow = get_bool(m, where, "drop_on_yellow", false);
        cfg.mark_all_red = get_bool(m, where, "mark_all_red", false);
        std::string mode = get_str(m, where, "color_mode", false, "blind");
        if (mode == "blind") {
            cfg.color_mode = ColorMode::Blind;
        } else if (mode == "aware") {
            cfg.color_mode = ColorMode::Aware;
        } else {
            fail(where + ".color_mode", "value", "expected blind or aware");
        }
        constexpr uint64_t kMaxBurst = uint64_t{1} << 30;  // keeps token units in range
        if (cfg.cbs_bytes > kMaxBurst || cfg.ebs_bytes > kMaxBurst) {
            fail(where, "range", "burst sizes above 1 GiB are not supported");
        }
        if (!out.meters.emplace(id, cfg).second) {
            fail(where + ".id", "duplicate", "duplicate meter id");
        }
    }
}

void Loader::load_filter(const std::map<uint32_t, uint32_t>& gate_port) {
    if (const json* lim = get(doc, "$", "filter_limits", false)) {
        check_keys(*lim, "filter_limits",
                   {"null_stream", "source_mac", "ip_ternary", "ip_exact"});
        FilterCapacityLimits limits;
        const char* names[] = {"null_stream", "source_mac", "ip_ternary", "ip_exact"};
        for (int k = 0; k < kStreamIdKindCount; ++k) {
            if (lim->contains(names[k])) {
                limits.per_kind[k] =
                    static_cast<uint32_t>(get_u64(*lim, "filter_limits", names[k], false));
            }
        }
        out.filter = FilterTable(limits);
    }
    const json* arr = get(doc, "$", "filter_table", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("filter_table", "type", "expected an array");
        return;
    }
    constexpr uint64_t kMac = (uint64_t{1} << 48) - 1;
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& e = (*arr)[i];
        std::string where = "filter_table[" + std::to_string(i) + "]";
        StreamFilterEntry entry;
        std::string kind = get_str(e, where, "kind", true);
        std::set<std::string> allowed = {"kind",          "stream_handle",
                                         "gate",          "meter",
                                         "max_sdu_bytes", "max_sdu_exceeded",
                                         "vlan_id"};
        if (kind == "null_stream") {
            entry.key.kind = StreamIdKind::NullStream;
            allowed.insert("eth_dst");
            entry.key.eth_dst = ternary(e, where, "eth_dst", true, kMac, true);
        } else if (kind == "source_mac") {
            entry.key.kind = StreamIdKind::SourceMac;
            allowed.insert({"eth_src", "eth_dst", "eth_dst_mask"});
            entry.key.eth_src = ternary(e, where, "eth_src", true, kMac, true);
            entry.key.eth_dst = ternary(e, where, "eth_dst", false, kMac, true);
        } else if (kind == "ip_ternary") {
            entry.key.kind = StreamIdKind::IpTernary;
            allowed.insert({"eth_src", "eth_src_mask", "eth_dst", "eth_dst_mask",
                            "ip_src", "ip_src_mask", "ip_dst", "ip_dst_mask", "dscp",
                            "dscp_mask", "next_protocol", "next_protocol_mask", "l4_src",
                            "l4_src_mask", "l4_dst", "l4_dst_mask"});
            entry.key.eth_src = ternary(e, where, "eth_src", false, kMac, true);
            entry.key.eth_dst = ternary(e, where, "eth_dst", false, kMac, true);
            entry.key.ip_src = ternary(e, where, "ip_src", false, 0xFFFFFFFFull, false);
            entry.key.ip_dst = ternary(e, where, "ip_dst", false, 0xFFFFFFFFull, false);
            entry.key.dscp = ternary(e, where, "dscp", false, 0x3F, false);
            entry.key.next_protocol = ternary(e, where, "next_protocol", false, 0xFF, false);
            entry.key.l4_src = ternary(e, where, "l4_src", false, 0xFFFF, false);
            entry.key.l4_dst = ternary(e, where, "l4_dst", false, 0xFFFF, false);
        } else if (kind == "ip_exact") {
            entry.key.kind = StreamIdKind::IpExact;
            allowed.insert(
                {"eth_dst", "ip_src", "ip_dst", "dscp", "next_protocol", "l4_src", "l4_dst"});
            entry.key.eth_dst = ternary(e, where, "eth_dst", true, kMac, true);
            entry.key.ip_src = ternary(e, where, "ip_src", true, 0xFFFFFFFFull, false);
            entry.key.ip_dst = ternary(e, where, "ip_dst", true, 0xFFFFFFFFull, false);
            entry.key.dscp = ternary(e, where, "dscp", true, 0x3F, false);
            entry.key.next_protocol = ternary(e, where, "next_protocol", true, 0xFF, false);
            entry.key.l4_src = ternary(e, where, "l4_src", true, 0xFFFF, false);
            entry.key.l4_dst = ternary(e, where, "l4_dst", true, 0xFFFF, false);
        } else {
            fail(where + ".kind", "value",
                 "expected null_stream, source_mac, ip_ternary or ip_exact");
            continue;
        }
        check_keys(e, where, allowed);
        uint64_t vid = get_u64(e, where, "vlan_id", true);
        if (vid > 4095) fail(where + ".vlan_id", "range", "VLAN ID is 12 bits");
        entry.key.vlan_id = static_cast<uint16_t>(vid & 0xFFF);
        entry.stream_handle = static_cast<uint32_t>(get_u64(e, where, "stream_handle", true));
        entry.gate_id = static_cast<uint32_t>(get_u64(e, where, "gate", true));
        entry.meter_id = static_cast<uint32_t>(get_u64(e, where, "meter", true));
        if (e.is_object() && e.contains("max_sdu_bytes")) {
            entry.max_sdu_bytes =
                static_cast<uint32_t>(get_u64(e, where, "max_sdu_bytes", false));
        }
        entry.max_sdu_exceeded_enabled = get_bool(e, where, "max_sdu_exceeded", false);
        if (!gate_port.count(entry.gate_id)) {
            fail(where + ".gate", "reference", "unknown gate id");
        }
        if (!out.meters.count(entry.meter_id)) {
            fail(where + ".meter", "reference", "unknown meter id");
        }
        if (auto err = out.filter.add(entry)) {
            fail(where, "capacity", *err);
        }
    }
}

void Loader::load_sources(const std::map<uint32_t, PortConfig>& ports,
                          const std::map<uint32_t, uint32_t>& gate_port) {
    const json* arr = get(doc, "$", "sources", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("sources", "type", "expected an array");
        return;
    }
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& s = (*arr)[i];
        std::string where = "sources[" + std::to_string(i) + "]";
        check_keys(s, where,
                   {"name", "port", "rate_bps", "frame_bytes", "start_ns", "stop_ns",
                    "vlan", "eth_src", "eth_dst", "ip", "measure_latency"});
        SourceConfig src;
        src.id = static_cast<uint32_t>(i);
        src.name = get_str(s, where, "name", false, "source" + std::to_string(i));
        src.port = static_cast<uint32_t>(get_u64(s, where, "port", true));
        src.rate_bps = scaled_rate(get_u64(s, where, "rate_bps", true));
        src.frame_bytes = static_cast<uint32_t>(get_u64(s, where, "frame_bytes", true));
        src.start_ns = get_u64(s, where, "start_ns", false, 0);
        src.stop_ns = get_u64(s, where, "stop_ns", false, out.run.duration_ns);
        src.measure_latency = get_bool(s, where, "measure_latency", false);
        if (src.rate_bps == 0) fail(where + ".rate_bps", "range", "rate must be positive");
        if (src.frame_bytes == 0) {
            fail(where + ".frame_bytes", "range", "frame size must be positive");
        }
        if (src.stop_ns > out.run.duration_ns || src.start_ns >= src.stop_ns) {
            fail(where, "range", "need start_ns < stop_ns <= run.duration_ns");
        }
        try {
            std::string mac = get_str(s, where, "eth_src", false, "02:00:00:00:00:01");
            src.eth_src = parse_mac(mac);
            mac = get_str(s, where, "eth_dst", false, "02:00:00:00:00:02");
            src.eth_dst = parse_mac(mac);
        } catch (const std::invalid_argument& e) {
            fail(where, "parse", e.what());
        }
        if (const json* vlan = get(s, where, "vlan", false)) {
            check_keys(*vlan, where + ".vlan", {"vid", "pcp", "dei"});
            src.has_vlan = true;
            uint64_t vid = get_u64(*vlan, where + ".vlan", "vid", true);
            if (vid > 4095) fail(where + ".vlan.vid", "range", "VLAN ID is 12 bits");
            src.vid = static_cast<uint16_t>(vid & 0xFFF);
            uint64_t pcp = get_u64(*vlan, where + ".vlan", "pcp", false, 0);
            if (pcp > 7) fail(where + ".vlan.pcp", "range", "PCP is 3 bits");
            src.pcp = static_cast<uint8_t>(pcp & 7);
            src.dei = get_bool(*vlan, where + ".vlan", "dei", false);
        }
        if (const json* ip = get(s, where, "ip", false)) {
            check_keys(*ip, where + ".ip",
                       {"src", "dst", "dscp", "next_protocol", "l4_src", "l4_dst"});
            IpFields f;
            try {
                f.src = parse_ipv4(get_str(*ip, where + ".ip", "src", true, "0.0.0.0"));
                f.dst = parse_ipv4(get_str(*ip, where + ".ip", "dst", true, "0.0.0.0"));
            } catch (const std::invalid_argument& e) {
                fail(where + ".ip", "parse", e.what());
            }
            f.dscp = static_cast<uint8_t>(get_u64(*ip, where + ".ip", "dscp", false, 0));
            f.next_protocol =
                static_cast<uint8_t>(get_u64(*ip, where + ".ip", "next_protocol", false, 0));
            f.l4_src = static_cast<uint16_t>(get_u64(*ip, where + ".ip", "l4_src", false, 0));
            f.l4_dst = static_cast<uint16_t>(get_u64(*ip, where + ".ip", "l4_dst", false, 0));
            src.ip = f;
        }
        auto port_it = ports.find(src.port);
        if (port_it == ports.end()) {
            fail(where + ".port", "reference", "unknown port (no gate or port entry)");
        } else if (src.has_vlan && !port_it->second.has_ticks) {
            fail(where + ".port", "semantic",
                 "tagged source on a port without a hyperperiod tick; PSFP frames "
                 "need the port's hyperperiod register");
        }
        // A template that classifies to a gate must stay on that gate's port.
        Frame probe;
        probe.ingress_port = src.port;
        probe.size_bytes = src.frame_bytes;
        probe.has_vlan = src.has_vlan;
        probe.vid = src.vid;
        probe.pcp = src.pcp;
        probe.dei = src.dei;
        probe.eth_src = src.eth_src;
        probe.eth_dst = src.eth_dst;
        probe.ip = src.ip;
        if (const StreamFilterEntry* entry = out.filter.classify(probe)) {
            auto gp = gate_port.find(entry->gate_id);
            if (gp != gate_port.end() && gp->second != src.port) {
                fail(where, "semantic",
                     "source matches stream " + std::to_string(entry->stream_handle) +
                         " whose gate lives on port " + std::to_string(gp->second));
            }
        }
        out.sources.push_back(std::move(src));
    }
    // Meter burst capacities must hold the largest tagged frame.
    uint32_t max_frame = 0;
    for (const SourceConfig& s : out.sources) {
        if (s.has_vlan) max_frame = std::max(max_frame, s.frame_bytes);
    }
    for (const auto& [id, cfg] : out.meters) {
        if (cfg.cbs_bytes < max_frame) {
            fail("meters", "range",
                 "meter " + std::to_string(id) + ": cbs_bytes below the largest frame");
        }
        if (cfg.ebs_bytes != 0 && cfg.ebs_bytes < max_frame) {
            fail("meters", "range",
                 "meter " + std::to_string(id) + ": ebs_bytes below the largest frame");
        }
    }
}

void Loader::load_link() {
    const json* link = get(doc, "$", "link", false);
    if (!link) return;
    check_keys(*link, "link", {"capacity_bps", "queue_limit_bytes"});
    LinkConfig cfg;
    cfg.capacity_bps = scaled_rate(get_u64(*link, "link", "capacity_bps", true));
    cfg.queue_limit_bytes = get_u64(*link, "link", "queue_limit_bytes", true);
    if (cfg.capacity_bps == 0) {
        fail("link.capacity_bps", "range", "capacity must be positive");
    }
    out.link = cfg;
}

void Loader::load_control_events(const std::map<uint32_t, PortConfig>& ports) {
    const json* arr = get(doc, "$", "control_events", false);
    if (!arr) return;
    if (!arr->is_array()) {
        fail("control_events", "type", "expected an array");
        return;
    }
    for (size_t i = 0; i < arr->size(); ++i) {
        const json& e = (*arr)[i];
        std::string where = "control_events[" + std::to_string(i) + "]";
        ControlEvent ev;
        ev.time_ns = get_u64(e, where, "time_ns", true);
        if (ev.time_ns > out.run.duration_ns) {
            fail(where + ".time_ns", "range", "event after the end of the run");
        }
        std::string action = get_str(e, where, "action", true);
        auto need_meter = [&] {
            ev.target = static_cast<uint32_t>(get_u64(e, where, "meter", true));
            if (!out.meters.count(ev.target)) {
                fail(where + ".meter", "reference", "unknown meter id");
            }
        };
        if (action == "set_delta") {
            check_keys(e, where, {"time_ns", "action", "port", "delta_ns"});
            ev.kind = ControlEvent::Kind::SetDelta;
            ev.target = static_cast<uint32_t>(get_u64(e, where, "port", true));
            ev.delta_ns = get_i64(e, where, "delta_ns", true);
            auto it = ports.find(ev.target);
            if (it == ports.end() || !it->second.has_ticks) {
                fail(where + ".port", "reference", "port has no hyperperiod");
            }
        } else if (action == "set_drop_on_yellow") {
            check_keys(e, where, {"time_ns", "action", "meter", "value"});
            ev.kind = ControlEvent::Kind::SetDropOnYellow;
            need_meter();
            ev.flag = get_bool(e, where, "value", true);
        } else if (action == "set_mark_all_red") {
            check_keys(e, where, {"time_ns", "action", "meter", "value"});
            ev.kind = ControlEvent::Kind::SetMarkAllRed;
            need_meter();
            ev.flag = get_bool(e, where, "value", true);
        } else if (action == "set_color_mode") {
            check_keys(e, where, {"time_ns", "action", "meter", "value"});
            ev.kind = ControlEvent::Kind::SetColorMode;
            need_meter();
            std::string mode = get_str(e, where, "value", true);
            if (mode == "blind") {
                ev.color_mode = ColorMode::Blind;
            } else if (mode == "aware") {
                ev.color_mode = ColorMode::Aware;
            } else {
                fail(where + ".value", "value", "expected blind or aware");
            }
        } else if (action == "reset_stream_block") {
            check_keys(e, where, {"time_ns", "action", "stream_handle"});
            ev.kind = ControlEvent::Kind::ResetStreamBlock;
            ev.target = static_cast<uint32_t>(get_u64(e, where, "stream_handle", true));
        } else if (action == "reset_gate_close") {
            check_keys(e, where, {"time_ns", "action", "gate"});
            ev.kind = ControlEvent::Kind::ResetGateClose;
            ev.target = static_cast<uint32_t>(get_u64(e, where, "gate", true));
        } else if (action == "reset_meter_block") {
            check_keys(e, where, {"time_ns", "action", "meter"});
            ev.kind = ControlEvent::Kind::ResetMeterBlock;
            need_meter();
        } else {
            fail(where + ".action", "value", "unknown control action '" + action + "'");
            continue;
        }
        out.control_events.push_back(ev);
    }
}

void Loader::load_sync(const std::map<uint32_t, PortConfig>& ports) {
    const json* sync = get(doc, "$", "sync", false);
    if (!sync) return;
    check_keys(*sync, "sync",
               {"enabled", "delta_net_ns", "poll_interval_ns", "reference_port"});
    out.sync.enabled = get_bool(*sync, "sync", "enabled", false, true);
    out.sync.delta_net_ns = get_i64(*sync, "sync", "delta_net_ns", false, 0);
    out.sync.poll_interval_ns = get_u64(*sync, "sync", "poll_interval_ns", false, 100000000);
    out.sync.reference_port =
        static_cast<uint32_t>(get_u64(*sync, "sync", "reference_port", true));
    if (out.sync.poll_interval_ns == 0) {
        fail("sync.poll_interval_ns", "range", "poll interval must be positive");
    }
    auto it = ports.find(out.sync.reference_port);
    if (it == ports.end() || !it->second.has_ticks) {
        fail("sync.reference_port", "reference", "reference port has no hyperperiod");
    }
}

void Loader::load() {
    if (!doc.is_object()) {
        fail("$", "type", "scenario must be a JSON object");
        return;
    }
    check_keys(doc, "$",
               {"version", "name", "truncation_low_bit", "run", "ports", "gates",
                "meters", "filter_table", "filter_limits", "gate_entry_limit", "sources",
                "link", "control_events", "sync"});
    uint64_t version = get_u64(doc, "$", "version", true);
    if (version != 1) fail("version", "value", "unsupported schema version");
    out.name = get_str(doc, "$", "name", false, "scenario");

    int low_bit = static_cast<int>(get_u64(doc, "$", "truncation_low_bit", false, 11));
    out.window.low_bit = low_bit;
    if (!out.window.valid()) {
        fail("truncation_low_bit", "range", "need low_bit + 20 <= 48");
        out.window.low_bit = 11;
    }

    load_run();
    std::map<uint32_t, PortConfig> ports;
    std::map<uint32_t, uint32_t> gate_port;
    load_ports(ports);
    load_gates(ports, gate_port);
    if (static_cast<int>(std::count_if(ports.begin(), ports.end(),
                                       [](const auto& p) { return p.second.has_ticks; })) >
        kMaxTickPorts) {
        fail("gates", "capacity",
             "more than 8 ports with hyperperiod ticks; the periodic trigger "
             "supports 8");
    }
    load_meters();
    load_filter(gate_port);
    load_sources(ports, gate_port);
    load_link();
    load_control_events(ports);
    load_sync(ports);

    for (auto& [id, cfg] : ports) out.ports.push_back(cfg);
}

}  // namespace

LoadResult load_scenario(const json& doc, uint64_t rate_scale) {
    LoadResult result;
    if (rate_scale == 0) {
        result.issues.push_back({"$", "range", "rate scale must be positive"});
        return result;
    }
    Loader loader{doc, rate_scale, {}, {}};
    loader.load();
    result.issues = std::move(loader.issues);
    if (result.issues.empty()) result.scenario = std::move(loader.out);
    return result;
}

LoadResult load_scenario_file(const std::string& path, uint64_t rate_scale) {
    LoadResult result;
    std::ifstream f(path);
    if (!f) {
        result.issues.push_back({path, "io", "cannot open file"});
        return result;
    }
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        result.issues.push_back({path, "parse", e.what()});
        return result;
    }
    result = load_scenario(doc, rate_scale);
    if (result.scenario && result.scenario->name == "scenario") {
        result.scenario->name = path;
    }
    return result;
}

}  // namespace psfp
