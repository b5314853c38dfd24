#include "psfp/bridge.hpp"

#include <cassert>
#include <stdexcept>

namespace psfp {

const char* to_string(DropReason reason) {
    switch (reason) {
        case DropReason::MaxSdu: return "max_sdu";
        case DropReason::StreamBlocked: return "stream_blocked";
        case DropReason::GateClosed: return "gate_closed";
        case DropReason::GatePermanentlyClosed: return "gate_permanently_closed";
        case DropReason::OctetsExceeded: return "octets_exceeded";
        case DropReason::MeterRed: return "meter_red";
        case DropReason::MeterBlocked: return "meter_blocked";
        case DropReason::Yellow: return "yellow";
    }
    return "?";
}

std::vector<Timestamp48> schedule_ticks(const PortConfig& port, Timestamp48 until,
                                        std::mt19937_64& rng) {
    std::vector<Timestamp48> ticks;
    if (!port.has_ticks || port.hyperperiod_ns == 0) return ticks;
    uint64_t t = port.tick_phase;
    int64_t accumulated = 0;
    while (wrap48(t) <= until) {
        ticks.push_back(wrap48(t));
        switch (port.jitter.kind) {
            case TickJitter::Kind::None:
                break;
            case TickJitter::Kind::Constant:
                accumulated = port.jitter.ns;
                break;
            case TickJitter::Kind::Uniform: {
                std::uniform_int_distribution<int64_t> dist(-port.jitter.ns,
                                                            port.jitter.ns);
                accumulated = dist(rng);
                break;
            }
        }
        t = wrap48(t + port.hyperperiod_ns + static_cast<uint64_t>(accumulated));
        if (t < ticks.back() && until < kTimestampMax) break;  // wrapped past `until`
    }
    return ticks;
}

Bridge::Bridge(std::vector<PortConfig> ports, FilterTable filter,
               std::vector<StreamGateConfig> gate_cfgs,
               std::map<uint32_t, TrTcmConfig> meter_cfgs, TruncationWindow window)
    : filter_(std::move(filter)), window_(window) {
    for (PortConfig& p : ports) {
        PortRuntime rt;
        rt.cfg = p;
        if (p.has_ticks) tick_ports_.push_back(p.port_id);
        ports_.emplace(p.port_id, std::move(rt));
    }
    if (tick_ports_.size() > kMaxTickPorts) {
        throw std::invalid_argument("more than 8 ports with hyperperiod ticks");
    }
    for (StreamGateConfig& g : gate_cfgs) {
        uint32_t id = g.gate_id;
        uint32_t port = g.port;
        auto [it, ok] = gates_.emplace(id, StreamGate(std::move(g), window_));
        if (!ok) throw std::invalid_argument("duplicate gate id");
        ports_.at(port).gates.push_back(&it->second);
    }
    for (auto& [id, cfg] : meter_cfgs) meters_.emplace(id, TrTcm(cfg));
}

const PortConfig& Bridge::port_config(uint32_t port) const {
    return ports_.at(port).cfg;
}

Duration Bridge::port_hyperperiod(uint32_t port) const {
    return ports_.at(port).cfg.hyperperiod_ns;
}

std::optional<Timestamp48> Bridge::last_tick(uint32_t port) const {
    return ports_.at(port).last_tick;
}

std::optional<Timestamp48> Bridge::first_tick(uint32_t port) const {
    return ports_.at(port).first_tick;
}

DeltaOffset Bridge::delta(uint32_t port) const { return ports_.at(port).delta; }

bool Bridge::delta_negative(uint32_t port) const { return ports_.at(port).delta.negative; }

StreamGate* Bridge::gate(uint32_t gate_id) {
    auto it = gates_.find(gate_id);
    return it == gates_.end() ? nullptr : &it->second;
}

TrTcm* Bridge::meter(uint32_t meter_id) {
    auto it = meters_.find(meter_id);
    return it == meters_.end() ? nullptr : &it->second;
}

void Bridge::on_tick(uint32_t port, Timestamp48 t) {
    PortRuntime& rt = ports_.at(port);
    if (!rt.first_tick) rt.first_tick = t;
    rt.last_tick = t;
    for (StreamGate* g : rt.gates) g->on_tick();
}

void Bridge::set_delta(uint32_t port, int64_t delta_ns) {
    PortRuntime& rt = ports_.at(port);
    if (rt.cfg.hyperperiod_ns == 0) return;
    rt.delta = make_delta_offset(delta_ns, rt.cfg.hyperperiod_ns);
}

void Bridge::emit_trace(const Frame& frame, Timestamp48 now, const ProcessResult& r) {
    if (!trace_sink_) return;
    trace_sink_(TraceRecord{now, frame.ingress_port, r.stream_handle, r.kind, r.reason,
                            r.color, r.priority, frame.size_bytes, r.t_rel_adj});
}

ProcessResult Bridge::process(Frame& frame, Timestamp48 now) {
    ProcessResult result;
    if (!frame.recirc) {
        counters_.ingested++;
        if (!frame.has_vlan) {
            // Non-TSN traffic: forwarded without any further action.
            counters_.best_effort++;
            result = {OutcomeKind::BestEffort, {}, {}, frame.pcp, frame.dei, 0, -1, 0};
        } else {
            result = first_pass(frame, now, ports_.at(frame.ingress_port));
        }
    } else {
        counters_.recirc_in_flight--;
        result = second_pass(frame, now);
    }
    if (result.kind != OutcomeKind::Recirculate) emit_trace(frame, now, result);
    return result;
}

ProcessResult Bridge::first_pass(Frame& frame, Timestamp48 now, PortRuntime& port) {
    // Tagged frames require a hyperperiod register; scenario validation
    // guarantees a tick-bearing ingress port.
    if (!port.cfg.has_ticks || !port.last_tick) {
        throw std::logic_error("tagged frame on a port without hyperperiod ticks");
    }
    Duration h = port.cfg.hyperperiod_ns;
    RelativePosition rel = relative_position(now, *port.last_tick, h);
    if (rel.used_fallback) counters_.relpos_fallbacks++;
    // Delta table is read on the first pass; updates only affect later frames.
    Duration adjusted = apply_delta(rel.value, port.delta, h);
    frame.recirc = RecircHeader{frame.size_bytes, adjusted};
    counters_.recirc_in_flight++;
    counters_.recirc_leg_bytes += frame.size_bytes + RecircHeader::kWireBytes;
    ProcessResult r;
    r.kind = OutcomeKind::Recirculate;
    r.recirc_arrival = wrap_add(now, port.cfg.recirc_delay_ns);
    r.t_rel_adj = adjusted;
    return r;
}

ProcessResult Bridge::second_pass(Frame& frame, Timestamp48 now) {
    const RecircHeader hdr = *frame.recirc;
    const StreamFilterEntry* entry = filter_.classify(frame);
    if (!entry) {
        counters_.best_effort++;
        return {OutcomeKind::BestEffort, {}, {}, frame.pcp, frame.dei, 0, -1, 0};
    }
    ProcessResult r;
    r.stream_handle = entry->stream_handle;
    r.t_rel_adj = hdr.t_rel_adj_ns;
    r.priority = frame.pcp;

    auto drop = [&](DropReason reason) {
        r.kind = OutcomeKind::Drop;
        r.reason = reason;
        counters_.drops[static_cast<size_t>(reason)]++;
        return r;
    };

    // Conditions 1 and 2: maximum SDU size, stream not permanently blocked.
    switch (filter_.check_sdu(hdr.frame_bytes, *entry)) {
        case FilterTable::SduDecision::Pass:
            break;
        case FilterTable::SduDecision::DropOversize:
        case FilterTable::SduDecision::DropOversizeAndBlock:
            return drop(DropReason::MaxSdu);
        case FilterTable::SduDecision::DropBlocked:
            return drop(DropReason::StreamBlocked);
    }

    // Condition 3: assigned to an open time slice.
    StreamGate& gate = gates_.at(entry->gate_id);
    StreamGate::Decision gd = gate.decide(hdr.t_rel_adj_ns);
    if (!gd.open) {
        gate.note_closed_arrival();
        return drop(DropReason::GateClosed);
    }
    // Condition 4: gate not permanently closed.
    if (gate.permanently_closed()) return drop(DropReason::GatePermanentlyClosed);
    // Condition 5: octet budget of the current hyperperiod.
    if (!gate.consume_budget(hdr.frame_bytes)) return drop(DropReason::OctetsExceeded);

    // Conditions 6-8: flow meter.
    TrTcm& meter = meters_.at(entry->meter_id);
    if (meter.blocked()) {
        // MarkAllFramesRed tripped earlier: every frame is marked red.
        r.color = Color::Red;
        return drop(DropReason::MeterBlocked);
    }
    Color pre = meter.config().color_mode == ColorMode::Aware && frame.dei
                    ? Color::Yellow
                    : Color::Green;
    Color color = meter.meter(hdr.frame_bytes, pre, now);
    PolicyResult policy = meter.apply_color_policy(color, frame.dei);
    r.color = policy.final_color;
    if (policy.action == MeterAction::Drop) {
        return drop(policy.recolored_yellow ? DropReason::Yellow : DropReason::MeterRed);
    }
    if (policy.action == MeterAction::ForwardWithDei) r.dei_out = true;
    if (frame.dei) r.dei_out = true;

    r.kind = OutcomeKind::Forward;
    r.priority = gd.ipv.value_or(frame.pcp);
    counters_.forwarded++;
    return r;
}

}  // namespace psfp
