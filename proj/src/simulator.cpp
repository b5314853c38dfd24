#include "psfp/simulator.hpp"

#include <deque>
#include <queue>
#include <random>
#include <stdexcept>

namespace psfp {

namespace {

using u128 = unsigned __int128;

constexpr uint8_t kOrderTick = 0;
constexpr uint8_t kOrderControl = 1;
constexpr uint8_t kOrderFrame = 2;
constexpr uint8_t kOrderDeparture = 3;

struct Event {
    enum class Type : uint8_t {
        Tick,
        SyncPoll,
        Control,
        SourceEmit,
        RecircArrival,
        LinkDeparture,
    };

    Timestamp48 time = 0;
    uint8_t order = 0;
    uint64_t seq = 0;
    Type type = Type::Tick;
    uint32_t index = 0;  // port, control event index, or source index
    Frame frame;         // RecircArrival payload
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.order != b.order) return a.order > b.order;
        return a.seq > b.seq;
    }
};

struct SourceState {
    const SourceConfig* cfg = nullptr;
    u128 bits_sent = 0;  // integer accumulator: next emission at start + bits*1e9/rate
    uint64_t emitted = 0;
};

struct PendingFrame {
    uint32_t size_bytes = 0;
    uint32_t source_id = 0;
    Timestamp48 arrival = 0;
    bool measure = false;
};

// Work-conserving FIFO link with a byte-bounded waiting queue (the frame in
// service is not counted against the limit).
struct LinkState {
    LinkConfig cfg;
    bool busy = false;
    PendingFrame in_service;
    std::deque<PendingFrame> queue;
    uint64_t queued_bytes = 0;

    Duration serialization(uint32_t bytes) const {
        return static_cast<Duration>(static_cast<u128>(bytes) * 8 * 1000000000ull /
                                     cfg.capacity_bps);
    }
};

}  // namespace

struct Simulator::Impl {
    const CompiledScenario& sc;
    Bridge bridge;
    MetricsLog metrics;
    ControlSync sync;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events;
    uint64_t next_seq = 0;
    std::vector<SourceState> sources;
    std::optional<LinkState> link;
    std::mt19937_64 rng;

    explicit Impl(const CompiledScenario& scenario)
        : sc(scenario),
          bridge(scenario.ports, scenario.filter, scenario.gates, scenario.meters,
                 scenario.window),
          metrics(scenario.run.duration_ns, scenario.run.bin_ns),
          sync(scenario.sync),
          rng(scenario.run.seed) {
        if (sc.link) link = LinkState{*sc.link, false, {}, {}, 0};
        for (const SourceConfig& s : sc.sources) sources.push_back({&s, 0, 0});
    }

    void push(Event e) {
        e.seq = next_seq++;
        events.push(std::move(e));
    }

    Timestamp48 emission_time(const SourceState& s) const {
        return s.cfg->start_ns +
               static_cast<uint64_t>(s.bits_sent * 1000000000ull / s.cfg->rate_bps);
    }

    void seed_events() {
        for (uint32_t port : bridge.tick_ports()) {
            for (Timestamp48 t :
                 schedule_ticks(bridge.port_config(port), sc.run.duration_ns, rng)) {
                push({t, kOrderTick, 0, Event::Type::Tick, port, {}});
            }
        }
        if (sync.config().enabled) {
            push({0, kOrderControl, 0, Event::Type::SyncPoll, 0, {}});
        }
        for (size_t i = 0; i < sc.control_events.size(); ++i) {
            push({sc.control_events[i].time_ns, kOrderControl, 0, Event::Type::Control,
                  static_cast<uint32_t>(i), {}});
        }
        for (size_t i = 0; i < sources.size(); ++i) {
            Timestamp48 t = emission_time(sources[i]);
            if (t < sources[i].cfg->stop_ns) {
                push({t, kOrderFrame, 0, Event::Type::SourceEmit,
                      static_cast<uint32_t>(i), {}});
            }
        }
    }

    Frame make_frame(SourceState& s, Timestamp48 now) {
        const SourceConfig& c = *s.cfg;
        Frame f;
        f.ingress_port = c.port;
        f.arrival = now;
        f.size_bytes = c.frame_bytes;
        f.has_vlan = c.has_vlan;
        f.vid = c.vid;
        f.pcp = c.pcp;
        f.dei = c.dei;
        f.eth_src = c.eth_src;
        f.eth_dst = c.eth_dst;
        f.ip = c.ip;
        f.source_id = c.id;
        f.seq = s.emitted++;
        return f;
    }

    void apply_control(const ControlEvent& ev) {
        switch (ev.kind) {
            case ControlEvent::Kind::SetDelta:
                bridge.set_delta(ev.target, ev.delta_ns);
                break;
            case ControlEvent::Kind::SetDropOnYellow:
                bridge.meter(ev.target)->set_drop_on_yellow(ev.flag);
                break;
            case ControlEvent::Kind::SetMarkAllRed:
                bridge.meter(ev.target)->set_mark_all_red(ev.flag);
                break;
            case ControlEvent::Kind::SetColorMode:
                bridge.meter(ev.target)->set_color_mode(ev.color_mode);
                break;
            case ControlEvent::Kind::ResetStreamBlock:
                bridge.filter().reset_block(ev.target);
                break;
            case ControlEvent::Kind::ResetGateClose:
                bridge.gate(ev.target)->reset_close();
                break;
            case ControlEvent::Kind::ResetMeterBlock:
                bridge.meter(ev.target)->reset_block();
                break;
        }
    }

    void deliver(Frame frame, Timestamp48 now) {
        bool classified_pass = frame.recirc.has_value();
        ProcessResult r = bridge.process(frame, now);
        if (classified_pass && r.stream_handle >= 0) {
            metrics.record_psfp_arrival(now, frame.size_bytes);
        }
        switch (r.kind) {
            case OutcomeKind::Recirculate:
                push({r.recirc_arrival, kOrderFrame, 0, Event::Type::RecircArrival, 0,
                      std::move(frame)});
                break;
            case OutcomeKind::Drop:
                metrics.record_drop(now, *r.reason, frame.size_bytes);
                if (r.color) metrics.record_color(now, *r.color, frame.size_bytes);
                break;
            case OutcomeKind::Forward:
                metrics.record_color(now, *r.color, frame.size_bytes);
                metrics.record_forward(frame.arrival, now);
                send(frame, now);
                break;
            case OutcomeKind::BestEffort:
                send(frame, now);
                break;
        }
    }

    void send(const Frame& frame, Timestamp48 now) {
        bool measure = sc.sources[frame.source_id].measure_latency;
        if (!link) {
            // No modeled egress link: the frame departs immediately.
            if (measure) metrics.record_latency(frame.arrival, now, frame.source_id);
            return;
        }
        metrics.link.enqueued++;
        PendingFrame p{frame.size_bytes, frame.source_id, frame.arrival, measure};
        if (!link->busy) {
            link->busy = true;
            link->in_service = p;
            push({wrap_add(now, link->serialization(p.size_bytes)), kOrderDeparture, 0,
                  Event::Type::LinkDeparture, 0, {}});
        } else if (link->queued_bytes + p.size_bytes <= link->cfg.queue_limit_bytes) {
            link->queued_bytes += p.size_bytes;
            link->queue.push_back(p);
        } else {
            metrics.link.queue_dropped++;
            metrics.link.queue_dropped_bytes += p.size_bytes;
        }
    }

    void depart(Timestamp48 now) {
        metrics.link.departed++;
        const PendingFrame& done = link->in_service;
        if (done.measure) metrics.record_latency(done.arrival, now, done.source_id);
        if (!link->queue.empty()) {
            link->in_service = link->queue.front();
            link->queue.pop_front();
            link->queued_bytes -= link->in_service.size_bytes;
            push({wrap_add(now, link->serialization(link->in_service.size_bytes)),
                  kOrderDeparture, 0, Event::Type::LinkDeparture, 0, {}});
        } else {
            link->busy = false;
        }
    }

    MetricsLog run() {
        seed_events();
        while (!events.empty()) {
            Event ev = events.top();
            if (ev.time >= sc.run.duration_ns) break;
            events.pop();
            switch (ev.type) {
                case Event::Type::Tick:
                    bridge.on_tick(ev.index, ev.time);
                    break;
                case Event::Type::SyncPoll:
                    sync.poll(bridge, ev.time, &metrics);
                    push({wrap_add(ev.time, sync.config().poll_interval_ns),
                          kOrderControl, 0, Event::Type::SyncPoll, 0, {}});
                    break;
                case Event::Type::Control:
                    apply_control(sc.control_events[ev.index]);
                    break;
                case Event::Type::SourceEmit: {
                    SourceState& s = sources[ev.index];
                    deliver(make_frame(s, ev.time), ev.time);
                    s.bits_sent += static_cast<u128>(s.cfg->frame_bytes) * 8;
                    Timestamp48 next = emission_time(s);
                    if (next < s.cfg->stop_ns) {
                        push({next, kOrderFrame, 0, Event::Type::SourceEmit, ev.index, {}});
                    }
                    break;
                }
                case Event::Type::RecircArrival:
                    deliver(std::move(ev.frame), ev.time);
                    break;
                case Event::Type::LinkDeparture:
                    depart(ev.time);
                    break;
            }
            if (!bridge.counters().conserved()) {
                throw std::logic_error("bridge frame conservation violated");
            }
        }
        metrics.bridge = bridge.counters();
        return std::move(metrics);
    }
};

Simulator::Simulator(const CompiledScenario& scenario)
    : impl_(std::make_unique<Impl>(scenario)) {}

Simulator::~Simulator() = default;

MetricsLog Simulator::run() { return impl_->run(); }

Bridge& Simulator::bridge() { return impl_->bridge; }

void Simulator::set_trace_sink(std::function<void(const TraceRecord&)> sink) {
    impl_->bridge.set_trace_sink(std::move(sink));
}

}  // namespace psfp
