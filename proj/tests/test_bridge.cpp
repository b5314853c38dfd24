#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "psfp/bridge.hpp"
#include "psfp/control_sync.hpp"
#include "support/build.hpp"
#include "support/oracles.hpp"

using namespace psfp;

namespace {

// One port with the 1-4-2-1 list on gate 1 and a meter that colors
// everything green.
Bridge make_1421_bridge(bool invalid_rx = false, bool octets = false,
                        std::optional<uint64_t> budget = std::nullopt,
                        std::optional<uint8_t> ipv = std::nullopt) {
    PortConfig port{0, true, 800'000, 0, {}, 1000};
    FilterTable filter;
    StreamFilterEntry entry = test::null_entry(0xA, 1, 1, 1, 1);
    entry.max_sdu_bytes = 1500;
    entry.max_sdu_exceeded_enabled = true;
    REQUIRE_FALSE(filter.add(entry));
    StreamGateConfig gate;
    gate.gate_id = 1;
    gate.port = 0;
    gate.hyperperiod_ns = 800'000;
    gate.open_entries = {{0, 100'000, std::nullopt}, {500'000, 700'000, ipv}};
    gate.invalid_rx_enabled = invalid_rx;
    gate.octets_exceeded_enabled = octets;
    gate.octet_budget_bytes = budget;
    return Bridge({port}, std::move(filter), {gate}, {{1, test::permissive_meter()}},
                  TruncationWindow{5});
}

}  // namespace

TEST_CASE("in-profile frame in an open slice is forwarded") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 0);
    Frame f = test::tagged_frame(0, 50'000, 1280, 0xA, 1);
    ProcessResult first = bridge.process(f, 50'000);
    CHECK(first.kind == OutcomeKind::Recirculate);
    CHECK(first.recirc_arrival == 51'000);  // constant recirculation delay
    REQUIRE(f.recirc.has_value());
    CHECK(f.recirc->frame_bytes == 1280);
    ProcessResult second = bridge.process(f, first.recirc_arrival);
    CHECK(second.kind == OutcomeKind::Forward);
    CHECK(second.color == Color::Green);
    CHECK(second.stream_handle == 1);
    CHECK(bridge.counters().conserved());
    CHECK(bridge.counters().forwarded == 1);
    // The recirculation leg carried the frame plus the 7-byte header.
    CHECK(bridge.counters().recirc_leg_bytes == 1280 + 7);
}

TEST_CASE("untagged frames are best-effort and touch no PSFP state") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 0);
    uint64_t tokens_before = bridge.meter(1)->tokens_c_bytes();
    Frame f;
    f.ingress_port = 0;
    f.arrival = 150'000;  // a closed slice, which must not matter
    f.size_bytes = 9000;  // oversize, which must not matter either
    f.pcp = 3;
    ProcessResult r = bridge.process(f, f.arrival);
    CHECK(r.kind == OutcomeKind::BestEffort);
    CHECK(r.priority == 3);
    CHECK(bridge.counters().best_effort == 1);
    CHECK(bridge.meter(1)->tokens_c_bytes() == tokens_before);
    CHECK_FALSE(bridge.filter().is_blocked(1));
    CHECK(bridge.counters().conserved());
}

TEST_CASE("tagged frame that misses the filter is best-effort") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 0);
    Frame f = test::tagged_frame(0, 50'000, 100, 0xDEAD, 1);
    CHECK(test::process_both_passes(bridge, f).kind == OutcomeKind::BestEffort);
    CHECK(bridge.counters().best_effort == 1);
}

TEST_CASE("closed-slice arrival drops with GateClosed") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 0);
    Frame f = test::tagged_frame(0, 150'000, 100, 0xA, 1);
    ProcessResult r = test::process_both_passes(bridge, f);
    CHECK(r.kind == OutcomeKind::Drop);
    CHECK(r.reason == DropReason::GateClosed);
}

TEST_CASE("condition order picks the first failure") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 0);

    // Oversize frame in a closed slice: the SDU check fires first, and the
    // MaxSDUExceeded flag permanently blocks the stream.
    Frame oversize = test::tagged_frame(0, 150'000, 1600, 0xA, 1);
    ProcessResult r = test::process_both_passes(bridge, oversize);
    CHECK(r.reason == DropReason::MaxSdu);

    // Later in-profile frames drop as StreamBlocked, even in open slices.
    Frame small = test::tagged_frame(0, 800'000 + 50'000, 100, 0xA, 1);
    r = test::process_both_passes(bridge, small);
    CHECK(r.reason == DropReason::StreamBlocked);
}

TEST_CASE("invalid_rx closes the gate; open-slice frames then report the closure") {
    Bridge bridge = make_1421_bridge(true);
    bridge.on_tick(0, 0);
    Frame closed = test::tagged_frame(0, 150'000, 100, 0xA, 1);
    CHECK(test::process_both_passes(bridge, closed).reason == DropReason::GateClosed);
    CHECK(bridge.gate(1)->permanently_closed());

    Frame open = test::tagged_frame(0, 50'000 + 800'000, 100, 0xA, 1);
    CHECK(test::process_both_passes(bridge, open).reason ==
          DropReason::GatePermanentlyClosed);
    // A later closed-slice arrival still reports the slice state.
    Frame closed2 = test::tagged_frame(0, 150'000 + 800'000, 100, 0xA, 1);
    CHECK(test::process_both_passes(bridge, closed2).reason == DropReason::GateClosed);
}

TEST_CASE("octet budget drops the overrunning frame and closes the gate") {
    Bridge bridge = make_1421_bridge(false, true, uint64_t{3000});
    bridge.on_tick(0, 0);
    for (int i = 0; i < 3; ++i) {
        Frame f = test::tagged_frame(0, 10'000 + i * 1000, 1000, 0xA, 1);
        CHECK(test::process_both_passes(bridge, f).kind == OutcomeKind::Forward);
    }
    Frame fourth = test::tagged_frame(0, 20'000, 1000, 0xA, 1);
    CHECK(test::process_both_passes(bridge, fourth).reason == DropReason::OctetsExceeded);
    CHECK(bridge.gate(1)->permanently_closed());
}

TEST_CASE("octet budget resets at the hyperperiod tick") {
    Bridge bridge = make_1421_bridge(false, true, uint64_t{3000});
    bridge.on_tick(0, 0);
    for (int i = 0; i < 3; ++i) {
        Frame f = test::tagged_frame(0, 10'000 + i * 1000, 1000, 0xA, 1);
        CHECK(test::process_both_passes(bridge, f).kind == OutcomeKind::Forward);
    }
    bridge.on_tick(0, 800'000);
    CHECK(bridge.gate(1)->remaining_octets() == 3000);
    Frame f = test::tagged_frame(0, 800'000 + 50'000, 1000, 0xA, 1);
    CHECK(test::process_both_passes(bridge, f).kind == OutcomeKind::Forward);
}

TEST_CASE("IPV overrides PCP exactly when the slice carries one") {
    Bridge bridge = make_1421_bridge(false, false, std::nullopt, uint8_t{6});
    bridge.on_tick(0, 0);
    Frame in_plain = test::tagged_frame(0, 50'000, 100, 0xA, 1);
    in_plain.pcp = 2;
    ProcessResult r = test::process_both_passes(bridge, in_plain);
    CHECK(r.priority == 2);  // slice without IPV: PCP is used

    Frame in_ipv = test::tagged_frame(0, 600'000, 100, 0xA, 1);
    in_ipv.pcp = 2;
    r = test::process_both_passes(bridge, in_ipv);
    CHECK(r.priority == 6);
}

TEST_CASE("hyperperiod register: frames map relative to the last tick") {
    Bridge bridge = make_1421_bridge();
    bridge.on_tick(0, 800'000);
    CHECK(bridge.last_tick(0) == Timestamp48{800'000});
    Frame f = test::tagged_frame(0, 850'000, 100, 0xA, 1);
    ProcessResult r = test::process_both_passes(bridge, f);
    CHECK(r.t_rel_adj == 50'000);
    CHECK(r.kind == OutcomeKind::Forward);
}

TEST_CASE("schedule_ticks: plain periodic sequence") {
    PortConfig port{0, true, 800'000, 0, {}, 1000};
    std::mt19937_64 rng(1);
    std::vector<Timestamp48> ticks = schedule_ticks(port, 4'000'000, rng);
    REQUIRE(ticks.size() == 6);
    CHECK(ticks[0] == 0);
    CHECK(ticks[1] == 800'000);
    CHECK(ticks[4] == 3'200'000);
    CHECK(ticks[5] == 4'000'000);
}

TEST_CASE("schedule_ticks: two ports expose eps2 through first-tick registers") {
    PortConfig a{0, true, 800'000, 0, {}, 1000};
    PortConfig b{1, true, 800'000, 30'000, {}, 1000};
    FilterTable filter;
    Bridge bridge({a, b}, std::move(filter), {}, {}, TruncationWindow{5});
    std::mt19937_64 rng(1);
    for (Timestamp48 t : schedule_ticks(a, 4'000'000, rng)) bridge.on_tick(0, t);
    for (Timestamp48 t : schedule_ticks(b, 4'000'000, rng)) bridge.on_tick(1, t);
    CHECK(epsilon2(*bridge.first_tick(1), *bridge.first_tick(0)) == 30'000);
}

TEST_CASE("schedule_ticks: constant jitter accumulates as eps1") {
    PortConfig port{0, true, 800'000, 0, {TickJitter::Kind::Constant, 5}, 1000};
    std::mt19937_64 rng(1);
    std::vector<Timestamp48> ticks = schedule_ticks(port, 8'000'000, rng);
    REQUIRE(ticks.size() >= 4);
    for (size_t k = 0; k < ticks.size(); ++k) {
        CHECK(epsilon1(ticks[k], ticks[0], 800'000) ==
              oracle::eps1_accumulation(k + 1, 5, 800'000));
    }
}

TEST_CASE("more than eight tick-bearing ports are rejected") {
    std::vector<PortConfig> ports;
    for (uint32_t i = 0; i < 9; ++i) {
        ports.push_back({i, true, 800'000, 0, {}, 1000});
    }
    FilterTable filter;
    CHECK_THROWS_AS(Bridge(ports, std::move(filter), {}, {}, TruncationWindow{5}),
                    std::invalid_argument);
}

TEST_CASE("every forwarded frame satisfied all eight conditions") {
    // Random traffic against a gate with budget and a tight meter; re-check
    // each forwarded frame's conditions from the trace.
    PortConfig port{0, true, 800'000, 0, {}, 1000};
    FilterTable filter;
    StreamFilterEntry entry = test::null_entry(0xA, 1, 1, 1, 1);
    entry.max_sdu_bytes = 1500;
    REQUIRE_FALSE(filter.add(entry));
    StreamGateConfig gate;
    gate.gate_id = 1;
    gate.port = 0;
    gate.hyperperiod_ns = 800'000;
    gate.open_entries = {{0, 100'000, std::nullopt}, {500'000, 700'000, std::nullopt}};
    gate.octets_exceeded_enabled = true;
    gate.octet_budget_bytes = 50'000;
    TrTcmConfig meter;
    meter.cir_bps = 40'000'000;
    meter.eir_bps = 10'000'000;
    meter.cbs_bytes = 4000;
    meter.ebs_bytes = 4000;
    meter.drop_on_yellow = false;
    Bridge bridge({port}, std::move(filter), {gate}, {{1, meter}}, TruncationWindow{5});

    std::vector<TraceRecord> trace;
    bridge.set_trace_sink([&](const TraceRecord& r) { trace.push_back(r); });

    std::mt19937_64 rng(91);
    std::vector<GateSlice> open_entries = gate.open_entries;
    Timestamp48 now = 0;
    Timestamp48 next_tick = 0;
    for (int i = 0; i < 20000; ++i) {
        while (next_tick <= now) {
            bridge.on_tick(0, next_tick);
            next_tick += 800'000;
        }
        Frame f = test::tagged_frame(0, now, 200 + static_cast<uint32_t>(rng() % 1600),
                                     0xA, 1);
        test::process_both_passes(bridge, f);
        now += rng() % 20'000;
    }
    size_t forwarded_seen = 0;
    for (const TraceRecord& r : trace) {
        if (r.outcome != OutcomeKind::Forward) continue;
        forwarded_seen++;
        CHECK(r.size_bytes <= 1500);                                   // condition 1
        CHECK(oracle::slice_lookup(open_entries, r.t_rel_adj).open);   // condition 3
        CHECK(r.color != Color::Red);                                  // condition 6
        CHECK(r.color != Color::Yellow);  // conditions 6-8 with these flags: green only
    }
    CHECK(forwarded_seen > 100);
    CHECK(bridge.counters().conserved());
    CHECK(bridge.counters().forwarded == forwarded_seen);
}

TEST_CASE("meter flags through the bridge: yellow DEI and blocking") {
    PortConfig port{0, true, 800'000, 0, {}, 1000};
    FilterTable filter;
    REQUIRE_FALSE(filter.add(test::null_entry(0xA, 1, 1, 1, 1)));
    StreamGateConfig gate;
    gate.gate_id = 1;
    gate.port = 0;
    gate.hyperperiod_ns = 800'000;
    gate.open_entries = {{0, 800'000, std::nullopt}};
    TrTcmConfig meter;
    meter.cir_bps = 0;
    meter.cbs_bytes = 0;
    meter.eir_bps = 0;
    meter.ebs_bytes = 4000;  // one yellow frame, then red
    Bridge bridge({port}, std::move(filter), {gate}, {{1, meter}}, TruncationWindow{5});
    bridge.on_tick(0, 0);

    Frame f = test::tagged_frame(0, 100, 4000, 0xA, 1);
    ProcessResult r = test::process_both_passes(bridge, f);
    CHECK(r.kind == OutcomeKind::Forward);
    CHECK(r.color == Color::Yellow);
    CHECK(r.dei_out);  // DEI set on yellow

    Frame g = test::tagged_frame(0, 200, 4000, 0xA, 1);
    r = test::process_both_passes(bridge, g);
    CHECK(r.reason == DropReason::MeterRed);

    bridge.meter(1)->set_mark_all_red(true);
    Frame h = test::tagged_frame(0, 300, 4000, 0xA, 1);
    r = test::process_both_passes(bridge, h);
    CHECK(r.reason == DropReason::MeterRed);
    CHECK(bridge.meter(1)->blocked());

    // Once blocked, every frame is marked red with the blocked reason.
    Frame i = test::tagged_frame(0, 400, 10, 0xA, 1);
    r = test::process_both_passes(bridge, i);
    CHECK(r.reason == DropReason::MeterBlocked);
    CHECK(r.color == Color::Red);
}

TEST_CASE("drop_on_yellow through the bridge uses the Yellow reason") {
    PortConfig port{0, true, 800'000, 0, {}, 1000};
    FilterTable filter;
    REQUIRE_FALSE(filter.add(test::null_entry(0xA, 1, 1, 1, 1)));
    StreamGateConfig gate;
    gate.gate_id = 1;
    gate.port = 0;
    gate.hyperperiod_ns = 800'000;
    gate.open_entries = {{0, 800'000, std::nullopt}};
    TrTcmConfig meter = test::permissive_meter();
    meter.drop_on_yellow = true;
    Bridge bridge({port}, std::move(filter), {gate}, {{1, meter}}, TruncationWindow{5});
    bridge.on_tick(0, 0);

    // Pre-colored yellow (DEI set on ingress) with DropOnYellow: dropped even
    // though the meter colored it green.
    Frame f = test::tagged_frame(0, 100, 100, 0xA, 1);
    f.dei = true;
    ProcessResult r = test::process_both_passes(bridge, f);
    CHECK(r.kind == OutcomeKind::Drop);
    CHECK(r.reason == DropReason::Yellow);
    CHECK(r.color == Color::Red);  // recolored
}
