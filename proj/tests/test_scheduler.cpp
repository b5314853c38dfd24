#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "psfp/scheduler.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace psfp;

namespace {
const TruncationWindow kFine{0};    // 1 ns granularity
const TruncationWindow kCoarse{11};  // 2048 ns granularity, ~2.1 s span
}  // namespace

TEST_CASE("hyperperiod is the LCM") {
    std::vector<Duration> p{2, 3, 4};
    CHECK(hyperperiod(p, kFine) == 12);
    std::vector<Duration> single{800'000};
    CHECK(hyperperiod(single, kCoarse) == 800'000);
}

TEST_CASE("hyperperiod out of range") {
    // lcm(700 ms, 600 ms) = 4.2 s, beyond the ~2.1 s span. Frozen from the
    // LCM oracle.
    std::vector<Duration> p{700'000'000, 600'000'000};
    CHECK(oracle::lcm_by_search({700'000'000, 600'000'000}) == 4'200'000'000ull);
    CHECK_THROWS_AS(hyperperiod(p, kCoarse), ScheduleError);
    try {
        hyperperiod(p, kCoarse);
    } catch (const ScheduleError& e) {
        CHECK(e.code == ScheduleErrorCode::HyperperiodOutOfRange);
    }
    std::vector<Duration> tiny{100};
    CHECK_THROWS_AS(hyperperiod(tiny, kCoarse), ScheduleError);
}

TEST_CASE("expand the 1-4-2-1 list") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 800'000;
    spec.slices = {{100'000, true, {}, {}},
                   {400'000, false, {}, {}},
                   {200'000, true, {}, {}},
                   {100'000, false, {}, {}}};
    ExpandedGcl out = expand(spec, 800'000);
    REQUIRE(out.open_entries.size() == 2);
    CHECK(out.open_entries[0].start_ns == 0);
    CHECK(out.open_entries[0].end_ns == 100'000);
    CHECK(out.open_entries[1].start_ns == 500'000);
    CHECK(out.open_entries[1].end_ns == 700'000);
    CHECK_FALSE(out.octet_budget_bytes.has_value());
}

TEST_CASE("expand repeats the pattern over the hyperperiod") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 2;
    spec.slices = {{1, true, {}, {}}, {1, false, {}, {}}};
    ExpandedGcl out = expand(spec, 4);
    REQUIRE(out.open_entries.size() == 2);
    CHECK(out.open_entries[0].start_ns == 0);
    CHECK(out.open_entries[0].end_ns == 1);
    CHECK(out.open_entries[1].start_ns == 2);
    CHECK(out.open_entries[1].end_ns == 3);
}

TEST_CASE("adjacent open slices merge across repetition boundaries") {
    // Pattern open/closed/open: the trailing open meets the leading open of
    // the next repetition. Frozen from the interval-merge oracle: repetitions
    // give [0,1) [2,3) | [3,4) [5,6) and the middle pair merges.
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 3;
    spec.slices = {{1, true, {}, {}}, {1, false, {}, {}}, {1, true, {}, {}}};
    ExpandedGcl out = expand(spec, 6);
    REQUIRE(out.open_entries.size() == 3);
    CHECK(out.open_entries[0].end_ns == 1);
    CHECK(out.open_entries[1].start_ns == 2);
    CHECK(out.open_entries[1].end_ns == 4);
    CHECK(out.open_entries[2].start_ns == 5);
}

TEST_CASE("slices with different IPV never merge") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 2;
    spec.slices = {{1, true, uint8_t{1}, {}}, {1, true, uint8_t{2}, {}}};
    ExpandedGcl out = expand(spec, 2);
    REQUIRE(out.open_entries.size() == 2);
    CHECK(out.open_entries[0].ipv == uint8_t{1});
    CHECK(out.open_entries[1].ipv == uint8_t{2});
}

TEST_CASE("per-slice octet budgets aggregate per hyperperiod") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 2;
    spec.slices = {{1, true, {}, uint64_t{3000}}, {1, false, {}, {}}};
    ExpandedGcl out = expand(spec, 6);  // three repetitions
    CHECK(out.octet_budget_bytes == uint64_t{9000});
}

TEST_CASE("boundary granularity is validated, not rounded") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 800'000;
    spec.slices = {{100'001, true, {}, {}}, {699'999, false, {}, {}}};
    CHECK_THROWS_AS(validate_gcl(spec, kCoarse), ScheduleError);
    try {
        validate_gcl(spec, kCoarse);
    } catch (const ScheduleError& e) {
        CHECK(e.code == ScheduleErrorCode::BoundaryGranularity);
    }
}

TEST_CASE("slice durations must sum to the period") {
    StreamGclSpec spec;
    spec.gate_id = 1;
    spec.period_ns = 10;
    spec.slices = {{4, true, {}, {}}, {4, false, {}, {}}};
    CHECK_THROWS_AS(validate_gcl(spec, kFine), ScheduleError);
}

TEST_CASE("compile_port shares the hyperperiod across gates") {
    StreamGclSpec a;
    a.gate_id = 1;
    a.period_ns = 2;
    a.slices = {{1, true, {}, {}}, {1, false, {}, {}}};
    StreamGclSpec b;
    b.gate_id = 2;
    b.period_ns = 3;
    b.slices = {{3, true, {}, {}}};
    std::vector<StreamGclSpec> specs{a, b};
    CompiledPort port = compile_port(7, specs, kFine);
    CHECK(port.hyperperiod_ns == 6);
    REQUIRE(port.gates.size() == 2);
    CHECK(port.gates[0].open_entries.size() == 3);  // [0,1) [2,3) [4,5)
    CHECK(port.gates[1].open_entries.size() == 1);  // merged [0,6)
    CHECK(port.gates[1].open_entries[0].end_ns == 6);
    CHECK(port.gates[0].port == 7);
}

TEST_CASE("randomized scheduler invariants") {
    CHECK(props::scheduler_invariants(41, 3000) == 0);
}
