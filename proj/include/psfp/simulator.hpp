#pragma once

#include <functional>
#include <memory>

#include "psfp/bridge.hpp"
#include "psfp/control_sync.hpp"
#include "psfp/metrics.hpp"
#include "psfp/scenario.hpp"

namespace psfp {

// Deterministic discrete-event harness around one bridge: CBR sources, the
// per-port tick generators, control events, the sync task and a rate-limited
// FIFO egress link. Events at equal timestamps run in a fixed class order
// (tick, control update, frame arrival, link departure), then by scheduling
// sequence number, so identical scenarios produce bit-identical logs.
class Simulator {
public:
    explicit Simulator(const CompiledScenario& scenario);
    ~Simulator();

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    // Runs the full scenario. The bridge conservation invariant is verified
    // after every event; a violation aborts the run with std::logic_error.
    MetricsLog run();

    Bridge& bridge();

    // Optional per-decision trace, installed before run().
    void set_trace_sink(std::function<void(const TraceRecord&)> sink);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace psfp
