#pragma once

#include <cstdint>
#include <optional>

#include "psfp/time48.hpp"

namespace psfp {

class Bridge;
class MetricsLog;

struct SyncConfig {
    bool enabled = false;
    int64_t delta_net_ns = 0;  // control-plane vs data-plane clock offset (scenario input)
    Duration poll_interval_ns = 100'000'000;  // 100 ms
    uint32_t reference_port = 0;  // the port whose GCL grid others synchronize to
};

// Accumulated tick drift of one port: (t_jh - t_1h) mod h, computed with full
// modular arithmetic (the control plane has no data-plane constraints).
Duration epsilon1(Timestamp48 t_jh, Timestamp48 t_1h, Duration h);

// First-tick offset between a port and the reference port, as the signed
// shorter arc on the 2^48 circle.
int64_t epsilon2(Timestamp48 t_1h_port, Timestamp48 t_1h_ref);

// Control-plane synchronization task. Runs as timestamped events inside the
// simulation's event loop: on each poll it reads the hyperperiod timestamp
// registers from the bridge, composes delta = delta_net + eps1 + eps2 per
// tick-bearing port, and pushes the (sign, magnitude) pair in one atomic
// update per port.
class ControlSync {
public:
    explicit ControlSync(SyncConfig cfg) : cfg_(cfg) {}

    // One poll at simulation time `now`. Ports whose registers are not yet
    // populated (no tick seen) are skipped, as is everything until the
    // reference port has its first tick.
    void poll(Bridge& bridge, Timestamp48 now, MetricsLog* metrics);

    const SyncConfig& config() const { return cfg_; }

private:
    SyncConfig cfg_;
};

}  // namespace psfp
