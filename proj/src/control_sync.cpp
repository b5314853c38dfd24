#include "psfp/control_sync.hpp"

#include "psfp/bridge.hpp"
#include "psfp/metrics.hpp"

namespace psfp {

Duration epsilon1(Timestamp48 t_jh, Timestamp48 t_1h, Duration h) {
    return wrap_diff(t_jh, t_1h) % h;
}

int64_t epsilon2(Timestamp48 t_1h_port, Timestamp48 t_1h_ref) {
    Duration d = wrap_diff(t_1h_port, t_1h_ref);
    if (d <= (kTimestampMask >> 1)) return static_cast<int64_t>(d);
    return static_cast<int64_t>(d) - static_cast<int64_t>(kTimestampMask + 1);
}

void ControlSync::poll(Bridge& bridge, Timestamp48 now, MetricsLog* metrics) {
    std::optional<Timestamp48> ref_first = bridge.first_tick(cfg_.reference_port);
    if (!ref_first) return;
    for (uint32_t port : bridge.tick_ports()) {
        std::optional<Timestamp48> first = bridge.first_tick(port);
        std::optional<Timestamp48> last = bridge.last_tick(port);
        if (!first || !last) continue;
        Duration h = bridge.port_hyperperiod(port);
        Duration e1 = epsilon1(*last, *first, h);
        int64_t e2 = epsilon2(*first, *ref_first);
        int64_t delta = cfg_.delta_net_ns + static_cast<int64_t>(e1) + e2;
        bridge.set_delta(port, delta);
        if (metrics) {
            metrics->record_sync({now, port, e1, e2, delta});
        }
    }
}

}  // namespace psfp
