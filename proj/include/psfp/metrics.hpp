#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "psfp/bridge.hpp"
#include "psfp/time48.hpp"

namespace psfp {

// Time series and counters of one simulation run. Bins tile [0, duration)
// exactly; everything is integer nanoseconds and bits per second so output
// files are byte-identical across runs.
class MetricsLog {
public:
    struct ForwardRec {
        Timestamp48 arrival;    // first-pass ingress timestamp
        Timestamp48 decision;   // second-pass forwarding decision
        uint64_t cumulative;
    };
    struct LatencySample {
        Timestamp48 arrival;
        Timestamp48 departure;
        uint64_t latency_ns;
        uint32_t source_id;
    };
    struct SyncSample {
        Timestamp48 time;
        uint32_t port;
        uint64_t eps1_ns;
        int64_t eps2_ns;
        int64_t delta_ns;
    };
    struct ColorBin {
        uint64_t bytes = 0;
        uint64_t frames = 0;
    };
    struct LinkStats {
        uint64_t enqueued = 0;
        uint64_t departed = 0;
        uint64_t queue_dropped = 0;
        uint64_t queue_dropped_bytes = 0;
    };

    MetricsLog(Duration duration_ns, Duration bin_ns);

    void record_color(Timestamp48 meter_time, Color color, uint32_t bytes);
    void record_psfp_arrival(Timestamp48 t, uint32_t bytes);
    void record_drop(Timestamp48 t, DropReason reason, uint32_t bytes);
    void record_forward(Timestamp48 arrival, Timestamp48 decision);
    void record_latency(Timestamp48 arrival, Timestamp48 departure, uint32_t source_id);
    void record_sync(const SyncSample& s);

    size_t bin_count() const { return bins_; }
    size_t bin_of(Timestamp48 t) const { return static_cast<size_t>(t / bin_ns_); }
    Duration bin_ns() const { return bin_ns_; }
    Duration duration_ns() const { return duration_ns_; }

    // Rate of one color in one bin, bits per second.
    uint64_t color_rate_bps(size_t bin, Color c) const;
    const ColorBin& color_bin(size_t bin, Color c) const {
        return color_bins_[static_cast<size_t>(c)][bin];
    }
    uint64_t psfp_arrival_bytes(size_t bin) const { return arrival_bytes_[bin]; }
    uint64_t drop_bytes(size_t bin, DropReason r) const {
        return drop_bytes_[static_cast<size_t>(r)][bin];
    }

    const std::vector<ForwardRec>& forwarded() const { return forwarded_; }
    const std::vector<LatencySample>& latency() const { return latency_; }
    const std::vector<SyncSample>& sync_series() const { return sync_; }

    std::array<uint64_t, kDropReasonCount> drop_frames_total;
    std::array<uint64_t, kDropReasonCount> drop_bytes_total;
    BridgeCounters bridge;  // final counter snapshot
    LinkStats link;

    // CSV and JSON emission; returns the list of files written.
    std::vector<std::string> write_csv(const std::string& out_dir) const;
    std::string summary_json(const std::string& scenario_name) const;

private:
    Duration duration_ns_;
    Duration bin_ns_;
    size_t bins_;
    std::array<std::vector<ColorBin>, 3> color_bins_;
    std::vector<uint64_t> arrival_bytes_;
    std::array<std::vector<uint64_t>, kDropReasonCount> drop_bytes_;
    std::vector<ForwardRec> forwarded_;
    std::vector<LatencySample> latency_;
    std::vector<SyncSample> sync_;
};

}  // namespace psfp
