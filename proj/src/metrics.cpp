#include "psfp/metrics.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace psfp {

namespace {
using u128 = unsigned __int128;

uint64_t to_bps(uint64_t bytes, Duration bin_ns) {
    return static_cast<uint64_t>(static_cast<u128>(bytes) * 8 * 1000000000ull / bin_ns);
}
}  // namespace

MetricsLog::MetricsLog(Duration duration_ns, Duration bin_ns)
    : duration_ns_(duration_ns), bin_ns_(bin_ns) {
    if (bin_ns == 0 || duration_ns % bin_ns != 0) {
        throw std::invalid_argument("bin width must divide the run duration");
    }
    bins_ = static_cast<size_t>(duration_ns / bin_ns);
    for (auto& v : color_bins_) v.resize(bins_);
    arrival_bytes_.resize(bins_);
    for (auto& v : drop_bytes_) v.resize(bins_);
    drop_frames_total.fill(0);
    drop_bytes_total.fill(0);
}

void MetricsLog::record_color(Timestamp48 t, Color color, uint32_t bytes) {
    ColorBin& b = color_bins_[static_cast<size_t>(color)][bin_of(t)];
    b.bytes += bytes;
    b.frames++;
}

void MetricsLog::record_psfp_arrival(Timestamp48 t, uint32_t bytes) {
    arrival_bytes_[bin_of(t)] += bytes;
}

void MetricsLog::record_drop(Timestamp48 t, DropReason reason, uint32_t bytes) {
    drop_bytes_[static_cast<size_t>(reason)][bin_of(t)] += bytes;
    drop_frames_total[static_cast<size_t>(reason)]++;
    drop_bytes_total[static_cast<size_t>(reason)] += bytes;
}

void MetricsLog::record_forward(Timestamp48 arrival, Timestamp48 decision) {
    forwarded_.push_back({arrival, decision, forwarded_.size() + 1});
}

void MetricsLog::record_latency(Timestamp48 arrival, Timestamp48 departure,
                                uint32_t source_id) {
    latency_.push_back({arrival, departure, wrap_diff(departure, arrival), source_id});
}

void MetricsLog::record_sync(const SyncSample& s) { sync_.push_back(s); }

uint64_t MetricsLog::color_rate_bps(size_t bin, Color c) const {
    return to_bps(color_bins_[static_cast<size_t>(c)][bin].bytes, bin_ns_);
}

std::vector<std::string> MetricsLog::write_csv(const std::string& out_dir) const {
    std::vector<std::string> written;
    auto open = [&](const std::string& name) {
        std::ofstream f(out_dir + "/" + name, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + out_dir + "/" + name);
        written.push_back(name);
        return f;
    };

    {
        std::ofstream f = open("rates.csv");
        f << "bin_start_ns,green_bps,yellow_bps,red_bps,green_frames,yellow_frames,"
             "red_frames\n";
        for (size_t b = 0; b < bins_; ++b) {
            f << b * bin_ns_ << ',' << color_rate_bps(b, Color::Green) << ','
              << color_rate_bps(b, Color::Yellow) << ',' << color_rate_bps(b, Color::Red)
              << ',' << color_bin(b, Color::Green).frames << ','
              << color_bin(b, Color::Yellow).frames << ','
              << color_bin(b, Color::Red).frames << '\n';
        }
    }
    {
        std::ofstream f = open("forwarded.csv");
        f << "arrival_ns,decision_ns,cumulative\n";
        for (const ForwardRec& r : forwarded_) {
            f << r.arrival << ',' << r.decision << ',' << r.cumulative << '\n';
        }
    }
    {
        std::ofstream f = open("latency.csv");
        f << "arrival_ns,departure_ns,latency_ns,source\n";
        for (const LatencySample& s : latency_) {
            f << s.arrival << ',' << s.departure << ',' << s.latency_ns << ','
              << s.source_id << '\n';
        }
    }
    {
        std::ofstream f = open("drops.csv");
        f << "reason,frames,bytes\n";
        for (int i = 0; i < kDropReasonCount; ++i) {
            f << to_string(static_cast<DropReason>(i)) << ',' << drop_frames_total[i]
              << ',' << drop_bytes_total[i] << '\n';
        }
    }
    if (!sync_.empty()) {
        std::ofstream f = open("sync.csv");
        f << "time_ns,port,epsilon1_ns,epsilon2_ns,delta_ns\n";
        for (const SyncSample& s : sync_) {
            f << s.time << ',' << s.port << ',' << s.eps1_ns << ',' << s.eps2_ns << ','
              << s.delta_ns << '\n';
        }
    }
    return written;
}

std::string MetricsLog::summary_json(const std::string& scenario_name) const {
    nlohmann::json j;
    j["scenario"] = scenario_name;
    j["duration_ns"] = duration_ns_;
    j["bin_ns"] = bin_ns_;
    j["bridge"] = {
        {"ingested", bridge.ingested},
        {"forwarded", bridge.forwarded},
        {"best_effort", bridge.best_effort},
        {"recirc_in_flight", bridge.recirc_in_flight},
        {"recirc_leg_bytes", bridge.recirc_leg_bytes},
        {"relative_position_fallbacks", bridge.relpos_fallbacks},
        {"conserved", bridge.conserved()},
    };
    nlohmann::json drops;
    for (int i = 0; i < kDropReasonCount; ++i) {
        drops[to_string(static_cast<DropReason>(i))] = {
            {"frames", drop_frames_total[i]}, {"bytes", drop_bytes_total[i]}};
    }
    j["drops"] = drops;
    j["link"] = {
        {"enqueued", link.enqueued},
        {"departed", link.departed},
        {"queue_dropped", link.queue_dropped},
        {"queue_dropped_bytes", link.queue_dropped_bytes},
    };
    uint64_t color_bytes[3] = {0, 0, 0};
    uint64_t color_frames[3] = {0, 0, 0};
    for (size_t b = 0; b < bins_; ++b) {
        for (int c = 0; c < 3; ++c) {
            color_bytes[c] += color_bins_[c][b].bytes;
            color_frames[c] += color_bins_[c][b].frames;
        }
    }
    for (int c = 0; c < 3; ++c) {
        j["colors"][to_string(static_cast<Color>(c))] = {
            {"bytes", color_bytes[c]}, {"frames", color_frames[c]}};
    }
    j["forwarded_frames"] = forwarded_.size();
    j["latency_samples"] = latency_.size();
    return j.dump(2) + "\n";
}

}  // namespace psfp
