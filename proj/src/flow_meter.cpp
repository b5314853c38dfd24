#include "psfp/flow_meter.hpp"

namespace psfp {

namespace {

using u128 = unsigned __int128;

uint64_t refill_bucket(uint64_t level, uint64_t cap, uint64_t rate_bps,
                       Duration elapsed_ns) {
    u128 next = static_cast<u128>(level) + static_cast<u128>(rate_bps) * elapsed_ns;
    if (next > cap) next = cap;
    return static_cast<uint64_t>(next);
}

}  // namespace

const char* to_string(Color c) {
    switch (c) {
        case Color::Green: return "green";
        case Color::Yellow: return "yellow";
        case Color::Red: return "red";
    }
    return "?";
}

TrTcm::TrTcm(const TrTcmConfig& cfg) : cfg_(cfg) {
    cap_c_ = cfg.cbs_bytes * kUnitsPerByte;
    cap_e_ = cfg.ebs_bytes * kUnitsPerByte;
    // Buckets start completely filled.
    level_c_ = cap_c_;
    level_e_ = cap_e_;
}

void TrTcm::refill(Timestamp48 now) {
    Duration elapsed = wrap_diff(now, last_update_);
    if (elapsed == 0) return;
    level_c_ = refill_bucket(level_c_, cap_c_, cfg_.cir_bps, elapsed);
    level_e_ = refill_bucket(level_e_, cap_e_, cfg_.eir_bps, elapsed);
    last_update_ = now;
}

Color TrTcm::meter(uint32_t frame_bytes, Color pre_color, Timestamp48 now) {
    refill(now);
    last_now_ = now;
    uint64_t need = static_cast<uint64_t>(frame_bytes) * kUnitsPerByte;
    bool skip_c = cfg_.color_mode == ColorMode::Aware && pre_color == Color::Yellow;
    if (!skip_c && level_c_ >= need) {
        level_c_ -= need;
        return Color::Green;
    }
    if (level_e_ >= need) {
        level_e_ -= need;
        return Color::Yellow;
    }
    return Color::Red;
}

PolicyResult TrTcm::apply_color_policy(Color color, bool pre_colored_yellow) {
    if (color == Color::Red) {
        if (cfg_.mark_all_red && !blocked_) {
            blocked_ = true;
            blocked_since_ = last_now_;
        }
        return {MeterAction::Drop, Color::Red, false};
    }
    if (cfg_.drop_on_yellow && (color == Color::Yellow || pre_colored_yellow)) {
        // Yellow-labeled frames are marked red and dropped.
        if (cfg_.mark_all_red && !blocked_) {
            blocked_ = true;
            blocked_since_ = last_now_;
        }
        return {MeterAction::Drop, Color::Red, true};
    }
    if (color == Color::Yellow) return {MeterAction::ForwardWithDei, Color::Yellow, false};
    return {MeterAction::Forward, Color::Green, false};
}

}  // namespace psfp
