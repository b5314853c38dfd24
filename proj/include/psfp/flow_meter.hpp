#pragma once

#include <cstdint>
#include <optional>

#include "psfp/time48.hpp"

namespace psfp {

enum class Color : uint8_t { Green, Yellow, Red };

const char* to_string(Color c);

enum class ColorMode : uint8_t { Blind, Aware };

struct TrTcmConfig {
    uint64_t cir_bps = 0;    // committed information rate
    uint64_t eir_bps = 0;    // excess information rate
    uint64_t cbs_bytes = 0;  // capacity of bucket C
    uint64_t ebs_bytes = 0;  // capacity of bucket E
    ColorMode color_mode = ColorMode::Blind;
    bool drop_on_yellow = false;
    bool mark_all_red = false;
};

enum class MeterAction : uint8_t { Forward, ForwardWithDei, Drop };

struct PolicyResult {
    MeterAction action = MeterAction::Forward;
    Color final_color = Color::Green;
    bool recolored_yellow = false;  // dropped via DropOnYellow
};

// Two-rate three-color token bucket. Buckets C and E fill independently at
// CIR and EIR and start full. Token refill is exact integer arithmetic: the
// fill level is kept in units of 1/(8*10^9) byte, so rate(bits/s) * elapsed(ns)
// adds to the level without rounding and results are platform-independent.
class TrTcm {
public:
    explicit TrTcm(const TrTcmConfig& cfg);

    // Lazily refill both buckets, then color the frame and consume tokens:
    // enough in C => Green, else enough in E => Yellow, else Red (consumes
    // nothing). In Aware mode a yellow pre-color skips bucket C.
    Color meter(uint32_t frame_bytes, Color pre_color, Timestamp48 now);

    // PSFP color policy. pre_colored_yellow is the ingress DEI flag; together
    // with a meter-colored Yellow it triggers DropOnYellow. A frame marked red
    // permanently blocks the meter when MarkAllFramesRed is set.
    PolicyResult apply_color_policy(Color color, bool pre_colored_yellow);

    bool blocked() const { return blocked_; }
    std::optional<Timestamp48> blocked_since() const { return blocked_since_; }
    void reset_block() {
        blocked_ = false;
        blocked_since_.reset();
    }

    uint64_t tokens_c_bytes() const { return static_cast<uint64_t>(level_c_ / kUnitsPerByte); }
    uint64_t tokens_e_bytes() const { return static_cast<uint64_t>(level_e_ / kUnitsPerByte); }

    const TrTcmConfig& config() const { return cfg_; }
    void set_drop_on_yellow(bool v) { cfg_.drop_on_yellow = v; }
    void set_mark_all_red(bool v) { cfg_.mark_all_red = v; }
    void set_color_mode(ColorMode m) { cfg_.color_mode = m; }

    static constexpr uint64_t kUnitsPerByte = 8ull * 1000000000ull;

private:
    void refill(Timestamp48 now);

    TrTcmConfig cfg_;
    uint64_t level_c_ = 0;  // units of 1/(8e9) byte
    uint64_t level_e_ = 0;
    uint64_t cap_c_ = 0;
    uint64_t cap_e_ = 0;
    Timestamp48 last_update_ = 0;
    bool blocked_ = false;
    std::optional<Timestamp48> blocked_since_;
    Timestamp48 last_now_ = 0;
};

}  // namespace psfp
