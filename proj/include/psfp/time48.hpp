#pragma once

#include <cstdint>

namespace psfp {

// All data-path time is integer nanoseconds in a 48-bit wrap-around counter,
// matching the hardware timestamp width this models. No floating point.
inline constexpr int kTimestampBits = 48;
inline constexpr uint64_t kTimestampMask = (uint64_t{1} << kTimestampBits) - 1;
inline constexpr uint64_t kTimestampMax = kTimestampMask;  // 2^48 - 1 ns

// Nanosecond timestamp, always < 2^48. Arithmetic is modulo 2^48.
using Timestamp48 = uint64_t;
// Nanosecond duration.
using Duration = uint64_t;

constexpr Timestamp48 wrap48(uint64_t v) { return v & kTimestampMask; }

// (a - b) mod 2^48. Equals a - b when a >= b, else 2^48 - b + a.
constexpr Duration wrap_diff(Timestamp48 a, Timestamp48 b) {
    return (a - b) & kTimestampMask;
}

constexpr Timestamp48 wrap_add(Timestamp48 t, uint64_t d) {
    return (t + d) & kTimestampMask;
}

// A 20-bit slice of the 48-bit timestamp used as the range-match key for
// gate slices. low_bit selects the granularity (2^low_bit ns); the window
// spans 2^(low_bit+20) ns, which bounds the hyperperiod length.
struct TruncationWindow {
    static constexpr int kWidth = 20;

    int low_bit = 11;  // 2^11 ns = 2048 ns granularity, ~2.1 s span

    constexpr bool valid() const {
        return low_bit >= 0 && low_bit + kWidth <= kTimestampBits;
    }
    constexpr uint64_t granularity() const { return uint64_t{1} << low_bit; }
    constexpr uint64_t span() const { return uint64_t{1} << (low_bit + kWidth); }

    // Bits [low_bit, low_bit + 19] of t.
    constexpr uint32_t truncate(Timestamp48 t) const {
        return static_cast<uint32_t>((t >> low_bit) & ((uint64_t{1} << kWidth) - 1));
    }
};

}  // namespace psfp
