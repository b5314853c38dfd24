#pragma once

// Randomized property suites shared by the unit tests and the acceptance
// runner. Each returns the number of failing cases (0 = pass).

#include <cstddef>
#include <cstdint>

namespace psfp::props {

// End-to-end stream gate phase correctness: relative_position + apply_delta +
// truncated range match equals the unbounded-integer modular oracle, with
// arrival times straddling the 2^48 wrap and tick jitter beyond h.
size_t gate_end_to_end(uint64_t seed, size_t cases);

// Flow meter equals the 1 ns-step token simulator byte for byte, including
// the bucket levels after every frame.
size_t meter_equivalence(uint64_t seed, size_t traces, size_t frames_per_trace);

// Scheduler invariants on randomized small inputs: LCM minimality and
// divisibility, expansion tiling (disjoint, sorted, exact open coverage),
// and idempotence of re-expansion.
size_t scheduler_invariants(uint64_t seed, size_t cases);

// Accumulated tick drift under constant injected jitter matches the
// (k-1)*jitter mod h accumulation oracle at every tick.
size_t eps1_accumulation(uint64_t seed, size_t cases);

}  // namespace psfp::props
