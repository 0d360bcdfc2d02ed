#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pwc/clock.hpp"
#include "pwc/oracle.hpp"
#include "pwc/rng.hpp"

namespace pwc {

enum class Topology : std::uint8_t { Random, TimeLeader, HubSpoke };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

struct FaultSpec {
    enum class Kind : std::uint8_t {
        ClockJumpForward,
        NegativeLeap,
        SkewViolation,
        PwcCorruption,
    };
    Ticks at = 0;          // simulated microsecond
    std::uint32_t process = 0;
    Kind kind = Kind::ClockJumpForward;
    // Ticks for the clock faults; for PwcCorruption the new pwc is
    // clpt + value at injection time.
    std::uint64_t value = 0;
};

// One tick = 1 us. Defaults sit inside the ranges the experiments sweep:
// delta_se 1-12, delta_re 1-13, latency 1-20 ms, eps 6.25-400 ms,
// S 1K-64K msgs/node/s, N 8-64.
struct SimParams {
    std::uint32_t n_processes = 8;
    Topology topology = Topology::Random;
    Ticks epsilon_us = 6250;
    Ticks delta_se_us = 1;
    Ticks delta_re_us = 1;
    Ticks delta_loc_us = 1;
    Ticks latency_min_us = 1000;
    Ticks latency_max_us = 20000;
    std::uint64_t send_rate_per_s = 1000;   // S, per node
    std::uint64_t local_rate_per_s = 0;     // local events off by default
    double duration_s = 1.0;
    unsigned u = 10;
    OverflowPolicy policy{};
    std::uint64_t seed = 1;
    Ticks skew_walk_step_us = 1;
    // Clock drift budget: each process's offset accumulates at most this many
    // microseconds of random movement per million simulated microseconds.
    // Hosts under NTP drift tens of ppm; the default is deliberately looser.
    std::uint64_t skew_drift_ppm = 100000;
    // Minimum spacing between any two events on one process. 1 keeps the
    // one-event-per-tick rule; raise to 2^u to force one event per hpt tick.
    Ticks min_event_gap_us = 1;
    std::vector<FaultSpec> faults;
    std::vector<Ticks> suspend_at;  // each opens a send-free window [t, t+2*eps]
    bool record_log = true;
    bool track_vclocks = true;
    // Per-event max-clpt snapshots for the envelope check. Switching this
    // off keeps huge sweeps fast; the per-millisecond spread check stays on.
    bool per_event_bound_snapshots = true;
    bool co_run_hlc = true;
    // End the run at the first increment-driven overflow. Makes scanning for
    // the smallest wait-free u cheap: non-viable candidates fail fast.
    bool stop_on_overflow = false;
    std::vector<unsigned> u_override;  // per-process u (mixed-u runs); empty = uniform

    Ticks duration_ticks() const;
    void validate() const;
};

struct SimResult {
    std::uint64_t total_events = 0;
    std::uint64_t bits_histogram[64] = {};
    std::uint64_t delayed = 0;
    std::uint64_t discarded = 0;
    unsigned max_bits = 0;
    std::uint64_t causality_violations = 0;
    std::uint64_t bound_violations = 0;
    std::uint64_t resets = 0;
    // Increment-driven lpt wraps (the guard condition at stamp time).
    std::uint64_t overflow_events = 0;
    // Causal edges whose successor is predecessor + 1 with lpt = 0.
    std::uint64_t def2_edges = 0;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t hlc_violations = 0;
    std::uint64_t hlc_encode_failures = 0;
};

std::pair<SimResult, EventLog> run_simulation(const SimParams& params);

// Smallest u at which the workload never needs to delay an event. Chain
// depth depends on the masking granularity itself, so this is a fixed point:
// scan u upward, re-running until no stamp would have tripped the overflow
// guard (increment past the window while the physical clock lags).
unsigned scan_waitfree_u(const SimParams& base, unsigned u_lo = 1, unsigned u_hi = 16);

// Destination choice: uniform over the other processes, except hub-and-spoke
// where spokes always address the hub (index 0) and the hub picks a spoke.
std::uint32_t pick_destination(Topology topology, std::uint32_t sender,
                               std::uint32_t n_processes, Xoshiro256& rng);

/// Bounded-skew clock model. Each process reads wall time plus a private
/// offset; offsets perform a seeded random walk clamped to [0, eps] with the
/// downward step capped at one tick per elapsed tick, so readings stay
/// monotonic unless a fault pushes them around. TimeLeader pins process 0
/// near the top of the band.
class SkewWalk {
public:
    SkewWalk(std::uint32_t n_processes, Topology topology, Ticks epsilon,
             Ticks step, std::uint64_t drift_ppm, std::uint64_t seed);

    Ticks pt(std::uint32_t process, Ticks t);
    void jump(std::uint32_t process, std::int64_t delta);
    void pin_to(std::uint32_t process, std::int64_t offset);
    std::int64_t offset(std::uint32_t process) const { return offset_[process]; }
    std::int64_t leader_offset() const { return leader_offset_; }

private:
    Ticks band_hi(std::uint32_t process) const;

    Topology topology_;
    Ticks epsilon_;
    Ticks step_;
    std::uint64_t drift_ppm_;
    std::int64_t leader_offset_ = 0;
    std::vector<std::int64_t> offset_;
    std::vector<Ticks> last_t_;
    std::vector<std::uint64_t> drift_budget_ps_;
    std::vector<Xoshiro256> rng_;
};

// One CSV row per run: every scalar parameter, then the headline counters and
// the first 16 histogram buckets.
std::string sim_csv_header();
std::string sim_csv_row(const SimParams& params, const SimResult& result);
SimParams sim_params_from_csv_row(const std::string& header, const std::string& row);

}  // namespace pwc
