#pragma once

#include <cstdint>
#include <mutex>
#include <optional>

namespace pwc {

// One tick is whatever the clock source counts in. The simulator and the
// network harness both use 1 tick = 1 microsecond.
using Ticks = std::uint64_t;

// A 64-bit timestamp whose low `u` bits carry logical-clock increments.
// Ordering IS plain integer ordering; that is the whole point.
struct PwcTimestamp {
    std::uint64_t value{0};
    friend constexpr auto operator<=>(const PwcTimestamp&, const PwcTimestamp&) = default;
};

struct ClockParams {
    unsigned u = 6;                 // extraneous low bits, 0 < u < 64
    std::uint64_t tick_unit_ns = 1000;  // informational; 1 us default

    void validate() const;
};

// Zero the low u bits of a raw reading.
Ticks mask_clpt(Ticks raw_pt, unsigned u);

struct SplitParts {
    Ticks hpt;
    Ticks lpt;
};

SplitParts split(PwcTimestamp ts, unsigned u);

// Minimal bit width of the lpt part; 0 is reserved for lpt == 0.
unsigned bits_needed(PwcTimestamp ts, unsigned u);

class PhysicalClockSource {
public:
    virtual ~PhysicalClockSource() = default;
    virtual Ticks now() = 0;
    virtual bool monotonic() const { return true; }
};

// Settable source for tests and the simulator.
class ManualClockSource final : public PhysicalClockSource {
public:
    explicit ManualClockSource(Ticks start = 0, bool monotonic = true)
        : value_(start), monotonic_(monotonic) {}

    Ticks now() override { return value_; }
    bool monotonic() const override { return monotonic_; }
    void set(Ticks t) { value_ = t; }
    void advance(Ticks d) { value_ += d; }

private:
    Ticks value_;
    bool monotonic_;
};

// std::chrono::steady_clock scaled to 1 us ticks.
class SteadyClockSource final : public PhysicalClockSource {
public:
    Ticks now() override;
};

struct OverflowPolicy {
    enum class Mode { Unguarded, Wait, Discard };
    Mode mode = Mode::Unguarded;
    Ticks discard_threshold = 0;  // Discard mode: wait longer than this => drop

    void validate() const;
};

enum class EventKind : std::uint8_t { Local = 0, Send = 1, Receive = 2 };

struct StampOutcome {
    enum class Status : std::uint8_t { Timestamped, Delayed, Discarded };
    Status status = Status::Timestamped;
    PwcTimestamp ts{};       // issued value, or the boundary value a Delayed stamp will take
    Ticks wait_ticks = 0;    // > 0 iff Delayed
};

struct OverflowCheck {
    bool overflow = false;
    Ticks wait_ticks = 0;
};

/// Per-process PWC state. Every stamping operation is an atomic
/// read-modify-write over (pwc, source.now()); the internal mutex provides
/// the mutual-exclusion contract, so one clock may be shared by a send loop
/// and a receive loop. Clocks of different processes are independent.
class PwcClock {
public:
    PwcClock(ClockParams params, PhysicalClockSource& source);

    PwcTimestamp on_local();
    PwcTimestamp on_send();
    PwcTimestamp on_receive(PwcTimestamp msg_ts);

    // Overflow guard: would stamping right now push lpt past its window
    // while the increment (not the physical clock) decides the value?
    OverflowCheck would_overflow(std::optional<PwcTimestamp> incoming = std::nullopt) const;

    // Guarded stamping. Wait/Discard never mutate state when they defer or
    // drop; the caller blocks (or reschedules) and retries.
    StampOutcome guarded_stamp(EventKind kind,
                               std::optional<PwcTimestamp> incoming,
                               const OverflowPolicy& policy);

    // Transient-fault remedy: pull pwc back to clpt when it has left the
    // plausible envelope [clpt, clpt + eps + 2^u]. Returns true iff it fired.
    bool sanity_reset(Ticks epsilon_ticks);

    // Switch to new_u for every stamp whose resulting value lands at or past
    // switch_at; earlier stamps keep the old masking.
    void schedule_u_change(unsigned new_u, PwcTimestamp switch_at);

    PwcTimestamp last() const;
    unsigned u() const;

    // Test hook: force the state cell (models external perturbation).
    void corrupt(PwcTimestamp v);

private:
    PwcTimestamp stamp_locked(std::optional<PwcTimestamp> incoming);
    OverflowCheck would_overflow_locked(std::optional<PwcTimestamp> incoming) const;

    ClockParams params_;
    PhysicalClockSource& source_;
    PwcTimestamp pwc_;

    struct PendingU {
        unsigned new_u;
        PwcTimestamp at;
    };
    std::optional<PendingU> pending_u_;

    mutable std::mutex mu_;
};

}  // namespace pwc
