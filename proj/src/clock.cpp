#include "pwc/clock.hpp"

#include <bit>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace pwc {

namespace {

constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

void check_u(unsigned u) {
    if (u == 0 || u >= 64) {
        throw std::invalid_argument("u must satisfy 0 < u < 64");
    }
}

std::uint64_t low_mask(unsigned u) {
    return (std::uint64_t{1} << u) - 1;
}

}  // namespace

void ClockParams::validate() const {
    check_u(u);
}

void OverflowPolicy::validate() const {
    if (mode == Mode::Discard && discard_threshold == 0) {
        throw std::invalid_argument("Discard policy needs discard_threshold > 0");
    }
}

Ticks mask_clpt(Ticks raw_pt, unsigned u) {
    check_u(u);
    return raw_pt & ~low_mask(u);
}

SplitParts split(PwcTimestamp ts, unsigned u) {
    check_u(u);
    return SplitParts{ts.value >> u, ts.value & low_mask(u)};
}

unsigned bits_needed(PwcTimestamp ts, unsigned u) {
    return static_cast<unsigned>(std::bit_width(split(ts, u).lpt));
}

Ticks SteadyClockSource::now() {
    const auto t = std::chrono::steady_clock::now().time_since_epoch();
    return static_cast<Ticks>(
        std::chrono::duration_cast<std::chrono::microseconds>(t).count());
}

PwcClock::PwcClock(ClockParams params, PhysicalClockSource& source)
    : params_(params), source_(source) {
    params_.validate();
    pwc_.value = mask_clpt(source_.now(), params_.u);
}

PwcTimestamp PwcClock::stamp_locked(std::optional<PwcTimestamp> incoming) {
    if (pwc_.value == kMax || (incoming && incoming->value == kMax)) {
        throw std::overflow_error("64-bit PWC exhausted");
    }
    Ticks clpt = mask_clpt(source_.now(), params_.u);
    std::uint64_t candidate = std::max(pwc_.value + 1, clpt);
    if (incoming) {
        candidate = std::max(candidate, incoming->value + 1);
    }
    if (pending_u_ && candidate >= pending_u_->at.value) {
        params_.u = pending_u_->new_u;
        pending_u_.reset();
        clpt = mask_clpt(source_.now(), params_.u);
        candidate = std::max(pwc_.value + 1, clpt);
        if (incoming) {
            candidate = std::max(candidate, incoming->value + 1);
        }
    }
    pwc_.value = candidate;
    return pwc_;
}

PwcTimestamp PwcClock::on_local() {
    std::lock_guard lock(mu_);
    return stamp_locked(std::nullopt);
}

PwcTimestamp PwcClock::on_send() {
    std::lock_guard lock(mu_);
    return stamp_locked(std::nullopt);
}

PwcTimestamp PwcClock::on_receive(PwcTimestamp msg_ts) {
    std::lock_guard lock(mu_);
    return stamp_locked(msg_ts);
}

OverflowCheck PwcClock::would_overflow_locked(std::optional<PwcTimestamp> incoming) const {
    std::uint64_t cand = pwc_.value;
    if (incoming && incoming->value > cand) {
        cand = incoming->value;
    }
    if (cand == kMax) {
        throw std::overflow_error("64-bit PWC exhausted");
    }
    const Ticks clpt = mask_clpt(source_.now(), params_.u);
    const bool ovf = ((cand + 1) & low_mask(params_.u)) == 0 && cand >= clpt;
    return OverflowCheck{ovf, ovf ? (cand + 1) - clpt : 0};
}

OverflowCheck PwcClock::would_overflow(std::optional<PwcTimestamp> incoming) const {
    std::lock_guard lock(mu_);
    return would_overflow_locked(incoming);
}

StampOutcome PwcClock::guarded_stamp(EventKind kind,
                                     std::optional<PwcTimestamp> incoming,
                                     const OverflowPolicy& policy) {
    if ((kind == EventKind::Receive) != incoming.has_value()) {
        throw std::invalid_argument("incoming timestamp present iff kind is Receive");
    }
    policy.validate();
    std::lock_guard lock(mu_);
    if (policy.mode != OverflowPolicy::Mode::Unguarded) {
        const OverflowCheck check = would_overflow_locked(incoming);
        if (check.overflow) {
            if (policy.mode == OverflowPolicy::Mode::Discard &&
                check.wait_ticks > policy.discard_threshold) {
                return StampOutcome{StampOutcome::Status::Discarded, {}, 0};
            }
            // Report the boundary value the stamp will take once clpt has
            // caught up; state is untouched until the caller retries.
            const std::uint64_t cand =
                incoming && incoming->value > pwc_.value ? incoming->value : pwc_.value;
            return StampOutcome{StampOutcome::Status::Delayed,
                                PwcTimestamp{cand + 1}, check.wait_ticks};
        }
    }
    return StampOutcome{StampOutcome::Status::Timestamped, stamp_locked(incoming), 0};
}

bool PwcClock::sanity_reset(Ticks epsilon_ticks) {
    std::lock_guard lock(mu_);
    const Ticks clpt = mask_clpt(source_.now(), params_.u);
    const std::uint64_t span = epsilon_ticks + (std::uint64_t{1} << params_.u);
    const std::uint64_t hi = clpt > kMax - span ? kMax : clpt + span;
    if (pwc_.value >= clpt && pwc_.value <= hi) {
        return false;
    }
    pwc_.value = clpt;
    return true;
}

void PwcClock::schedule_u_change(unsigned new_u, PwcTimestamp switch_at) {
    check_u(new_u);
    std::lock_guard lock(mu_);
    if (switch_at.value <= pwc_.value) {
        throw std::invalid_argument("u switch must be scheduled in the future");
    }
    pending_u_ = PendingU{new_u, switch_at};
}

PwcTimestamp PwcClock::last() const {
    std::lock_guard lock(mu_);
    return pwc_;
}

unsigned PwcClock::u() const {
    std::lock_guard lock(mu_);
    return params_.u;
}

void PwcClock::corrupt(PwcTimestamp v) {
    std::lock_guard lock(mu_);
    pwc_ = v;
}

}  // namespace pwc
