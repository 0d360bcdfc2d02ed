#include "pwc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "pwc/hlc.hpp"

namespace pwc {

std::string to_string(Topology t) {
    switch (t) {
        case Topology::Random: return "random";
        case Topology::TimeLeader: return "time_leader";
        case Topology::HubSpoke: return "hub_spoke";
    }
    return "?";
}

Topology topology_from_string(const std::string& s) {
    if (s == "random") return Topology::Random;
    if (s == "time_leader") return Topology::TimeLeader;
    if (s == "hub_spoke") return Topology::HubSpoke;
    throw std::invalid_argument("unknown topology: " + s);
}

Ticks SimParams::duration_ticks() const {
    return static_cast<Ticks>(std::llround(duration_s * 1e6));
}

void SimParams::validate() const {
    if (n_processes == 0) throw std::invalid_argument("n_processes must be positive");
    if (n_processes < 2 && (send_rate_per_s > 0 || topology == Topology::HubSpoke)) {
        throw std::invalid_argument("message traffic needs at least two processes");
    }
    if (u == 0 || u >= 64) throw std::invalid_argument("u must satisfy 0 < u < 64");
    if (delta_se_us == 0 || delta_re_us == 0 || delta_loc_us == 0) {
        throw std::invalid_argument("delta_se/delta_re/delta_loc must be positive");
    }
    if (latency_min_us == 0 || latency_max_us < latency_min_us) {
        throw std::invalid_argument("latency range must satisfy 1 <= min <= max");
    }
    if (send_rate_per_s > 1000000) {
        throw std::invalid_argument("send rate above one message per tick");
    }
    if (duration_s <= 0) throw std::invalid_argument("duration must be positive");
    if (min_event_gap_us == 0) throw std::invalid_argument("min_event_gap must be positive");
    policy.validate();
    for (const FaultSpec& f : faults) {
        if (f.process >= n_processes) throw std::invalid_argument("fault process out of range");
        if (f.at > duration_ticks()) throw std::invalid_argument("fault outside run duration");
    }
    if (!u_override.empty() && u_override.size() != n_processes) {
        throw std::invalid_argument("u_override must list one value per process");
    }
    for (unsigned uo : u_override) {
        if (uo == 0 || uo >= 64) throw std::invalid_argument("u_override out of range");
    }
}

std::uint32_t pick_destination(Topology topology, std::uint32_t sender,
                               std::uint32_t n_processes, Xoshiro256& rng) {
    if (n_processes < 2) throw std::invalid_argument("need at least two processes");
    if (topology == Topology::HubSpoke) {
        if (sender != 0) return 0;
        return 1 + static_cast<std::uint32_t>(rng.below(n_processes - 1));
    }
    const auto d = static_cast<std::uint32_t>(rng.below(n_processes - 1));
    return d >= sender ? d + 1 : d;
}

SkewWalk::SkewWalk(std::uint32_t n_processes, Topology topology, Ticks epsilon,
                   Ticks step, std::uint64_t drift_ppm, std::uint64_t seed)
    : topology_(topology),
      epsilon_(epsilon),
      step_(step),
      drift_ppm_(drift_ppm),
      offset_(n_processes, 0),
      last_t_(n_processes, 0),
      drift_budget_ps_(n_processes, 0) {
    std::uint64_t sm = seed;
    rng_.reserve(n_processes);
    for (std::uint32_t p = 0; p < n_processes; ++p) {
        rng_.emplace_back(splitmix64(sm));
    }
    if (topology_ == Topology::TimeLeader && epsilon_ > 0) {
        leader_offset_ = static_cast<std::int64_t>(epsilon_ - epsilon_ / 16);
        offset_[0] = leader_offset_;
    }
}

Ticks SkewWalk::band_hi(std::uint32_t process) const {
    (void)process;
    if (topology_ == Topology::TimeLeader) {
        // Followers may wander up to the pinned leader, never past it.
        return static_cast<Ticks>(leader_offset_);
    }
    return epsilon_;
}

Ticks SkewWalk::pt(std::uint32_t process, Ticks t) {
    const Ticks prev_t = last_t_[process];
    const bool pinned = topology_ == Topology::TimeLeader && process == 0;
    if (t > prev_t && !pinned && step_ > 0 && drift_ppm_ > 0 && epsilon_ > 0) {
        const Ticks k = t - prev_t;
        // 1 us of elapsed time earns drift_ppm picoseconds of movement budget;
        // the movement itself is further capped at step_ per elapsed tick so
        // readings stay monotonic.
        drift_budget_ps_[process] += k * drift_ppm_;
        Ticks span = drift_budget_ps_[process] / 1000000;
        span = std::min(span, k * step_);
        span = std::min(span, epsilon_);
        drift_budget_ps_[process] -= span * 1000000;
        if (span == 0) {
            if (t > prev_t) last_t_[process] = t;
            const std::int64_t idle = static_cast<std::int64_t>(t) + offset_[process];
            return idle > 0 ? static_cast<Ticks>(idle) : 0;
        }
        const std::int64_t off = offset_[process];
        const std::int64_t hi_band = static_cast<std::int64_t>(band_hi(process));
        std::int64_t lo, hi;
        if (off < 0) {
            // Below the band (negative leap): drift back up only.
            lo = off;
            hi = std::min<std::int64_t>(off + static_cast<std::int64_t>(span), hi_band);
        } else if (off > hi_band) {
            // Above the band (skew fault): drift back down, at most one tick
            // per elapsed tick so the reading stays monotonic.
            lo = off - static_cast<std::int64_t>(std::min<Ticks>(k, span));
            hi = off;
        } else {
            lo = std::max<std::int64_t>(0, off - static_cast<std::int64_t>(std::min<Ticks>(k, span)));
            hi = std::min<std::int64_t>(hi_band, off + static_cast<std::int64_t>(span));
        }
        offset_[process] = lo + static_cast<std::int64_t>(
                                    rng_[process].between(0, static_cast<std::uint64_t>(hi - lo)));
    }
    if (t > prev_t) last_t_[process] = t;
    const std::int64_t reading = static_cast<std::int64_t>(t) + offset_[process];
    return reading > 0 ? static_cast<Ticks>(reading) : 0;
}

void SkewWalk::jump(std::uint32_t process, std::int64_t delta) {
    offset_[process] += delta;
}

void SkewWalk::pin_to(std::uint32_t process, std::int64_t offset) {
    offset_[process] = offset;
}

namespace {

enum ActPriority : std::uint8_t {
    kPriFault = 0,
    kPriDeliver = 1,
    kPriSend = 2,
    kPriLocal = 3,
    kPriSample = 9,
};

struct Act {
    Ticks t;
    std::uint8_t pri;
    std::uint64_t seq;
    std::uint32_t process;
    std::uint64_t payload;

    bool operator>(const Act& o) const {
        if (t != o.t) return t > o.t;
        if (pri != o.pri) return pri > o.pri;
        return seq > o.seq;
    }
};

struct Msg {
    std::uint32_t dest = 0;
    std::uint64_t src_pwc = 0;
    std::uint64_t src_event = kNoEvent;
    HlcState src_hlc{};
    bool delay_counted = false;
};

struct Proc {
    std::unique_ptr<ManualClockSource> src;
    std::unique_ptr<PwcClock> clock;
    Xoshiro256 rng;
    Ticks last_stamp_t = 0;
    bool has_stamped = false;
    Ticks last_send_t = 0;
    bool has_sent = false;
    Ticks last_recv_t = 0;
    bool has_received = false;
    Ticks last_local_t = 0;
    bool has_local = false;
    std::uint64_t last_event_id = kNoEvent;
    std::uint64_t last_event_pwc = 0;
    bool has_event = false;
    HlcState hlc{};
    bool send_delay_counted = false;
    bool local_delay_counted = false;
};

class Simulation {
public:
    explicit Simulation(const SimParams& params)
        : p_(params),
          end_(params.duration_ticks()),
          walk_(params.n_processes, params.topology, params.epsilon_us,
                params.skew_walk_step_us, params.skew_drift_ppm,
                splitmix_seed(params.seed, 0x77a1f)),
          log_(params.n_processes, params.track_vclocks) {
        std::uint64_t sm = splitmix_seed(p_.seed, 0x51e2d);
        procs_.resize(p_.n_processes);
        for (std::uint32_t i = 0; i < p_.n_processes; ++i) {
            Proc& pr = procs_[i];
            pr.src = std::make_unique<ManualClockSource>(walk_.pt(i, 0));
            ClockParams cp;
            cp.u = p_.u_override.empty() ? p_.u : p_.u_override[i];
            pr.clock = std::make_unique<PwcClock>(cp, *pr.src);
            pr.rng = Xoshiro256(splitmix64(sm));
        }
        if (p_.send_rate_per_s > 0) {
            for (std::uint32_t i = 0; i < p_.n_processes; ++i) {
                push(Act{first_gap(procs_[i], send_gap_mean()), kPriSend, i, i, 0});
            }
        }
        if (p_.local_rate_per_s > 0) {
            for (std::uint32_t i = 0; i < p_.n_processes; ++i) {
                push(Act{first_gap(procs_[i], local_gap_mean()), kPriLocal, i, i, 0});
            }
        }
        for (std::size_t i = 0; i < p_.faults.size(); ++i) {
            push(Act{p_.faults[i].at, kPriFault, i, p_.faults[i].process, i});
        }
        if (end_ >= kSampleEvery) {
            push(Act{kSampleEvery, kPriSample, 0, 0, 0});
        }
        for (Ticks s : p_.suspend_at) {
            windows_.emplace_back(s, s + 2 * p_.epsilon_us);
        }
    }

    std::pair<SimResult, EventLog> run() {
        // Each process begins with a first event whose pwc equals its clpt:
        // the initialization stamp. Later chains terminate here.
        for (std::uint32_t i = 0; i < p_.n_processes; ++i) {
            Proc& pr = procs_[i];
            const Ticks pt = read_clock(i, 0);
            const Ticks clpt = mask_clpt(pt, pr.clock->u());
            stamp_bookkeeping(i, EventKind::Local, 0, pr.clock->last(), pt, clpt, nullptr);
        }
        while (!heap_.empty() && heap_.top().t <= end_ && !stop_) {
            const Act a = heap_.top();
            heap_.pop();
            switch (a.pri) {
                case kPriFault: apply_fault(p_.faults[a.payload], a.t); break;
                case kPriDeliver: deliver(a); break;
                case kPriSend: send(a); break;
                case kPriLocal: local(a); break;
                case kPriSample: sample(a.t); break;
                default: break;
            }
        }
        return {std::move(result_), std::move(log_)};
    }

private:
    static constexpr Ticks kSampleEvery = 1000;

    static std::uint64_t splitmix_seed(std::uint64_t seed, std::uint64_t salt) {
        std::uint64_t s = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
        return splitmix64(s);
    }

    void push(Act a) { heap_.push(a); }

    Ticks send_gap_mean() const {
        return std::max<Ticks>(1, 1000000 / p_.send_rate_per_s);
    }

    Ticks local_gap_mean() const {
        return std::max<Ticks>(1, 1000000 / p_.local_rate_per_s);
    }

    static Ticks first_gap(Proc& pr, Ticks mean) {
        const Ticks lo = mean - mean / 2;
        return std::max<Ticks>(1, pr.rng.between(lo, mean + mean / 2));
    }

    Ticks draw_gap(Proc& pr, Ticks mean, Ticks floor) const {
        const Ticks lo = mean - mean / 2;
        return std::max(floor, pr.rng.between(lo, mean + mean / 2));
    }

    std::optional<Ticks> suspended_until(Ticks t) const {
        for (const auto& [from, to] : windows_) {
            if (t >= from && t <= to) return to + 1;
        }
        return std::nullopt;
    }

    // Earliest tick at which `process` may stamp an event of the given kind.
    Ticks earliest_stamp(const Proc& pr, EventKind kind, Ticks due) const {
        Ticks t = due;
        if (pr.has_stamped) {
            t = std::max(t, pr.last_stamp_t + std::max<Ticks>(1, p_.min_event_gap_us));
        }
        switch (kind) {
            case EventKind::Send:
                if (pr.has_sent) t = std::max(t, pr.last_send_t + p_.delta_se_us);
                break;
            case EventKind::Receive:
                if (pr.has_received) t = std::max(t, pr.last_recv_t + p_.delta_re_us);
                break;
            case EventKind::Local:
                if (pr.has_local) t = std::max(t, pr.last_local_t + p_.delta_loc_us);
                break;
        }
        return t;
    }

    void apply_fault(const FaultSpec& f, Ticks t) {
        switch (f.kind) {
            case FaultSpec::Kind::ClockJumpForward:
                walk_.pt(f.process, t);
                walk_.jump(f.process, static_cast<std::int64_t>(f.value));
                break;
            case FaultSpec::Kind::NegativeLeap:
                walk_.pt(f.process, t);
                walk_.jump(f.process, -static_cast<std::int64_t>(f.value));
                break;
            case FaultSpec::Kind::SkewViolation:
                walk_.pt(f.process, t);
                walk_.jump(f.process, static_cast<std::int64_t>(p_.epsilon_us + f.value));
                break;
            case FaultSpec::Kind::PwcCorruption: {
                Proc& pr = procs_[f.process];
                const Ticks pt = read_clock(f.process, t);
                const Ticks clpt = mask_clpt(pt, pr.clock->u());
                pr.clock->corrupt(PwcTimestamp{clpt + f.value});
                break;
            }
        }
    }

    Ticks read_clock(std::uint32_t process, Ticks t) {
        const Ticks pt = walk_.pt(process, t);
        procs_[process].src->set(pt);
        return pt;
    }

    // Perturbation guard before each stamp. A pwc merely below clpt is ordinary decay
    // between events (the max rule absorbs it); only a value above the
    // plausible envelope marks a perturbation worth resetting.
    void maybe_reset(Proc& pr, Ticks pt) {
        const Ticks clpt = mask_clpt(pt, pr.clock->u());
        const std::uint64_t hi = clpt + p_.epsilon_us + (std::uint64_t{1} << pr.clock->u());
        if (pr.clock->last().value > hi && pr.clock->sanity_reset(p_.epsilon_us)) {
            result_.resets += 1;
        }
    }

    void stamp_bookkeeping(std::uint32_t process, EventKind kind, Ticks t,
                           PwcTimestamp ts, Ticks pt, Ticks clpt, const Msg* msg) {
        Proc& pr = procs_[process];
        const unsigned u_now = pr.clock->u();
        const unsigned width = bits_needed(ts, u_now);
        result_.bits_histogram[width] += 1;
        result_.max_bits = std::max(result_.max_bits, width);
        result_.total_events += 1;

        const bool lpt_zero = width == 0;
        bool delta_one = false;
        if (pr.has_event) {
            if (pr.last_event_pwc >= ts.value) result_.causality_violations += 1;
            if (pr.last_event_pwc + 1 == ts.value) delta_one = true;
        }
        if (msg != nullptr) {
            if (msg->src_pwc >= ts.value) result_.causality_violations += 1;
            if (msg->src_pwc + 1 == ts.value) delta_one = true;
        }
        if (delta_one && lpt_zero) {
            result_.def2_edges += 1;
            if (ts.value > clpt) {
                result_.overflow_events += 1;
                if (p_.stop_on_overflow) stop_ = true;
            }
        }

        std::uint64_t max_clpt = kNoSnapshot;
        if (p_.per_event_bound_snapshots) {
            max_clpt = 0;
            for (std::uint32_t k = 0; k < p_.n_processes; ++k) {
                const Ticks ptk = k == process ? pt : walk_.pt(k, t);
                max_clpt = std::max(max_clpt, mask_clpt(ptk, procs_[k].clock->u()));
            }
            if (ts.value > max_clpt + (std::uint64_t{1} << u_now)) {
                result_.bound_violations += 1;
            }
        }
        if (ts.value < clpt) result_.bound_violations += 1;

        if (p_.co_run_hlc) {
            const HlcState next = msg != nullptr ? hlc_receive(pr.hlc, msg->src_hlc, pt)
                                                 : hlc_send_or_local(pr.hlc, pt);
            if (pr.has_event && !(pr.hlc < next)) result_.hlc_violations += 1;
            if (msg != nullptr && !(msg->src_hlc < next)) result_.hlc_violations += 1;
            if (next.l - pt >= (std::uint64_t{1} << kHlcDiffBits) ||
                next.c >= (std::uint64_t{1} << kHlcCounterBits)) {
                result_.hlc_encode_failures += 1;
            }
            pr.hlc = next;
        }

        if (p_.record_log) {
            const std::uint64_t id = log_.record_event(
                process, kind, pr.last_event_id,
                msg != nullptr ? msg->src_event : kNoEvent, ts.value, clpt, pt,
                max_clpt, t);
            pr.last_event_id = id;
        } else {
            pr.last_event_id = event_counter_;
        }
        ++event_counter_;
        pr.last_event_pwc = ts.value;
        pr.has_event = true;
        pr.last_stamp_t = t;
        pr.has_stamped = true;
    }

    void deliver(const Act& a) {
        Msg& m = msgs_[a.payload];
        Proc& pr = procs_[m.dest];
        const Ticks at = earliest_stamp(pr, EventKind::Receive, a.t);
        if (at > a.t) {
            if (at <= end_) push(Act{at, kPriDeliver, a.seq, m.dest, a.payload});
            return;
        }
        const Ticks pt = read_clock(m.dest, a.t);
        maybe_reset(pr, pt);
        const StampOutcome out =
            pr.clock->guarded_stamp(EventKind::Receive, PwcTimestamp{m.src_pwc}, p_.policy);
        if (out.status == StampOutcome::Status::Delayed) {
            m.delay_counted = true;
            const Ticks retry = a.t + std::max<Ticks>(1, out.wait_ticks);
            if (retry <= end_) push(Act{retry, kPriDeliver, a.seq, m.dest, a.payload});
            return;
        }
        if (out.status == StampOutcome::Status::Discarded) {
            result_.discarded += 1;
            free_msg(a.payload);
            return;
        }
        if (m.delay_counted) result_.delayed += 1;  // counted once, when stamped
        result_.received += 1;
        const Ticks clpt = mask_clpt(pt, pr.clock->u());
        stamp_bookkeeping(m.dest, EventKind::Receive, a.t, out.ts, pt, clpt, &m);
        pr.last_recv_t = a.t;
        pr.has_received = true;
        free_msg(a.payload);
    }

    void send(const Act& a) {
        const std::uint32_t p = a.process;
        Proc& pr = procs_[p];
        if (const auto until = suspended_until(a.t)) {
            if (*until <= end_) push(Act{*until, kPriSend, p, p, 0});
            return;
        }
        const Ticks at = earliest_stamp(pr, EventKind::Send, a.t);
        if (at > a.t) {
            if (at <= end_) push(Act{at, kPriSend, p, p, 0});
            return;
        }
        const Ticks pt = read_clock(p, a.t);
        maybe_reset(pr, pt);
        const StampOutcome out =
            pr.clock->guarded_stamp(EventKind::Send, std::nullopt, p_.policy);
        if (out.status == StampOutcome::Status::Delayed) {
            pr.send_delay_counted = true;
            const Ticks retry = a.t + std::max<Ticks>(1, out.wait_ticks);
            if (retry <= end_) push(Act{retry, kPriSend, p, p, 0});
            return;
        }
        if (out.status == StampOutcome::Status::Discarded) {
            result_.discarded += 1;
            pr.send_delay_counted = false;
            schedule_next_send(p, a.t);
            return;
        }
        if (pr.send_delay_counted) result_.delayed += 1;  // counted once, when stamped
        pr.send_delay_counted = false;
        result_.sent += 1;
        const Ticks clpt = mask_clpt(pt, pr.clock->u());
        stamp_bookkeeping(p, EventKind::Send, a.t, out.ts, pt, clpt, nullptr);
        pr.last_send_t = a.t;
        pr.has_sent = true;

        const std::uint32_t dest = pick_destination(p_.topology, p, p_.n_processes, pr.rng);
        const Ticks transit = pr.rng.between(p_.latency_min_us, p_.latency_max_us);
        const Ticks due = a.t + p_.delta_se_us + transit + p_.delta_re_us;
        const std::uint64_t slot = alloc_msg();
        msgs_[slot] = Msg{dest, out.ts.value, pr.last_event_id, pr.hlc, false};
        if (due <= end_) push(Act{due, kPriDeliver, msg_seq_++, dest, slot});
        else free_msg(slot);

        schedule_next_send(p, a.t);
    }

    void schedule_next_send(std::uint32_t p, Ticks now) {
        const Ticks due = now + draw_gap(procs_[p], send_gap_mean(), p_.delta_se_us);
        if (due <= end_) push(Act{due, kPriSend, p, p, 0});
    }

    void local(const Act& a) {
        const std::uint32_t p = a.process;
        Proc& pr = procs_[p];
        if (const auto until = suspended_until(a.t)) {
            if (*until <= end_) push(Act{*until, kPriLocal, p, p, 0});
            return;
        }
        const Ticks at = earliest_stamp(pr, EventKind::Local, a.t);
        if (at > a.t) {
            if (at <= end_) push(Act{at, kPriLocal, p, p, 0});
            return;
        }
        const Ticks pt = read_clock(p, a.t);
        maybe_reset(pr, pt);
        const StampOutcome out =
            pr.clock->guarded_stamp(EventKind::Local, std::nullopt, p_.policy);
        if (out.status == StampOutcome::Status::Delayed) {
            pr.local_delay_counted = true;
            const Ticks retry = a.t + std::max<Ticks>(1, out.wait_ticks);
            if (retry <= end_) push(Act{retry, kPriLocal, p, p, 0});
            return;
        }
        if (out.status == StampOutcome::Status::Discarded) {
            result_.discarded += 1;
            pr.local_delay_counted = false;
            schedule_next_local(p, a.t);
            return;
        }
        if (pr.local_delay_counted) result_.delayed += 1;  // counted once, when stamped
        pr.local_delay_counted = false;
        const Ticks clpt = mask_clpt(pt, pr.clock->u());
        stamp_bookkeeping(p, EventKind::Local, a.t, out.ts, pt, clpt, nullptr);
        pr.last_local_t = a.t;
        pr.has_local = true;
        schedule_next_local(p, a.t);
    }

    void schedule_next_local(std::uint32_t p, Ticks now) {
        const Ticks due = now + draw_gap(procs_[p], local_gap_mean(), p_.delta_loc_us);
        if (due <= end_) push(Act{due, kPriLocal, p, p, 0});
    }

    void sample(Ticks t) {
        std::uint64_t lo = ~std::uint64_t{0};
        std::uint64_t hi = 0;
        ClockSample row;
        if (p_.record_log) {
            row.t = t;
            row.clpt.resize(p_.n_processes);
            row.last_pwc.resize(p_.n_processes);
        }
        for (std::uint32_t k = 0; k < p_.n_processes; ++k) {
            const Ticks pt = walk_.pt(k, t);
            const Ticks clpt = mask_clpt(pt, procs_[k].clock->u());
            const std::uint64_t pwc_var = procs_[k].clock->last().value;
            const std::uint64_t reading = std::max(pwc_var, clpt);
            lo = std::min(lo, reading);
            hi = std::max(hi, reading);
            if (p_.record_log) {
                row.clpt[k] = clpt;
                row.last_pwc[k] = pwc_var;
            }
        }
        if (hi - lo > p_.epsilon_us + (std::uint64_t{2} << p_.u)) {
            result_.bound_violations += 1;
        }
        if (p_.record_log) log_.add_sample(std::move(row));
        if (t + kSampleEvery <= end_) push(Act{t + kSampleEvery, kPriSample, 0, 0, 0});
    }

    std::uint64_t alloc_msg() {
        if (!free_msgs_.empty()) {
            const std::uint64_t slot = free_msgs_.back();
            free_msgs_.pop_back();
            return slot;
        }
        msgs_.emplace_back();
        return msgs_.size() - 1;
    }

    void free_msg(std::uint64_t slot) { free_msgs_.push_back(slot); }

    SimParams p_;
    Ticks end_;
    SkewWalk walk_;
    EventLog log_;
    SimResult result_{};
    std::vector<Proc> procs_;
    std::vector<Msg> msgs_;
    std::vector<std::uint64_t> free_msgs_;
    std::vector<std::pair<Ticks, Ticks>> windows_;
    std::uint64_t msg_seq_ = 0;
    std::uint64_t event_counter_ = 0;
    bool stop_ = false;
    std::priority_queue<Act, std::vector<Act>, std::greater<Act>> heap_;
};

}  // namespace

std::pair<SimResult, EventLog> run_simulation(const SimParams& params) {
    params.validate();
    Simulation sim(params);
    return sim.run();
}

unsigned scan_waitfree_u(const SimParams& base, unsigned u_lo, unsigned u_hi) {
    SimParams p = base;
    p.record_log = false;
    p.track_vclocks = false;
    p.per_event_bound_snapshots = false;
    p.co_run_hlc = false;
    p.stop_on_overflow = true;
    for (unsigned u = u_lo; u <= u_hi; ++u) {
        p.u = u;
        const auto [result, log] = run_simulation(p);
        if (result.overflow_events == 0) return u;
    }
    throw std::runtime_error("no viable u found in the scanned range");
}

std::string sim_csv_header() {
    return "n_processes,topology,epsilon_us,delta_se_us,delta_re_us,delta_loc_us,"
           "latency_min_us,latency_max_us,send_rate_per_s,local_rate_per_s,"
           "duration_ticks,u,policy,discard_threshold,seed,skew_walk_step_us,"
           "skew_drift_ppm,min_event_gap_us,total_events,delayed,discarded,max_bits,"
           "bits_0,bits_1,bits_2,bits_3,bits_4,bits_5,bits_6,bits_7,bits_8,bits_9,"
           "bits_10,bits_11,bits_12,bits_13,bits_14,bits_15,violations";
}

std::string sim_csv_row(const SimParams& p, const SimResult& r) {
    std::ostringstream out;
    const char* policy = p.policy.mode == OverflowPolicy::Mode::Unguarded ? "unguarded"
                         : p.policy.mode == OverflowPolicy::Mode::Wait    ? "wait"
                                                                          : "discard";
    out << p.n_processes << ',' << to_string(p.topology) << ',' << p.epsilon_us << ','
        << p.delta_se_us << ',' << p.delta_re_us << ',' << p.delta_loc_us << ','
        << p.latency_min_us << ',' << p.latency_max_us << ',' << p.send_rate_per_s << ','
        << p.local_rate_per_s << ',' << p.duration_ticks() << ',' << p.u << ','
        << policy << ',' << p.policy.discard_threshold << ',' << p.seed << ','
        << p.skew_walk_step_us << ',' << p.skew_drift_ppm << ',' << p.min_event_gap_us
        << ',' << r.total_events
        << ',' << r.delayed << ',' << r.discarded << ',' << r.max_bits;
    for (int i = 0; i < 16; ++i) out << ',' << r.bits_histogram[i];
    out << ',' << (r.causality_violations + r.bound_violations);
    return out.str();
}

SimParams sim_params_from_csv_row(const std::string& header, const std::string& row) {
    std::vector<std::string> names, cells;
    for (auto [src, dst] : {std::pair{&header, &names}, std::pair{&row, &cells}}) {
        std::istringstream ss(*src);
        std::string tok;
        while (std::getline(ss, tok, ',')) dst->push_back(tok);
    }
    if (names.size() != cells.size()) {
        throw std::invalid_argument("CSV row does not match header");
    }
    SimParams p;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& k = names[i];
        const std::string& v = cells[i];
        if (k == "n_processes") p.n_processes = std::stoul(v);
        else if (k == "topology") p.topology = topology_from_string(v);
        else if (k == "epsilon_us") p.epsilon_us = std::stoull(v);
        else if (k == "delta_se_us") p.delta_se_us = std::stoull(v);
        else if (k == "delta_re_us") p.delta_re_us = std::stoull(v);
        else if (k == "delta_loc_us") p.delta_loc_us = std::stoull(v);
        else if (k == "latency_min_us") p.latency_min_us = std::stoull(v);
        else if (k == "latency_max_us") p.latency_max_us = std::stoull(v);
        else if (k == "send_rate_per_s") p.send_rate_per_s = std::stoull(v);
        else if (k == "local_rate_per_s") p.local_rate_per_s = std::stoull(v);
        else if (k == "duration_ticks") p.duration_s = std::stod(v) / 1e6;
        else if (k == "u") p.u = std::stoul(v);
        else if (k == "policy") {
            p.policy.mode = v == "wait"      ? OverflowPolicy::Mode::Wait
                            : v == "discard" ? OverflowPolicy::Mode::Discard
                                             : OverflowPolicy::Mode::Unguarded;
        } else if (k == "discard_threshold") p.policy.discard_threshold = std::stoull(v);
        else if (k == "seed") p.seed = std::stoull(v);
        else if (k == "skew_walk_step_us") p.skew_walk_step_us = std::stoull(v);
        else if (k == "skew_drift_ppm") p.skew_drift_ppm = std::stoull(v);
        else if (k == "min_event_gap_us") p.min_event_gap_us = std::stoull(v);
        // result columns are ignored
    }
    return p;
}

}  // namespace pwc
