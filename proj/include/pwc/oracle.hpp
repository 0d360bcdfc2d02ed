#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwc/clock.hpp"

namespace pwc {

inline constexpr std::uint64_t kNoEvent = ~std::uint64_t{0};
inline constexpr std::uint64_t kNoSnapshot = ~std::uint64_t{0};

struct EventRecord {
    std::uint64_t id = kNoEvent;
    std::uint32_t process = 0;
    EventKind kind = EventKind::Local;
    std::uint64_t pred_same = kNoEvent;   // previous event on the same process
    std::uint64_t pred_cross = kNoEvent;  // matching send, for a receive
    std::uint64_t pwc = 0;
    std::uint64_t clpt = 0;  // own masked clock at creation
    std::uint64_t pt = 0;    // own raw clock at creation
    // Simulator-only instrumentation; kNoSnapshot when the log was imported.
    std::uint64_t max_clpt = kNoSnapshot;  // max over all processes' clpt at creation
    std::uint64_t sim_time = kNoSnapshot;
};

// A consecutive causal chain: causally ordered events whose pwc values
// increase by exactly one at each step.
struct Ccc {
    std::vector<std::uint64_t> events;
    std::size_t length() const { return events.size(); }
};

struct BoundViolation {
    enum class Kind : std::uint8_t { BelowClpt, AboveEnvelope, PairwiseSpread };
    Kind kind;
    std::uint64_t id;  // event id, or sample index for PairwiseSpread
};

// Per-millisecond state snapshot used for the pairwise-spread check.
struct ClockSample {
    std::uint64_t t = 0;
    std::vector<std::uint64_t> clpt;      // per process
    std::vector<std::uint64_t> last_pwc;  // per process, kNoSnapshot before first stamp
};

/// Append-only ground-truth event log. Ids are dense and assigned in
/// creation order, which the deterministic simulator keeps topological.
/// Vector clocks live in a flat arena (one slot per process per event) and
/// exist only here — never on the product path.
class EventLog {
public:
    explicit EventLog(std::uint32_t n_processes, bool track_vclocks = true);

    std::uint64_t record_event(std::uint32_t process, EventKind kind,
                               std::uint64_t pred_same, std::uint64_t pred_cross,
                               std::uint64_t pwc, std::uint64_t clpt, std::uint64_t pt,
                               std::uint64_t max_clpt = kNoSnapshot,
                               std::uint64_t sim_time = kNoSnapshot);

    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    std::uint32_t processes() const { return n_processes_; }
    bool tracks_vclocks() const { return track_vclocks_; }

    const EventRecord& at(std::uint64_t id) const;
    std::span<const EventRecord> events() const { return events_; }
    std::span<const std::uint64_t> vclock(std::uint64_t id) const;

    // e happened-before f: vclock(e) <= vclock(f) elementwise and e != f.
    bool happened_before(std::uint64_t e, std::uint64_t f) const;

    void add_sample(ClockSample sample);
    std::span<const ClockSample> samples() const { return samples_; }

    // Line format: id process kind preds pwc clpt pt vclock
    void export_lines(std::ostream& out) const;
    static EventLog import_lines(std::istream& in);

private:
    std::uint32_t n_processes_;
    bool track_vclocks_;
    std::vector<EventRecord> events_;
    std::vector<std::uint64_t> vclock_arena_;
    std::vector<ClockSample> samples_;
};

// One-way causality over generator edges: every (pred, event) pair where the pred's
// pwc fails to be strictly smaller. Empty on every correct run; sufficient
// because integer order is transitive over the edge relation.
std::vector<std::pair<std::uint64_t, std::uint64_t>> verify_causality(const EventLog& log);

// Self-test variant over every happened-before pair (vector-clock route).
// Quadratic; intended for logs of at most ~10^4 events.
std::vector<std::pair<std::uint64_t, std::uint64_t>> verify_causality_all_pairs(
    const EventLog& log, bool parallel = true);

// Independent reachability oracle: ancestors-of bitsets computed by closure
// over the pred DAG, with no reference to vector clocks or timestamps.
// ancestors[f] bit e set iff e happened-before f.
std::vector<std::vector<std::uint64_t>> reachability_closure(const EventLog& log);

// For an event with lpt = v > 0, the chain of v earlier events
// with consecutive pwc values ending just below f. Returns nullopt when no
// chain is required (lpt = 0) and no incidental one is found.
std::optional<Ccc> find_chain_for(const EventLog& log, std::uint64_t f, unsigned u);

// Longest maximal consecutive causal chain in the log (length >= 1 whenever
// the log is nonempty).
Ccc longest_mccc(const EventLog& log);

// Per-event clpt envelope plus the pairwise spread at each recorded
// sample. Requires simulator snapshots; throws std::invalid_argument when
// they are missing.
std::vector<BoundViolation> verify_bounds(const EventLog& log, Ticks epsilon_ticks,
                                          unsigned u, bool parallel = true);

}  // namespace pwc
