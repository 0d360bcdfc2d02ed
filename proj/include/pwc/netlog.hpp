#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pwc/clock.hpp"
#include "pwc/oracle.hpp"

namespace pwc {

// One line per stamped event in an agent's on-disk log. Receives name their
// matching send by (src_agent, src_seq) so the offline merger can rebuild the
// causal edges without any shared state between agents.
struct NetLogEntry {
    std::uint16_t agent_id = 0;
    std::uint64_t index = 0;  // agent-local event index, dense from 0
    EventKind kind = EventKind::Send;
    std::uint64_t pwc = 0;
    std::uint64_t clpt = 0;
    std::uint64_t pt = 0;
    std::uint64_t seq = 0;        // sends: wire sequence number
    std::uint16_t src_agent = 0;  // receives only
    std::uint64_t src_seq = 0;    // receives only
};

std::string net_log_line(const NetLogEntry& e);
NetLogEntry parse_net_log_line(const std::string& line);

struct MergedNetLog {
    EventLog log;
    std::uint64_t unmatched_receives = 0;  // cross edge dropped (lost sender line)
    std::uint64_t monotonicity_violations = 0;  // per-agent pwc not strictly increasing
    std::vector<std::uint16_t> agent_ids;  // process index -> agent id
};

// Merge per-agent logs into one oracle EventLog. Ids are assigned by Kahn's
// algorithm over the explicit pred DAG (same-agent order plus matched send
// edges), deliberately ignoring pwc values so the causality check downstream
// stays independent of the thing it verifies. Vector clocks are optional:
// flood runs produce tens of millions of entries and the merged-log checks
// only need edges.
MergedNetLog merge_net_logs(const std::vector<std::string>& paths,
                            bool track_vclocks = false);
MergedNetLog merge_net_log_streams(std::vector<std::istream*> streams,
                                   bool track_vclocks = false);

}  // namespace pwc
