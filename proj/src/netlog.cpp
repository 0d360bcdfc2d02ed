#include "pwc/netlog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace pwc {

std::string net_log_line(const NetLogEntry& e) {
    std::ostringstream out;
    const char kind = e.kind == EventKind::Send      ? 'S'
                      : e.kind == EventKind::Receive ? 'R'
                                                     : 'L';
    out << e.agent_id << ' ' << e.index << ' ' << kind << ' ' << e.pwc << ' '
        << e.clpt << ' ' << e.pt << ' ';
    if (e.kind == EventKind::Send) {
        out << e.seq << " - -";
    } else if (e.kind == EventKind::Receive) {
        out << "- " << e.src_agent << ' ' << e.src_seq;
    } else {
        out << "- - -";
    }
    return out.str();
}

NetLogEntry parse_net_log_line(const std::string& line) {
    std::istringstream in(line);
    NetLogEntry e;
    std::string kind, seq, src_agent, src_seq;
    if (!(in >> e.agent_id >> e.index >> kind >> e.pwc >> e.clpt >> e.pt >> seq >>
          src_agent >> src_seq)) {
        throw std::invalid_argument("malformed net log line: " + line);
    }
    e.kind = kind == "S" ? EventKind::Send : kind == "R" ? EventKind::Receive : EventKind::Local;
    if (seq != "-") e.seq = std::stoull(seq);
    if (src_agent != "-") e.src_agent = static_cast<std::uint16_t>(std::stoul(src_agent));
    if (src_seq != "-") e.src_seq = std::stoull(src_seq);
    return e;
}

MergedNetLog merge_net_log_streams(std::vector<std::istream*> streams, bool track_vclocks) {
    std::vector<NetLogEntry> entries;
    std::string line;
    for (std::istream* in : streams) {
        while (std::getline(*in, line)) {
            if (!line.empty()) entries.push_back(parse_net_log_line(line));
        }
    }
    const std::size_t n = entries.size();

    std::map<std::uint16_t, std::vector<std::size_t>> by_agent;
    for (std::size_t i = 0; i < n; ++i) {
        by_agent[entries[i].agent_id].push_back(i);
    }
    std::map<std::uint16_t, std::uint32_t> proc_of;
    std::vector<std::uint16_t> agent_ids;
    for (auto& [agent, idxs] : by_agent) {
        proc_of[agent] = static_cast<std::uint32_t>(agent_ids.size());
        agent_ids.push_back(agent);
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return entries[a].index < entries[b].index;
        });
    }

    // Sorted (agent, seq) -> send entry index; binary-searched per receive.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> sends;
    for (std::size_t i = 0; i < n; ++i) {
        if (entries[i].kind == EventKind::Send) {
            sends.emplace_back((static_cast<std::uint64_t>(entries[i].agent_id) << 48) |
                                   entries[i].seq,
                               i);
        }
    }
    std::sort(sends.begin(), sends.end());
    auto find_send = [&](std::uint16_t agent, std::uint64_t seq) -> std::uint64_t {
        const std::uint64_t key = (static_cast<std::uint64_t>(agent) << 48) | seq;
        const auto it = std::lower_bound(
            sends.begin(), sends.end(), std::make_pair(key, std::uint64_t{0}));
        if (it == sends.end() || it->first != key) return kNoEvent;
        return it->second;
    };

    MergedNetLog out{
        EventLog(std::max<std::uint32_t>(1, static_cast<std::uint32_t>(agent_ids.size())),
                 track_vclocks),
        0, 0, agent_ids};

    std::vector<std::uint64_t> pred_same(n, kNoEvent);
    std::vector<std::uint64_t> pred_cross(n, kNoEvent);
    std::vector<std::uint8_t> indegree(n, 0);
    for (auto& [agent, idxs] : by_agent) {
        (void)agent;
        std::uint64_t prev_pwc = 0;
        bool has_prev = false;
        for (std::size_t k = 0; k < idxs.size(); ++k) {
            const std::size_t i = idxs[k];
            if (k > 0) {
                pred_same[i] = idxs[k - 1];
                indegree[i] += 1;
            }
            if (has_prev && entries[i].pwc <= prev_pwc) {
                out.monotonicity_violations += 1;
            }
            prev_pwc = entries[i].pwc;
            has_prev = true;
            if (entries[i].kind == EventKind::Receive) {
                const std::uint64_t s = find_send(entries[i].src_agent, entries[i].src_seq);
                if (s == kNoEvent) {
                    out.unmatched_receives += 1;
                } else {
                    pred_cross[i] = s;
                    indegree[i] += 1;
                }
            }
        }
    }

    // Successor lists in CSR form (each node has at most two preds, so the
    // edge count is bounded by 2n).
    std::vector<std::uint32_t> succ_off(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (pred_same[i] != kNoEvent) succ_off[pred_same[i] + 1] += 1;
        if (pred_cross[i] != kNoEvent) succ_off[pred_cross[i] + 1] += 1;
    }
    for (std::size_t i = 1; i <= n; ++i) succ_off[i] += succ_off[i - 1];
    std::vector<std::uint64_t> succ_data(succ_off[n]);
    {
        std::vector<std::uint32_t> cursor(succ_off.begin(), succ_off.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (pred_same[i] != kNoEvent) succ_data[cursor[pred_same[i]]++] = i;
            if (pred_cross[i] != kNoEvent) succ_data[cursor[pred_cross[i]]++] = i;
        }
    }

    // Kahn's algorithm with a deterministic (agent, index) tie-break.
    auto order_key = [&](std::uint64_t i) {
        return std::make_pair(entries[i].agent_id, entries[i].index);
    };
    auto cmp = [&](std::uint64_t a, std::uint64_t b) { return order_key(a) > order_key(b); };
    std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, decltype(cmp)> ready(cmp);
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    std::vector<std::uint64_t> assigned(n, kNoEvent);
    std::size_t emitted = 0;
    while (!ready.empty()) {
        const std::uint64_t i = ready.top();
        ready.pop();
        const NetLogEntry& e = entries[i];
        const std::uint64_t same =
            pred_same[i] == kNoEvent ? kNoEvent : assigned[pred_same[i]];
        const std::uint64_t cross =
            pred_cross[i] == kNoEvent ? kNoEvent : assigned[pred_cross[i]];
        assigned[i] = out.log.record_event(proc_of[e.agent_id], e.kind, same, cross,
                                           e.pwc, e.clpt, e.pt);
        ++emitted;
        for (std::uint32_t s = succ_off[i]; s < succ_off[i + 1]; ++s) {
            if (--indegree[succ_data[s]] == 0) ready.push(succ_data[s]);
        }
    }
    if (emitted != n) {
        throw std::runtime_error("net log merge found a causal cycle; logs are corrupt");
    }
    return out;
}

MergedNetLog merge_net_logs(const std::vector<std::string>& paths, bool track_vclocks) {
    std::vector<std::ifstream> files;
    files.reserve(paths.size());
    std::vector<std::istream*> streams;
    for (const std::string& p : paths) {
        files.emplace_back(p);
        if (!files.back()) {
            throw std::runtime_error("cannot open net log: " + p);
        }
        streams.push_back(&files.back());
    }
    return merge_net_log_streams(streams, track_vclocks);
}
}  // namespace pwc
