#include "pwc/oracle.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pwc {

namespace {

char kind_letter(EventKind k) {
    switch (k) {
        case EventKind::Local: return 'L';
        case EventKind::Send: return 'S';
        case EventKind::Receive: return 'R';
    }
    return '?';
}

EventKind kind_from(char c) {
    switch (c) {
        case 'L': return EventKind::Local;
        case 'S': return EventKind::Send;
        case 'R': return EventKind::Receive;
    }
    throw std::invalid_argument("bad event kind letter");
}

}  // namespace

EventLog::EventLog(std::uint32_t n_processes, bool track_vclocks)
    : n_processes_(n_processes), track_vclocks_(track_vclocks) {
    if (n_processes == 0) {
        throw std::invalid_argument("EventLog needs at least one process");
    }
}

std::uint64_t EventLog::record_event(std::uint32_t process, EventKind kind,
                                     std::uint64_t pred_same, std::uint64_t pred_cross,
                                     std::uint64_t pwc, std::uint64_t clpt,
                                     std::uint64_t pt, std::uint64_t max_clpt,
                                     std::uint64_t sim_time) {
    if (process >= n_processes_) {
        throw std::invalid_argument("process index out of range");
    }
    const std::uint64_t id = events_.size();
    if ((pred_same != kNoEvent && pred_same >= id) ||
        (pred_cross != kNoEvent && pred_cross >= id)) {
        throw std::invalid_argument("predecessor not yet in log");
    }
    EventRecord rec;
    rec.id = id;
    rec.process = process;
    rec.kind = kind;
    rec.pred_same = pred_same;
    rec.pred_cross = pred_cross;
    rec.pwc = pwc;
    rec.clpt = clpt;
    rec.pt = pt;
    rec.max_clpt = max_clpt;
    rec.sim_time = sim_time;
    events_.push_back(rec);

    if (track_vclocks_) {
        const std::size_t base = vclock_arena_.size();
        vclock_arena_.resize(base + n_processes_, 0);
        std::uint64_t* vc = vclock_arena_.data() + base;
        for (std::uint64_t pred : {pred_same, pred_cross}) {
            if (pred == kNoEvent) continue;
            const std::uint64_t* pv = vclock_arena_.data() +
                                      static_cast<std::size_t>(pred) * n_processes_;
            for (std::uint32_t i = 0; i < n_processes_; ++i) {
                vc[i] = std::max(vc[i], pv[i]);
            }
        }
        vc[process] += 1;
    }
    return id;
}

const EventRecord& EventLog::at(std::uint64_t id) const {
    if (id >= events_.size()) {
        throw std::out_of_range("unknown event id");
    }
    return events_[id];
}

std::span<const std::uint64_t> EventLog::vclock(std::uint64_t id) const {
    if (!track_vclocks_) {
        throw std::logic_error("vector clocks not tracked in this log");
    }
    if (id >= events_.size()) {
        throw std::out_of_range("unknown event id");
    }
    return {vclock_arena_.data() + static_cast<std::size_t>(id) * n_processes_,
            n_processes_};
}

bool EventLog::happened_before(std::uint64_t e, std::uint64_t f) const {
    if (e == f) return false;
    const auto ve = vclock(e);
    const auto vf = vclock(f);
    for (std::uint32_t i = 0; i < n_processes_; ++i) {
        if (ve[i] > vf[i]) return false;
    }
    return true;
}

void EventLog::add_sample(ClockSample sample) {
    if (sample.clpt.size() != n_processes_ || sample.last_pwc.size() != n_processes_) {
        throw std::invalid_argument("sample vectors must cover every process");
    }
    samples_.push_back(std::move(sample));
}

void EventLog::export_lines(std::ostream& out) const {
    for (const EventRecord& e : events_) {
        out << e.id << ' ' << e.process << ' ' << kind_letter(e.kind) << ' ';
        if (e.pred_same == kNoEvent && e.pred_cross == kNoEvent) {
            out << '-';
        } else {
            bool first = true;
            for (std::uint64_t pred : {e.pred_same, e.pred_cross}) {
                if (pred == kNoEvent) continue;
                if (!first) out << ',';
                out << pred;
                first = false;
            }
        }
        out << ' ' << e.pwc << ' ' << e.clpt << ' ' << e.pt << ' ';
        if (track_vclocks_) {
            const auto vc = vclock(e.id);
            for (std::uint32_t i = 0; i < n_processes_; ++i) {
                if (i) out << ',';
                out << vc[i];
            }
        } else {
            out << '-';
        }
        out << '\n';
    }
}

EventLog EventLog::import_lines(std::istream& in) {
    struct Parsed {
        std::uint32_t process;
        EventKind kind;
        std::vector<std::uint64_t> preds;
        std::uint64_t pwc, clpt, pt;
    };
    std::vector<Parsed> rows;
    std::uint32_t max_proc = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::uint64_t id;
        std::string kind_s, preds_s, vc_s;
        Parsed p;
        if (!(ls >> id >> p.process >> kind_s >> preds_s >> p.pwc >> p.clpt >> p.pt >> vc_s)) {
            throw std::invalid_argument("malformed event log line: " + line);
        }
        if (id != rows.size()) {
            throw std::invalid_argument("event ids must be dense and in order");
        }
        p.kind = kind_from(kind_s.at(0));
        if (preds_s != "-") {
            std::istringstream ps(preds_s);
            std::string tok;
            while (std::getline(ps, tok, ',')) {
                p.preds.push_back(std::stoull(tok));
            }
        }
        max_proc = std::max(max_proc, p.process);
        rows.push_back(std::move(p));
    }
    EventLog log(max_proc + 1, true);
    for (const Parsed& p : rows) {
        std::uint64_t same = kNoEvent;
        std::uint64_t cross = kNoEvent;
        for (std::uint64_t pred : p.preds) {
            if (rows[pred].process == p.process) {
                same = pred;
            } else {
                cross = pred;
            }
        }
        log.record_event(p.process, p.kind, same, cross, p.pwc, p.clpt, p.pt);
    }
    return log;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> verify_causality(const EventLog& log) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bad;
    for (const EventRecord& e : log.events()) {
        for (std::uint64_t pred : {e.pred_same, e.pred_cross}) {
            if (pred == kNoEvent) continue;
            if (log.at(pred).pwc >= e.pwc) {
                bad.emplace_back(pred, e.id);
            }
        }
    }
    return bad;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> verify_causality_all_pairs(
    const EventLog& log, bool parallel) {
    const std::int64_t n = static_cast<std::int64_t>(log.size());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> bad;
    if (parallel) {
#pragma omp parallel
        {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> local;
#pragma omp for schedule(dynamic, 64) nowait
            for (std::int64_t e = 0; e < n; ++e) {
                for (std::int64_t f = 0; f < n; ++f) {
                    if (e == f) continue;
                    if (log.happened_before(e, f) && log.at(e).pwc >= log.at(f).pwc) {
                        local.emplace_back(e, f);
                    }
                }
            }
#pragma omp critical
            bad.insert(bad.end(), local.begin(), local.end());
        }
        std::sort(bad.begin(), bad.end());
    } else {
        for (std::int64_t e = 0; e < n; ++e) {
            for (std::int64_t f = 0; f < n; ++f) {
                if (e == f) continue;
                if (log.happened_before(e, f) && log.at(e).pwc >= log.at(f).pwc) {
                    bad.emplace_back(e, f);
                }
            }
        }
    }
    return bad;
}

std::vector<std::vector<std::uint64_t>> reachability_closure(const EventLog& log) {
    const std::size_t n = log.size();
    const std::size_t words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> anc(n, std::vector<std::uint64_t>(words, 0));
    for (std::size_t f = 0; f < n; ++f) {
        const EventRecord& rec = log.at(f);
        for (std::uint64_t pred : {rec.pred_same, rec.pred_cross}) {
            if (pred == kNoEvent) continue;
            const auto& pa = anc[pred];
            auto& fa = anc[f];
            for (std::size_t w = 0; w < words; ++w) {
                fa[w] |= pa[w];
            }
            fa[pred / 64] |= std::uint64_t{1} << (pred % 64);
        }
    }
    return anc;
}

std::optional<Ccc> find_chain_for(const EventLog& log, std::uint64_t f, unsigned u) {
    const EventRecord& rec = log.at(f);
    const Ticks v = split(PwcTimestamp{rec.pwc}, u).lpt;
    if (v == 0) {
        return std::nullopt;
    }
    Ccc chain;
    chain.events.resize(static_cast<std::size_t>(v) + 1);
    chain.events[v] = f;
    std::uint64_t cur = f;
    for (std::uint64_t w = v; w > 0; --w) {
        const EventRecord& c = log.at(cur);
        std::uint64_t next = kNoEvent;
        for (std::uint64_t pred : {c.pred_same, c.pred_cross}) {
            if (pred != kNoEvent && log.at(pred).pwc + 1 == c.pwc) {
                next = pred;
                break;
            }
        }
        if (next == kNoEvent) {
            return std::nullopt;  // chain broken; caller treats this as a failure
        }
        chain.events[w - 1] = next;
        cur = next;
    }
    return chain;
}

Ccc longest_mccc(const EventLog& log) {
    const std::size_t n = log.size();
    Ccc best;
    if (n == 0) return best;
    // Chain length ending at each event; ids are topologically ordered.
    std::vector<std::uint32_t> len(n, 1);
    std::vector<std::uint64_t> back(n, kNoEvent);
    std::size_t best_end = 0;
    for (std::size_t f = 0; f < n; ++f) {
        const EventRecord& rec = log.at(f);
        for (std::uint64_t pred : {rec.pred_same, rec.pred_cross}) {
            if (pred == kNoEvent) continue;
            if (log.at(pred).pwc + 1 == rec.pwc && len[pred] + 1 > len[f]) {
                len[f] = len[pred] + 1;
                back[f] = pred;
            }
        }
        if (len[f] > len[best_end]) {
            best_end = f;
        }
    }
    std::uint64_t cur = best_end;
    while (cur != kNoEvent) {
        best.events.push_back(cur);
        cur = back[cur];
    }
    std::reverse(best.events.begin(), best.events.end());
    return best;
}

std::vector<BoundViolation> verify_bounds(const EventLog& log, Ticks epsilon_ticks,
                                          unsigned u, bool parallel) {
    const std::int64_t n = static_cast<std::int64_t>(log.size());
    for (const EventRecord& e : log.events()) {
        if (e.max_clpt == kNoSnapshot) {
            throw std::invalid_argument("verify_bounds needs simulator clpt snapshots");
        }
    }
    const std::uint64_t window = std::uint64_t{1} << u;
    std::vector<BoundViolation> out;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        const EventRecord& e = log.at(i);
        const bool below = e.pwc < e.clpt;
        const bool above = e.pwc > e.max_clpt + window;
        if (below || above) {
#pragma omp critical
            {
                if (below) out.push_back({BoundViolation::Kind::BelowClpt, e.id});
                if (above) out.push_back({BoundViolation::Kind::AboveEnvelope, e.id});
            }
        }
    }
    // Pairwise spread at each recorded sample, using the clock's effective
    // reading max(pwc, clpt) for processes that have stamped at least once.
    const std::uint64_t spread_limit = epsilon_ticks + (std::uint64_t{2} << u);
    std::uint64_t sample_idx = 0;
    for (const ClockSample& s : log.samples()) {
        std::uint64_t lo = ~std::uint64_t{0};
        std::uint64_t hi = 0;
        for (std::uint32_t p = 0; p < log.processes(); ++p) {
            const std::uint64_t pwc_var =
                s.last_pwc[p] == kNoSnapshot ? s.clpt[p] : s.last_pwc[p];
            const std::uint64_t reading = std::max(pwc_var, s.clpt[p]);
            lo = std::min(lo, reading);
            hi = std::max(hi, reading);
        }
        if (hi - lo > spread_limit) {
            out.push_back({BoundViolation::Kind::PairwiseSpread, sample_idx});
        }
        ++sample_idx;
    }
    std::sort(out.begin(), out.end(), [](const BoundViolation& a, const BoundViolation& b) {
        return std::make_pair(static_cast<int>(a.kind), a.id) <
               std::make_pair(static_cast<int>(b.kind), b.id);
    });
    return out;
}

}  // namespace pwc
