#include "pwc/net_harness.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pwc/netlog.hpp"
#include "pwc/rng.hpp"
#include "pwc/wire.hpp"

namespace pwc {

namespace {

struct UdpSocket {
    int fd = -1;

    UdpSocket() {
        fd = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd < 0) throw std::runtime_error("socket() failed");
    }
    ~UdpSocket() {
        if (fd >= 0) ::close(fd);
    }
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    void bind_to(const std::string& host, std::uint16_t port) {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            throw std::runtime_error("bad listen address: " + host);
        }
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            throw std::runtime_error("bind() failed on " + host + ":" + std::to_string(port));
        }
    }
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw std::runtime_error("bad peer address: " + host);
    }
    return addr;
}

// Buffered line sink flushed at least once per second.
class LogWriter {
public:
    explicit LogWriter(const std::string& path) {
        if (!path.empty()) {
            out_.open(path);
            if (!out_) throw std::runtime_error("cannot open log file: " + path);
        }
    }

    void append(const std::string& line) {
        if (!out_.is_open()) return;
        std::lock_guard lock(mu_);
        out_ << line << '\n';
        const auto now = std::chrono::steady_clock::now();
        if (now - last_flush_ >= std::chrono::seconds(1)) {
            out_.flush();
            last_flush_ = now;
        }
    }

    void close() {
        std::lock_guard lock(mu_);
        if (out_.is_open()) {
            out_.flush();
            out_.close();
        }
    }

private:
    std::ofstream out_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_flush_ = std::chrono::steady_clock::now();
};

}  // namespace

void AgentConfig::validate() const {
    if (peers.empty()) throw std::invalid_argument("agent needs at least one peer");
    if (u == 0 || u >= 64) throw std::invalid_argument("u must satisfy 0 < u < 64");
    if (payload_size < kWireHeaderSize || payload_size > 65000) {
        throw std::invalid_argument("payload_size must fit one datagram and hold the header");
    }
    if (duration_s <= 0) throw std::invalid_argument("duration must be positive");
    policy.validate();
}

std::string agent_stats_json(const AgentStats& s) {
    std::ostringstream out;
    out << "{\"agent_id\":" << s.agent_id << ",\"sent\":" << s.sent
        << ",\"received\":" << s.received << ",\"dropped\":" << s.dropped
        << ",\"histogram\":[";
    std::size_t last = 0;
    for (std::size_t i = 0; i < s.histogram.size(); ++i) {
        if (s.histogram[i] > 0) last = i;
    }
    for (std::size_t i = 0; i <= last; ++i) {
        if (i) out << ',';
        out << s.histogram[i];
    }
    out << "],\"delayed\":" << s.delayed << ",\"discarded\":" << s.discarded
        << ",\"u_mismatch\":" << s.u_mismatch << "}";
    return out.str();
}

AgentStats run_agent(const AgentConfig& cfg) {
    cfg.validate();

    UdpSocket sock;
    sock.bind_to(cfg.listen_host, cfg.listen_port);

    SteadyClockSource source;
    ClockParams params;
    params.u = cfg.u;
    PwcClock clock(params, source);
    LogWriter log(cfg.log_path);

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::microseconds(static_cast<std::int64_t>(cfg.duration_s * 1e6));
    std::atomic<bool> stop{false};

    // Log indices must follow stamp order, so the index is taken inside the
    // same critical section as the stamp itself.
    std::mutex stamp_mu;
    std::uint64_t next_index = 0;

    AgentStats send_stats{};
    AgentStats recv_stats{};

    std::thread receiver([&] {
        std::vector<std::uint8_t> buf(70000);
        while (!stop.load(std::memory_order_relaxed)) {
            pollfd pfd{sock.fd, POLLIN, 0};
            const int r = ::poll(&pfd, 1, 50);
            if (r <= 0) continue;
            const ssize_t n = ::recv(sock.fd, buf.data(), buf.size(), 0);
            if (n <= 0) continue;
            const WireDecodeResult dec =
                wire_decode({buf.data(), static_cast<std::size_t>(n)});
            if (!dec.ok) {
                recv_stats.dropped += 1;
                continue;
            }
            if (dec.message.u != cfg.u) {
                // Mixed-u tolerance: count it, keep processing with local u.
                recv_stats.u_mismatch += 1;
            }
            StampOutcome out;
            std::uint64_t index = 0;
            std::uint64_t pt = 0;
            while (true) {
                {
                    std::lock_guard lock(stamp_mu);
                    out = clock.guarded_stamp(EventKind::Receive,
                                              PwcTimestamp{dec.message.pwc}, cfg.policy);
                    if (out.status == StampOutcome::Status::Timestamped) {
                        index = next_index++;
                        pt = source.now();
                    }
                }
                if (out.status != StampOutcome::Status::Delayed) break;
                recv_stats.delayed += 1;
                std::this_thread::sleep_for(std::chrono::microseconds(out.wait_ticks));
                if (stop.load(std::memory_order_relaxed)) return;
            }
            if (out.status == StampOutcome::Status::Discarded) {
                recv_stats.discarded += 1;
                continue;
            }
            recv_stats.received += 1;
            recv_stats.histogram[bits_needed(out.ts, cfg.u)] += 1;
            if (dec.message.pwc >= out.ts.value) {
                recv_stats.per_edge_violations += 1;
            }
            NetLogEntry entry;
            entry.agent_id = cfg.agent_id;
            entry.index = index;
            entry.kind = EventKind::Receive;
            entry.pwc = out.ts.value;
            entry.pt = pt;
            entry.clpt = mask_clpt(entry.pt, cfg.u);
            entry.src_agent = dec.message.sender_id;
            entry.src_seq = dec.message.seq;
            log.append(net_log_line(entry));
        }
    });

    std::thread sender([&] {
        Xoshiro256 rng(cfg.seed ^ (std::uint64_t{cfg.agent_id} << 32));
        std::vector<sockaddr_in> peer_addrs;
        peer_addrs.reserve(cfg.peers.size());
        for (const PeerSpec& p : cfg.peers) {
            peer_addrs.push_back(resolve(p.host, p.port));
        }
        std::uint64_t seq = 0;
        const bool paced = cfg.rate_limit_per_s.has_value();
        const auto pace = paced ? std::chrono::nanoseconds(
                                      static_cast<std::int64_t>(1e9 / *cfg.rate_limit_per_s))
                                : std::chrono::nanoseconds(0);
        auto next_send = std::chrono::steady_clock::now();
        while (!stop.load(std::memory_order_relaxed) &&
               std::chrono::steady_clock::now() < deadline) {
            if (paced) {
                std::this_thread::sleep_until(next_send);
                next_send += pace;
            }
            StampOutcome out;
            std::uint64_t index = 0;
            std::uint64_t pt = 0;
            while (true) {
                {
                    std::lock_guard lock(stamp_mu);
                    out = clock.guarded_stamp(EventKind::Send, std::nullopt, cfg.policy);
                    if (out.status == StampOutcome::Status::Timestamped) {
                        index = next_index++;
                        pt = source.now();
                    }
                }
                if (out.status != StampOutcome::Status::Delayed) break;
                send_stats.delayed += 1;
                std::this_thread::sleep_for(std::chrono::microseconds(out.wait_ticks));
                if (stop.load(std::memory_order_relaxed)) return;
            }
            if (out.status == StampOutcome::Status::Discarded) {
                send_stats.discarded += 1;
                continue;
            }
            WireMessage m;
            m.sender_id = cfg.agent_id;
            m.seq = seq++;
            m.pwc = out.ts.value;
            m.u = static_cast<std::uint8_t>(cfg.u);
            const auto bytes = wire_encode(m, cfg.payload_size);
            const std::size_t peer = rng.below(peer_addrs.size());
            ::sendto(sock.fd, bytes.data(), bytes.size(), 0,
                     reinterpret_cast<const sockaddr*>(&peer_addrs[peer]),
                     sizeof(sockaddr_in));
            send_stats.sent += 1;
            send_stats.histogram[bits_needed(out.ts, cfg.u)] += 1;
            NetLogEntry entry;
            entry.agent_id = cfg.agent_id;
            entry.index = index;
            entry.kind = EventKind::Send;
            entry.pwc = out.ts.value;
            entry.pt = pt;
            entry.clpt = mask_clpt(entry.pt, cfg.u);
            entry.seq = m.seq;
            log.append(net_log_line(entry));
        }
    });

    std::this_thread::sleep_until(deadline);
    stop.store(true, std::memory_order_relaxed);
    sender.join();
    receiver.join();
    log.close();

    AgentStats total{};
    total.agent_id = cfg.agent_id;
    total.sent = send_stats.sent;
    total.received = recv_stats.received;
    total.dropped = recv_stats.dropped;
    total.delayed = send_stats.delayed + recv_stats.delayed;
    total.discarded = send_stats.discarded + recv_stats.discarded;
    total.u_mismatch = recv_stats.u_mismatch;
    total.per_edge_violations = recv_stats.per_edge_violations;
    for (std::size_t i = 0; i < total.histogram.size(); ++i) {
        total.histogram[i] = send_stats.histogram[i] + recv_stats.histogram[i];
    }
    return total;
}

DeltaFit fit_delta(const std::vector<DeltaSample>& samples, std::uint64_t min_messages) {
    if (samples.size() < 2) {
        throw std::invalid_argument("need at least two payload sizes");
    }
    bool distinct = false;
    for (const DeltaSample& s : samples) {
        if (s.messages < min_messages) {
            throw std::invalid_argument("too few messages for a stable estimate");
        }
        if (s.message_size != samples.front().message_size) distinct = true;
    }
    if (!distinct) {
        throw std::invalid_argument("degenerate fit: all payload sizes equal");
    }
    // Least squares over (size, elapsed/messages).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(samples.size());
    for (const DeltaSample& s : samples) {
        const double x = static_cast<double>(s.message_size);
        const double y = s.elapsed_ns / static_cast<double>(s.messages);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    DeltaFit fit;
    fit.const2_ns_per_byte = (n * sxy - sx * sy) / denom;
    fit.const1_ns = (sy - fit.const2_ns_per_byte * sx) / n;
    return fit;
}

DeltaFit measure_delta_with(const std::function<void(std::size_t)>& send_one,
                            const std::vector<std::size_t>& sizes,
                            double seconds_per_size, std::uint64_t min_messages) {
    std::vector<DeltaSample> samples;
    for (std::size_t size : sizes) {
        const auto start = std::chrono::steady_clock::now();
        const auto stop = start + std::chrono::nanoseconds(
                                      static_cast<std::int64_t>(seconds_per_size * 1e9));
        std::uint64_t count = 0;
        while (std::chrono::steady_clock::now() < stop) {
            send_one(size);
            ++count;
        }
        const double elapsed =
            std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start)
                .count();
        samples.push_back({size, count, elapsed});
    }
    return fit_delta(samples, min_messages);
}

DeltaFit measure_delta(MeasureRole role, const std::vector<PeerSpec>& peers,
                       const std::string& listen_host, std::uint16_t listen_port,
                       double seconds_per_size, const std::vector<std::size_t>& sizes) {
    if (role == MeasureRole::Send) {
        if (peers.empty()) throw std::invalid_argument("send role needs peers");
        UdpSocket sock;
        std::vector<sockaddr_in> addrs;
        for (const PeerSpec& p : peers) addrs.push_back(resolve(p.host, p.port));
        std::uint64_t seq = 0;
        std::size_t next_peer = 0;
        auto send_one = [&](std::size_t size) {
            WireMessage m;
            m.seq = seq++;
            const auto bytes = wire_encode(m, std::max(size, kWireHeaderSize));
            ::sendto(sock.fd, bytes.data(), bytes.size(), 0,
                     reinterpret_cast<const sockaddr*>(&addrs[next_peer]),
                     sizeof(sockaddr_in));
            next_peer = (next_peer + 1) % addrs.size();
        };
        return measure_delta_with(send_one, sizes, seconds_per_size);
    }

    // Receive role: count inbound datagrams of the expected size per window.
    UdpSocket sock;
    sock.bind_to(listen_host, listen_port);
    std::vector<DeltaSample> samples;
    std::vector<std::uint8_t> buf(70000);
    for (std::size_t size : sizes) {
        const auto start = std::chrono::steady_clock::now();
        const auto stop = start + std::chrono::nanoseconds(
                                      static_cast<std::int64_t>(seconds_per_size * 1e9));
        std::uint64_t count = 0;
        while (std::chrono::steady_clock::now() < stop) {
            pollfd pfd{sock.fd, POLLIN, 0};
            if (::poll(&pfd, 1, 50) <= 0) continue;
            const ssize_t n = ::recv(sock.fd, buf.data(), buf.size(), 0);
            if (n > 0 && static_cast<std::size_t>(n) == std::max(size, kWireHeaderSize)) {
                ++count;
            }
        }
        const double elapsed =
            std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start)
                .count();
        samples.push_back({size, count, elapsed});
    }
    return fit_delta(samples);
}

}  // namespace pwc
