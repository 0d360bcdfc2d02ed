#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pwc/clock.hpp"

namespace pwc {

struct PeerSpec {
    std::uint16_t id = 0;
    std::string host;
    std::uint16_t port = 0;
};

struct AgentConfig {
    std::uint16_t agent_id = 0;
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 0;
    std::vector<PeerSpec> peers;
    unsigned u = 8;
    OverflowPolicy policy{};
    std::optional<std::uint64_t> rate_limit_per_s;  // absent = flood
    double duration_s = 10.0;
    std::size_t payload_size = 64;
    std::string log_path;  // empty = keep no event log
    std::uint64_t seed = 1;

    void validate() const;
};

struct AgentStats {
    std::uint16_t agent_id = 0;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t dropped = 0;  // malformed datagrams
    std::array<std::uint64_t, 64> histogram{};
    std::uint64_t delayed = 0;
    std::uint64_t discarded = 0;
    std::uint64_t u_mismatch = 0;
    std::uint64_t per_edge_violations = 0;  // received pwc >= stamped pwc
};

std::string agent_stats_json(const AgentStats& s);

// Run one agent: a send loop and a receive loop over one UDP socket, sharing
// a single PwcClock. Blocks for the configured duration.
AgentStats run_agent(const AgentConfig& cfg);

// delta = const1 + const2 * message_size, fitted by least squares over the
// per-size points. Throws unless at least two distinct sizes are present.
struct DeltaFit {
    double const1_ns = 0;
    double const2_ns_per_byte = 0;
};

struct DeltaSample {
    std::size_t message_size = 0;
    std::uint64_t messages = 0;
    double elapsed_ns = 0;
};

DeltaFit fit_delta(const std::vector<DeltaSample>& samples, std::uint64_t min_messages = 10000);

enum class MeasureRole { Send, Receive };

// Per-message cost measurement: flood (or sink) for seconds_per_size per
// payload size and fit the per-message cost line. The callback variant takes
// "process one message of this size" and exists so the fit path can be
// exercised with a synthetic pump.
DeltaFit measure_delta_with(const std::function<void(std::size_t)>& send_one,
                            const std::vector<std::size_t>& sizes,
                            double seconds_per_size,
                            std::uint64_t min_messages = 10000);

DeltaFit measure_delta(MeasureRole role, const std::vector<PeerSpec>& peers,
                       const std::string& listen_host, std::uint16_t listen_port,
                       double seconds_per_size, const std::vector<std::size_t>& sizes);

}  // namespace pwc
