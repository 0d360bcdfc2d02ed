#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pwc/net_harness.hpp"
#include "pwc/netlog.hpp"
#include "pwc/oracle.hpp"
#include "pwc/rng.hpp"
#include "pwc/wire.hpp"

using namespace pwc;

TEST_CASE("wire round trip, including the boundary sequence number") {
    WireMessage boundary;
    boundary.sender_id = 0xffff;
    boundary.seq = ~std::uint64_t{0};
    boundary.pwc = ~std::uint64_t{0};
    boundary.u = 63;
    const auto bytes = wire_encode(boundary, kWireHeaderSize);
    REQUIRE(bytes.size() == 22);
    const auto dec = wire_decode(bytes);
    REQUIRE(dec.ok);
    CHECK(dec.message == boundary);

    Xoshiro256 rng(17);
    for (int i = 0; i < 1000; ++i) {
        WireMessage m;
        m.sender_id = static_cast<std::uint16_t>(rng.below(65536));
        m.seq = rng.next();
        m.pwc = rng.next();
        m.u = static_cast<std::uint8_t>(1 + rng.below(63));
        const std::size_t payload = kWireHeaderSize + rng.below(1400);
        const auto enc = wire_encode(m, payload);
        CHECK(enc.size() == payload);
        const auto back = wire_decode(enc);
        REQUIRE(back.ok);
        CHECK(back.message == m);
    }
}

TEST_CASE("wire decode rejects malformed datagrams") {
    std::vector<std::uint8_t> bytes(22, 0);
    CHECK_FALSE(wire_decode(bytes).ok);  // wrong magic
    bytes[0] = kWireMagic0;
    bytes[1] = kWireMagic1;
    bytes[2] = 0x02;  // wrong version
    CHECK_FALSE(wire_decode(bytes).ok);
    bytes[2] = kWireVersion;
    CHECK(wire_decode(bytes).ok);
    bytes.resize(10);  // truncated
    CHECK_FALSE(wire_decode(bytes).ok);
    CHECK_THROWS_AS(wire_encode(WireMessage{}, 4), std::invalid_argument);
}

TEST_CASE("net log lines round trip") {
    NetLogEntry send;
    send.agent_id = 3;
    send.index = 17;
    send.kind = EventKind::Send;
    send.pwc = 1234567;
    send.clpt = 1234560;
    send.pt = 1234566;
    send.seq = 99;
    const NetLogEntry s2 = parse_net_log_line(net_log_line(send));
    CHECK(s2.agent_id == send.agent_id);
    CHECK(s2.index == send.index);
    CHECK(s2.kind == EventKind::Send);
    CHECK(s2.seq == 99);

    NetLogEntry recv = send;
    recv.kind = EventKind::Receive;
    recv.src_agent = 5;
    recv.src_seq = 42;
    const NetLogEntry r2 = parse_net_log_line(net_log_line(recv));
    CHECK(r2.kind == EventKind::Receive);
    CHECK(r2.src_agent == 5);
    CHECK(r2.src_seq == 42);

    CHECK_THROWS_AS(parse_net_log_line("garbage"), std::invalid_argument);
}

TEST_CASE("merging agent logs rebuilds the causal DAG") {
    // Agent 1 sends seq 0, agent 2 receives it and replies, agent 1 receives.
    std::ostringstream a1, a2;
    a1 << net_log_line({1, 0, EventKind::Send, 100, 96, 98, 0, 0, 0}) << '\n';
    a2 << net_log_line({2, 0, EventKind::Receive, 101, 88, 90, 0, 1, 0}) << '\n';
    a2 << net_log_line({2, 1, EventKind::Send, 102, 88, 91, 0, 0, 0}) << '\n';
    a1 << net_log_line({1, 1, EventKind::Receive, 103, 96, 99, 0, 2, 0}) << '\n';

    std::istringstream s1(a1.str()), s2(a2.str());
    const MergedNetLog merged = merge_net_log_streams({&s1, &s2}, true);
    CHECK(merged.unmatched_receives == 0);
    CHECK(merged.monotonicity_violations == 0);
    REQUIRE(merged.log.size() == 4);
    CHECK(verify_causality(merged.log).empty());

    // The reply chain is causal end to end.
    std::uint64_t first_send = kNoEvent, last_recv = kNoEvent;
    for (const EventRecord& e : merged.log.events()) {
        if (e.kind == EventKind::Send && e.pwc == 100) first_send = e.id;
        if (e.kind == EventKind::Receive && e.pwc == 103) last_recv = e.id;
    }
    REQUIRE(first_send != kNoEvent);
    REQUIRE(last_recv != kNoEvent);
    CHECK(merged.log.happened_before(first_send, last_recv));
}

TEST_CASE("merge flags unmatched receives and broken monotonicity") {
    std::ostringstream a;
    a << net_log_line({1, 0, EventKind::Receive, 50, 48, 49, 0, 9, 123}) << '\n';  // unknown sender
    a << net_log_line({1, 1, EventKind::Send, 50, 48, 49, 0, 0, 0}) << '\n';       // pwc not increasing
    std::istringstream s(a.str());
    const MergedNetLog merged = merge_net_log_streams({&s});
    CHECK(merged.unmatched_receives == 1);
    CHECK(merged.monotonicity_violations == 1);
    // The same-process edge is still a causality violation in the oracle.
    CHECK(verify_causality(merged.log).size() == 1);
}

TEST_CASE("fit_delta recovers the line and rejects degenerate input") {
    std::vector<DeltaSample> samples = {
        {1, 20000, 20000.0 * (1000 + 7.0 * 1)},
        {1400, 20000, 20000.0 * (1000 + 7.0 * 1400)},
    };
    const DeltaFit fit = fit_delta(samples);
    CHECK(fit.const1_ns == doctest::Approx(1000).epsilon(0.01));
    CHECK(fit.const2_ns_per_byte == doctest::Approx(7.0).epsilon(0.01));

    CHECK_THROWS_AS(fit_delta({{1, 20000, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_delta({{5, 20000, 1.0}, {5, 20000, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_delta({{1, 20, 1.0}, {2, 20, 1.0}}), std::invalid_argument);
}

TEST_CASE("measure_delta_with on a synthetic fixed-cost pump") {
    // Each "message" burns a nominal microsecond. The flood-window estimate
    // must agree with an independent direct timing of the same pump to 20%;
    // the direct route absorbs whatever the virtualized clock actually costs.
    auto spin_1us = [](std::size_t) {
        const auto until = std::chrono::steady_clock::now() + std::chrono::microseconds(1);
        while (std::chrono::steady_clock::now() < until) {
        }
    };

    const int direct_runs = 20000;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < direct_runs; ++i) spin_1us(1);
    const double direct_ns =
        std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0)
            .count() /
        direct_runs;
    CHECK(direct_ns > 900);   // the pump really burns about a microsecond
    CHECK(direct_ns < 5000);  // and is not wedged

    const DeltaFit fit = measure_delta_with(spin_1us, {1, 1400}, 0.05, 1000);
    CHECK(fit.const1_ns == doctest::Approx(direct_ns).epsilon(0.20));
    CHECK(std::abs(fit.const2_ns_per_byte) < 0.15);
}

TEST_CASE("a mismatched u byte is counted and processed with the local u") {
    AgentConfig cfg;
    cfg.agent_id = 7;
    cfg.listen_port = 39281;
    cfg.peers = {{8, "127.0.0.1", 39282}};  // nobody listens; sends vanish
    cfg.u = 8;
    cfg.rate_limit_per_s = 100;
    cfg.duration_s = 0.8;
    cfg.seed = 99;

    AgentStats stats;
    std::thread agent([&] { stats = run_agent(cfg); });
    std::this_thread::sleep_for(std::chrono::milliseconds(150));

    // Inject datagrams carrying u = 9 plus one piece of garbage.
    const int inject_fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(inject_fd >= 0);
    sockaddr_in to{};
    to.sin_family = AF_INET;
    to.sin_port = htons(cfg.listen_port);
    ::inet_pton(AF_INET, "127.0.0.1", &to.sin_addr);
    for (std::uint64_t i = 0; i < 5; ++i) {
        WireMessage m;
        m.sender_id = 8;
        m.seq = i;
        m.pwc = 1000 + i;
        m.u = 9;
        const auto bytes = wire_encode(m, kWireHeaderSize);
        ::sendto(inject_fd, bytes.data(), bytes.size(), 0,
                 reinterpret_cast<const sockaddr*>(&to), sizeof(to));
    }
    const char junk[] = "not a pwc datagram at all.....";
    ::sendto(inject_fd, junk, sizeof(junk), 0, reinterpret_cast<const sockaddr*>(&to),
             sizeof(to));
    ::close(inject_fd);

    agent.join();
    CHECK(stats.u_mismatch == 5);
    CHECK(stats.received == 5);  // still stamped, with the local u
    CHECK(stats.dropped == 1);
    CHECK(stats.per_edge_violations == 0);
}

TEST_CASE("loopback agents exchange stamped traffic cleanly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pwc_net_unit";
    fs::create_directories(dir);
    const std::string log1 = (dir / "a1.log").string();
    const std::string log2 = (dir / "a2.log").string();

    AgentConfig c1;
    c1.agent_id = 1;
    c1.listen_port = 39181;
    c1.peers = {{2, "127.0.0.1", 39182}};
    c1.u = 8;
    c1.rate_limit_per_s = 2000;
    c1.duration_s = 1.0;
    c1.log_path = log1;
    c1.seed = 5;

    AgentConfig c2 = c1;
    c2.agent_id = 2;
    c2.listen_port = 39182;
    c2.peers = {{1, "127.0.0.1", 39181}};
    c2.log_path = log2;
    c2.seed = 6;

    AgentStats s1, s2;
    std::thread t1([&] { s1 = run_agent(c1); });
    std::thread t2([&] { s2 = run_agent(c2); });
    t1.join();
    t2.join();

    CHECK(s1.sent > 100);
    CHECK(s2.sent > 100);
    CHECK(s1.received > 0);
    CHECK(s2.received > 0);
    CHECK(s1.per_edge_violations == 0);
    CHECK(s2.per_edge_violations == 0);
    CHECK(s1.dropped == 0);
    CHECK(s1.u_mismatch == 0);

    const MergedNetLog merged = merge_net_logs({log1, log2});
    CHECK(merged.monotonicity_violations == 0);
    CHECK(verify_causality(merged.log).empty());

    const std::string json = agent_stats_json(s1);
    CHECK(json.find("\"agent_id\":1") != std::string::npos);
    CHECK(json.find("\"u_mismatch\":0") != std::string::npos);
    fs::remove_all(dir);
}
