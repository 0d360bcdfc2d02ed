// Compares the serial reference and the OpenMP kernels for the oracle's
// verification passes on a freshly simulated log.
//
//   bench_verify [events] [processes]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "pwc/oracle.hpp"
#include "pwc/simulator.hpp"

using namespace pwc;

namespace {

template <typename F>
double time_s(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::uint64_t target_events = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 10000;
    const std::uint32_t n = argc > 2 ? static_cast<std::uint32_t>(std::atoi(argv[2])) : 8;

    SimParams p;
    p.n_processes = n;
    p.send_rate_per_s = 16000;
    p.epsilon_us = 6250;
    p.u = 10;
    p.duration_s = static_cast<double>(target_events) / (2.0 * n * 16000);
    p.seed = 20250807;
    auto [result, log] = run_simulation(p);
    std::printf("log: %zu events, %u processes\n", log.size(), log.processes());

    std::size_t serial_hits = 0, parallel_hits = 0;
    const double t_serial = time_s([&] {
        serial_hits = verify_causality_all_pairs(log, false).size();
    });
    const double t_parallel = time_s([&] {
        parallel_hits = verify_causality_all_pairs(log, true).size();
    });
    if (serial_hits != parallel_hits) {
        std::printf("MISMATCH: serial %zu vs parallel %zu\n", serial_hits, parallel_hits);
        return 1;
    }
    std::printf("all-pairs causality: serial %.3fs, parallel %.3fs (x%.2f)\n",
                t_serial, t_parallel, t_serial / t_parallel);

    std::size_t bounds_serial = 0, bounds_parallel = 0;
    const double tb_serial = time_s([&] {
        bounds_serial = verify_bounds(log, p.epsilon_us, p.u, false).size();
    });
    const double tb_parallel = time_s([&] {
        bounds_parallel = verify_bounds(log, p.epsilon_us, p.u, true).size();
    });
    if (bounds_serial != bounds_parallel) {
        std::printf("MISMATCH: bounds serial %zu vs parallel %zu\n", bounds_serial,
                    bounds_parallel);
        return 1;
    }
    std::printf("lemma-3 bounds: serial %.3fs, parallel %.3fs (x%.2f)\n", tb_serial,
                tb_parallel, tb_serial / tb_parallel);

    const double t_edges = time_s([&] { (void)verify_causality(log).size(); });
    std::printf("generator-edge causality (production path): %.3fs\n", t_edges);
    return 0;
}
