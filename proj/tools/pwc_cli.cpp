#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pwc/analysis.hpp"
#include "pwc/hlc.hpp"
#include "pwc/net_harness.hpp"
#include "pwc/netlog.hpp"
#include "pwc/oracle.hpp"
#include "pwc/run_config.hpp"
#include "pwc/simulator.hpp"

namespace {

using nlohmann::json;

constexpr int kExitClean = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

json result_json(const pwc::SimResult& r) {
    json j;
    j["total_events"] = r.total_events;
    j["delayed"] = r.delayed;
    j["discarded"] = r.discarded;
    j["max_bits"] = r.max_bits;
    j["causality_violations"] = r.causality_violations;
    j["bound_violations"] = r.bound_violations;
    j["resets"] = r.resets;
    j["overflow_events"] = r.overflow_events;
    j["def2_edges"] = r.def2_edges;
    j["sent"] = r.sent;
    j["received"] = r.received;
    j["hlc_violations"] = r.hlc_violations;
    j["hlc_encode_failures"] = r.hlc_encode_failures;
    return j;
}

int cmd_sim_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
                const std::string& out_path, const std::string& log_path) {
    pwc::SimParams params = pwc::sim_params_from_json_text(slurp(config_path));
    if (seed_set) params.seed = seed;
    params.validate();
    auto [result, log] = pwc::run_simulation(params);

    std::ostringstream csv;
    csv << pwc::sim_csv_header() << '\n' << pwc::sim_csv_row(params, result) << '\n';
    write_file(out_path, csv.str());

    if (!log_path.empty()) {
        std::ofstream out(log_path);
        if (!out) throw std::runtime_error("cannot write " + log_path);
        log.export_lines(out);
    }

    // Run metadata lives beside the data file so reruns stay byte-identical.
    json meta = result_json(result);
    meta["config"] = config_path;
    meta["seed"] = params.seed;
    meta["wall_clock_unix_s"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    write_file(out_path + ".meta.json", meta.dump(2) + "\n");

    return result.causality_violations + result.bound_violations == 0 ? kExitClean
                                                                      : kExitViolation;
}

struct SummaryRow {
    pwc::SimParams params;
    pwc::SimResult result;
};

std::string summary_header() {
    return "n_processes,topology,epsilon_us,send_rate_per_s,u_run,total_events,"
           "waitfree_u_raw,waitfree_u,theorem1_u,eq1_u,empirical_u,empirical_delta,"
           "delayed_frac_u4,delayed_frac_u6";
}

std::string summary_row(const pwc::SimParams& p, const pwc::SimResult& r) {
    const auto wf = pwc::waitfree_u(r.bits_histogram);
    const unsigned t1 = pwc::theorem1_min_u(p.epsilon_us, p.delta_loc_us,
                                            p.delta_se_us, p.delta_re_us);
    const double av_comp = 1e6 / static_cast<double>(p.send_rate_per_s);
    const double av_tr = (static_cast<double>(p.latency_min_us) + p.latency_max_us) / 2.0;
    const unsigned e1 = pwc::eq1_expected_u(static_cast<double>(p.epsilon_us), av_comp, av_tr);
    pwc::EmpiricalFormulaParams ef;
    ef.S = static_cast<double>(p.send_rate_per_s) / 1000.0;
    ef.epsilon_ms = static_cast<double>(p.epsilon_us) / 1000.0;
    ef.delta_se_us = static_cast<double>(p.delta_se_us);
    ef.delta_re_us = static_cast<double>(p.delta_re_us);
    const unsigned emp = pwc::empirical_u(ef);
    std::ostringstream out;
    out << p.n_processes << ',' << pwc::to_string(p.topology) << ',' << p.epsilon_us
        << ',' << p.send_rate_per_s << ',' << p.u << ',' << r.total_events << ','
        << wf.raw << ',' << wf.reported << ',' << t1 << ',' << e1 << ',' << emp << ','
        << static_cast<int>(emp) - static_cast<int>(wf.reported) << ','
        << pwc::delayed_fraction(r.bits_histogram, 4) << ','
        << pwc::delayed_fraction(r.bits_histogram, 6);
    return out.str();
}

int cmd_sim_sweep(const std::string& config_path, const std::string& out_dir, int jobs) {
    const auto runs = pwc::expand_sweep_from_json_text(slurp(config_path));
    if (runs.empty()) throw std::runtime_error("sweep expanded to zero runs");
    std::filesystem::create_directories(out_dir);

    std::vector<SummaryRow> rows(runs.size());
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(runs.size()); ++i) {
        pwc::SimParams p = runs[i];
        p.record_log = false;  // sweeps keep counters only
        p.track_vclocks = false;
        auto [result, log] = pwc::run_simulation(p);
        rows[i] = SummaryRow{p, result};
    }

    std::ostringstream results;
    results << pwc::sim_csv_header() << '\n';
    for (const SummaryRow& row : rows) {
        results << pwc::sim_csv_row(row.params, row.result) << '\n';
    }
    write_file(out_dir + "/results.csv", results.str());

    std::ostringstream summary;
    summary << summary_header() << '\n';
    for (const SummaryRow& row : rows) {
        summary << summary_row(row.params, row.result) << '\n';
    }
    write_file(out_dir + "/summary.csv", summary.str());

    std::uint64_t violations = 0;
    for (const SummaryRow& row : rows) {
        violations += row.result.causality_violations + row.result.bound_violations;
    }
    return violations == 0 ? kExitClean : kExitViolation;
}

int cmd_analyze(const std::string& in_path, const std::string& out_path,
                const std::string& long_path, bool resimulate) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open " + in_path);
    std::string header;
    if (!std::getline(in, header) || header.empty()) {
        throw std::runtime_error("empty results CSV");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("results CSV has no rows");

    // Column lookup for the histogram and counters.
    std::vector<std::string> names;
    {
        std::istringstream hs(header);
        std::string tok;
        while (std::getline(hs, tok, ',')) names.push_back(tok);
    }
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return i;
        }
        throw std::runtime_error("missing CSV column: " + name);
    };
    const std::size_t bits0 = col("bits_0");

    std::ostringstream summary, longfmt;
    summary << summary_header();
    if (resimulate) summary << ",delayed_exact_u4,delayed_exact_u6";
    summary << '\n';
    longfmt << "config,bits,count\n";

    std::size_t config_id = 0;
    for (const std::string& row : lines) {
        std::vector<std::string> cells;
        std::istringstream rs(row);
        std::string tok;
        while (std::getline(rs, tok, ',')) cells.push_back(tok);
        if (cells.size() != names.size()) throw std::runtime_error("ragged CSV row");

        pwc::SimParams p = pwc::sim_params_from_csv_row(header, row);
        pwc::SimResult r{};
        r.total_events = std::stoull(cells[col("total_events")]);
        r.delayed = std::stoull(cells[col("delayed")]);
        r.discarded = std::stoull(cells[col("discarded")]);
        r.max_bits = static_cast<unsigned>(std::stoul(cells[col("max_bits")]));
        for (int b = 0; b < 16; ++b) {
            r.bits_histogram[b] = std::stoull(cells[bits0 + b]);
        }
        if (r.max_bits > 15) {
            // High buckets are not in the CSV; pin the tail so waitfree_u is right.
            r.bits_histogram[std::min(63u, r.max_bits)] = 1;
        }
        summary << summary_row(p, r);
        if (resimulate) {
            for (unsigned hyp_u : {4u, 6u}) {
                pwc::SimParams rp = p;
                rp.u = hyp_u;
                rp.policy.mode = pwc::OverflowPolicy::Mode::Wait;
                rp.record_log = false;
                rp.track_vclocks = false;
                rp.per_event_bound_snapshots = false;
                auto [rr, rlog] = pwc::run_simulation(rp);
                summary << ',' << rr.delayed;
            }
        }
        summary << '\n';
        for (int b = 0; b < 16; ++b) {
            longfmt << config_id << ',' << b << ',' << r.bits_histogram[b] << '\n';
        }
        ++config_id;
    }
    write_file(out_path, summary.str());
    write_file(long_path.empty() ? out_path + ".long.csv" : long_path, longfmt.str());
    return kExitClean;
}

int cmd_hlc_demo() {
    const pwc::HlcEncoded e = pwc::hlc_encode(15, {15, 0});
    const pwc::HlcEncoded f = pwc::hlc_encode(14, {19, 0});
    const bool hlc_less = pwc::hlc_compare(e, f) == std::strong_ordering::less;
    const bool int_greater = e.value > f.value;

    std::cout << "HLC pair: e = (pt 15, l 15, c 0) -> raw " << e.value
              << ", f = (pt 14, l 19, c 0) -> raw " << f.value << "\n";

    // PWC counterpart: a send causally followed by its receive.
    pwc::ManualClockSource src_a(15 << 3), src_b(14 << 3);
    pwc::ClockParams cp;
    cp.u = 3;
    pwc::PwcClock a(cp, src_a), b(cp, src_b);
    const pwc::PwcTimestamp sent = a.on_send();
    const pwc::PwcTimestamp got = b.on_receive(sent);
    const bool pwc_consistent = sent.value < got.value;

    std::cout << "HLC order: " << (hlc_less ? "e < f" : "e >= f")
              << "; integer order: " << (int_greater ? "e > f" : "e <= f")
              << "; PWC: " << (pwc_consistent ? "consistent" : "inconsistent") << "\n";
    return hlc_less && int_greater && pwc_consistent ? kExitClean : kExitViolation;
}

int cmd_net_agent(const std::string& config_path, const std::string& out_path) {
    const pwc::AgentConfig cfg = pwc::agent_config_from_json_text(slurp(config_path));
    const pwc::AgentStats stats = pwc::run_agent(cfg);
    const std::string report = pwc::agent_stats_json(stats);
    std::cout << report << "\n";
    if (!out_path.empty()) write_file(out_path, report + "\n");
    return stats.per_edge_violations == 0 ? kExitClean : kExitViolation;
}

std::vector<pwc::PeerSpec> parse_peers(const std::string& csv) {
    std::vector<pwc::PeerSpec> peers;
    std::istringstream in(csv);
    std::string item;
    std::uint16_t next_id = 1;
    while (std::getline(in, item, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw std::runtime_error("peer must be host:port");
        pwc::PeerSpec p;
        p.id = next_id++;
        p.host = item.substr(0, colon);
        p.port = static_cast<std::uint16_t>(std::stoul(item.substr(colon + 1)));
        peers.push_back(p);
    }
    return peers;
}

int cmd_net_measure(const std::string& role, const std::string& peers_csv,
                    const std::string& listen, double seconds,
                    const std::string& sizes_csv) {
    std::vector<std::size_t> sizes;
    std::istringstream ss(sizes_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoull(tok));

    std::string listen_host = "0.0.0.0";
    std::uint16_t listen_port = 0;
    if (!listen.empty()) {
        const auto colon = listen.rfind(':');
        listen_host = listen.substr(0, colon);
        listen_port = static_cast<std::uint16_t>(std::stoul(listen.substr(colon + 1)));
    }
    const pwc::MeasureRole r =
        role == "send" ? pwc::MeasureRole::Send : pwc::MeasureRole::Receive;
    const pwc::DeltaFit fit = pwc::measure_delta(r, parse_peers(peers_csv), listen_host,
                                                 listen_port, seconds, sizes);
    std::cout << "{\"role\":\"" << role << "\",\"const1_ns\":" << fit.const1_ns
              << ",\"const2_ns_per_byte\":" << fit.const2_ns_per_byte << "}\n";
    return kExitClean;
}

int cmd_net_verify(const std::vector<std::string>& logs) {
    const pwc::MergedNetLog merged = pwc::merge_net_logs(logs);
    const auto bad = pwc::verify_causality(merged.log);
    std::cout << "events=" << merged.log.size()
              << " unmatched_receives=" << merged.unmatched_receives
              << " monotonicity_violations=" << merged.monotonicity_violations
              << " causality_violations=" << bad.size() << "\n";
    return bad.empty() && merged.monotonicity_violations == 0 ? kExitClean
                                                              : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PWC experiment suite: timestamping, simulation, analysis, UDP agents"};
    app.require_subcommand(1);

    // sim run / sim sweep
    auto* sim = app.add_subcommand("sim", "discrete-event simulations");
    sim->require_subcommand(1);

    std::string run_config, run_out, run_log;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    auto* run = sim->add_subcommand("run", "run one configuration");
    run->add_option("--config", run_config, "JSON config")->required();
    run->add_option("--seed", run_seed, "override the config seed")
        ->each([&](const std::string&) { run_seed_set = true; });
    run->add_option("--out", run_out, "CSV output path")->required();
    run->add_option("--log", run_log, "also write the event log (line format)");

    std::string sweep_config, sweep_out_dir;
    int sweep_jobs = 0;
    auto* sweep = sim->add_subcommand("sweep", "run the cross-product of listed values");
    sweep->add_option("--config", sweep_config, "JSON config with sweep lists")->required();
    sweep->add_option("--out-dir", sweep_out_dir, "output directory")->required();
    sweep->add_option("--jobs", sweep_jobs, "parallel runs (0 = default)");

    std::string an_in, an_out, an_long;
    bool an_resim = false;
    auto* analyze = app.add_subcommand("analyze", "summarize a results CSV");
    analyze->add_option("--in", an_in, "results CSV from sim run/sweep")->required();
    analyze->add_option("--out", an_out, "summary CSV path")->required();
    analyze->add_option("--long", an_long, "long-format histogram table path");
    analyze->add_flag("--resimulate", an_resim,
                      "rerun each config with Wait policy at u = 4 and 6 for exact delay counts");

    auto* hlc_demo = app.add_subcommand("hlc-demo", "show the HLC integer-comparison pitfall");

    auto* net = app.add_subcommand("net", "UDP agents and timing measurement");
    net->require_subcommand(1);

    std::string agent_config, agent_out;
    auto* agent = net->add_subcommand("agent", "run one stamping agent");
    agent->add_option("--config", agent_config, "JSON agent config")->required();
    agent->add_option("--out", agent_out, "also write the stats report to a file");

    std::string m_role, m_peers, m_listen, m_sizes = "1,1400";
    double m_seconds = 200;
    auto* measure = net->add_subcommand("measure", "measure per-message send/receive cost");
    measure->add_option("--role", m_role, "send or receive")
        ->required()
        ->check(CLI::IsMember({"send", "receive"}));
    measure->add_option("--peers", m_peers, "comma-separated host:port list");
    measure->add_option("--listen", m_listen, "host:port (receive role)");
    measure->add_option("--seconds", m_seconds, "seconds per payload size");
    measure->add_option("--sizes", m_sizes, "comma-separated payload sizes");

    std::vector<std::string> verify_logs;
    auto* verify = net->add_subcommand("verify", "merge agent logs and check causality");
    verify->add_option("logs", verify_logs, "agent event logs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_sim_run(run_config, run_seed, run_seed_set, run_out, run_log);
        if (sweep->parsed()) return cmd_sim_sweep(sweep_config, sweep_out_dir, sweep_jobs);
        if (analyze->parsed()) return cmd_analyze(an_in, an_out, an_long, an_resim);
        if (hlc_demo->parsed()) return cmd_hlc_demo();
        if (agent->parsed()) return cmd_net_agent(agent_config, agent_out);
        if (measure->parsed()) return cmd_net_measure(m_role, m_peers, m_listen, m_seconds, m_sizes);
        if (verify->parsed()) return cmd_net_verify(verify_logs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
