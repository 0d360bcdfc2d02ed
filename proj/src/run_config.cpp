#include "pwc/run_config.hpp"

#include <json.hpp>

#include <array>
#include <stdexcept>

namespace pwc {

namespace {

using nlohmann::json;

constexpr std::array kSimKeys = {
    "n_processes",   "topology",        "epsilon_us",      "delta_se_us",
    "delta_re_us",   "delta_loc_us",    "latency_min_us",  "latency_max_us",
    "send_rate_per_s", "local_rate_per_s", "duration_s",   "u",
    "policy",        "discard_threshold_us", "seed",       "skew_walk_step_us",
    "skew_drift_ppm",
    "min_event_gap_us", "record_log",   "track_vclocks",
    "per_event_bound_snapshots", "co_run_hlc", "faults",   "suspend_at_us",
    "u_override",
};

// Keys that hold lists by nature and therefore cannot carry sweep lists.
constexpr std::array kListKeys = {"faults", "suspend_at_us", "u_override"};

bool is_known(const std::string& key) {
    for (const char* k : kSimKeys) {
        if (key == k) return true;
    }
    return false;
}

bool is_list_key(const std::string& key) {
    for (const char* k : kListKeys) {
        if (key == k) return true;
    }
    return false;
}

FaultSpec fault_from_json(const json& j) {
    FaultSpec f;
    for (const auto& [key, value] : j.items()) {
        if (key == "at_us") f.at = value.get<Ticks>();
        else if (key == "process") f.process = value.get<std::uint32_t>();
        else if (key == "kind") {
            const std::string k = value.get<std::string>();
            if (k == "clock_jump_forward") f.kind = FaultSpec::Kind::ClockJumpForward;
            else if (k == "negative_leap") f.kind = FaultSpec::Kind::NegativeLeap;
            else if (k == "skew_violation") f.kind = FaultSpec::Kind::SkewViolation;
            else if (k == "pwc_corruption") f.kind = FaultSpec::Kind::PwcCorruption;
            else throw std::invalid_argument("unknown fault kind: " + k);
        } else if (key == "value") f.value = value.get<std::uint64_t>();
        else throw std::invalid_argument("unknown fault key: " + key);
    }
    return f;
}

void apply_key(SimParams& p, const std::string& key, const json& v) {
    if (key == "n_processes") p.n_processes = v.get<std::uint32_t>();
    else if (key == "topology") p.topology = topology_from_string(v.get<std::string>());
    else if (key == "epsilon_us") p.epsilon_us = v.get<Ticks>();
    else if (key == "delta_se_us") p.delta_se_us = v.get<Ticks>();
    else if (key == "delta_re_us") p.delta_re_us = v.get<Ticks>();
    else if (key == "delta_loc_us") p.delta_loc_us = v.get<Ticks>();
    else if (key == "latency_min_us") p.latency_min_us = v.get<Ticks>();
    else if (key == "latency_max_us") p.latency_max_us = v.get<Ticks>();
    else if (key == "send_rate_per_s") p.send_rate_per_s = v.get<std::uint64_t>();
    else if (key == "local_rate_per_s") p.local_rate_per_s = v.get<std::uint64_t>();
    else if (key == "duration_s") p.duration_s = v.get<double>();
    else if (key == "u") p.u = v.get<unsigned>();
    else if (key == "policy") {
        const std::string m = v.get<std::string>();
        if (m == "unguarded") p.policy.mode = OverflowPolicy::Mode::Unguarded;
        else if (m == "wait") p.policy.mode = OverflowPolicy::Mode::Wait;
        else if (m == "discard") p.policy.mode = OverflowPolicy::Mode::Discard;
        else throw std::invalid_argument("unknown policy: " + m);
    } else if (key == "discard_threshold_us") p.policy.discard_threshold = v.get<Ticks>();
    else if (key == "seed") p.seed = v.get<std::uint64_t>();
    else if (key == "skew_walk_step_us") p.skew_walk_step_us = v.get<Ticks>();
    else if (key == "skew_drift_ppm") p.skew_drift_ppm = v.get<std::uint64_t>();
    else if (key == "min_event_gap_us") p.min_event_gap_us = v.get<Ticks>();
    else if (key == "record_log") p.record_log = v.get<bool>();
    else if (key == "track_vclocks") p.track_vclocks = v.get<bool>();
    else if (key == "per_event_bound_snapshots") p.per_event_bound_snapshots = v.get<bool>();
    else if (key == "co_run_hlc") p.co_run_hlc = v.get<bool>();
    else if (key == "faults") {
        for (const json& f : v) p.faults.push_back(fault_from_json(f));
    } else if (key == "suspend_at_us") {
        for (const json& t : v) p.suspend_at.push_back(t.get<Ticks>());
    } else if (key == "u_override") {
        for (const json& u : v) p.u_override.push_back(u.get<unsigned>());
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

SimParams params_from_object(const json& obj) {
    SimParams p;
    for (const auto& [key, value] : obj.items()) {
        if (!is_known(key)) throw std::invalid_argument("unknown config key: " + key);
        apply_key(p, key, value);
    }
    return p;
}

}  // namespace

SimParams sim_params_from_json_text(const std::string& text) {
    const json obj = json::parse(text);
    if (!obj.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (value.is_array() && !is_list_key(key)) {
            throw std::invalid_argument("sweep list found; use the sweep command for key " + key);
        }
    }
    return params_from_object(obj);
}

std::vector<SimParams> expand_sweep_from_json_text(const std::string& text) {
    const json obj = json::parse(text);
    if (!obj.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!is_known(key)) throw std::invalid_argument("unknown config key: " + key);
    }
    // Cross-product in canonical key order so run ordering is reproducible.
    std::vector<json> combos{json::object()};
    for (const char* key : kSimKeys) {
        if (!obj.contains(key)) continue;
        const json& value = obj.at(key);
        if (value.is_array() && !is_list_key(key)) {
            if (value.empty()) throw std::invalid_argument(std::string("empty sweep list: ") + key);
            std::vector<json> next;
            next.reserve(combos.size() * value.size());
            for (const json& base : combos) {
                for (const json& choice : value) {
                    json extended = base;
                    extended[key] = choice;
                    next.push_back(std::move(extended));
                }
            }
            combos = std::move(next);
        } else {
            for (json& base : combos) base[key] = value;
        }
    }
    std::vector<SimParams> out;
    out.reserve(combos.size());
    for (const json& combo : combos) {
        out.push_back(params_from_object(combo));
    }
    return out;
}

AgentConfig agent_config_from_json_text(const std::string& text) {
    const json obj = json::parse(text);
    AgentConfig cfg;
    for (const auto& [key, value] : obj.items()) {
        if (key == "agent_id") cfg.agent_id = value.get<std::uint16_t>();
        else if (key == "listen_host") cfg.listen_host = value.get<std::string>();
        else if (key == "listen_port") cfg.listen_port = value.get<std::uint16_t>();
        else if (key == "peers") {
            for (const json& p : value) {
                PeerSpec spec;
                spec.id = p.at("id").get<std::uint16_t>();
                spec.host = p.at("host").get<std::string>();
                spec.port = p.at("port").get<std::uint16_t>();
                cfg.peers.push_back(spec);
            }
        } else if (key == "u") cfg.u = value.get<unsigned>();
        else if (key == "policy") {
            const std::string m = value.get<std::string>();
            if (m == "unguarded") cfg.policy.mode = OverflowPolicy::Mode::Unguarded;
            else if (m == "wait") cfg.policy.mode = OverflowPolicy::Mode::Wait;
            else if (m == "discard") cfg.policy.mode = OverflowPolicy::Mode::Discard;
            else throw std::invalid_argument("unknown policy: " + m);
        } else if (key == "discard_threshold_us") cfg.policy.discard_threshold = value.get<Ticks>();
        else if (key == "rate_limit_per_s") cfg.rate_limit_per_s = value.get<std::uint64_t>();
        else if (key == "duration_s") cfg.duration_s = value.get<double>();
        else if (key == "payload_size") cfg.payload_size = value.get<std::size_t>();
        else if (key == "log_path") cfg.log_path = value.get<std::string>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else throw std::invalid_argument("unknown agent config key: " + key);
    }
    return cfg;
}

}  // namespace pwc
