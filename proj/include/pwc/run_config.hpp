#pragma once

#include <string>
#include <vector>

#include "pwc/net_harness.hpp"
#include "pwc/simulator.hpp"

namespace pwc {

// Declarative run configuration: a JSON object whose keys mirror SimParams.
// Unknown keys are rejected. Any sweepable key may hold a list of values; a
// sweep expands to the cross-product in canonical key order.
SimParams sim_params_from_json_text(const std::string& text);
std::vector<SimParams> expand_sweep_from_json_text(const std::string& text);

AgentConfig agent_config_from_json_text(const std::string& text);

}  // namespace pwc
