#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "iab/network_state.hpp"

namespace iab {

// Deployment plan document: ordered node list with parents and feed rates,
// plus a coverage summary.
nlohmann::json plan_to_json(const NetworkState& state);

struct PlanCheckResult {
    bool ok = true;
    std::vector<std::string> violations;
};

// Re-validates a plan document from first principles against the scenario:
// forest shape, backhaul reachability, donor and node rate budgets, and the
// coverage summary are all recomputed from the raw plan fields without going
// through NetworkState's incremental bookkeeping.
PlanCheckResult check_plan(const Scenario& s, const nlohmann::json& plan);

// Rebuilds a NetworkState by replaying the plan's attach sequence.
NetworkState plan_from_json(const Scenario& s, const nlohmann::json& plan);

}  // namespace iab
