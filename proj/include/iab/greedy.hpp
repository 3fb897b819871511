#pragma once

#include <optional>

#include "iab/action_filter.hpp"
#include "iab/network_state.hpp"

namespace iab {

struct GreedyResult {
    NetworkState state;
    bool reached_threshold = false;  // coverage >= coverage_threshold
};

// Baseline heuristic: repeatedly deploy the filter-valid site with the
// largest number of newly covered cells (ties: fewer hops to a donor, then
// lower site index) until the coverage threshold is met or no valid site
// adds coverage.
GreedyResult greedy_plan(const Scenario& s);

// Greedy node count, used as the default excess-node reference in the reward.
int resolve_n_ref(const Scenario& s);

// Exhaustive minimum-cardinality search for tiny instances: enumerates
// deployment subsets by increasing size, keeping the first one that covers
// the threshold and admits a feasible backhaul forest. Forest construction
// attaches members nearest-to-connected first and falls back to bounded
// order permutations. Throws std::invalid_argument when the scenario has
// more than max_sites candidate sites; returns nullopt when infeasible.
std::optional<NetworkState> brute_force_optimum(const Scenario& s, int max_sites = 12);

}  // namespace iab
