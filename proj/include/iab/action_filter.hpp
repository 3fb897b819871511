#pragma once

#include <span>
#include <vector>

#include "iab/network_state.hpp"

namespace iab {

// Validity per action index; index 0 is the stop action and is always valid,
// deploy action a > 0 refers to site a-1.
struct ActionMask {
    std::vector<char> valid;

    int size() const { return static_cast<int>(valid.size()); }
    bool is_valid(int action) const { return valid[static_cast<std::size_t>(action)] != 0; }
    int valid_count() const;
    bool any_deploy() const;
};

enum class RejectReason : std::uint8_t { none, already_deployed, min_separation, no_feasible_parent };

struct FilterDiag {
    std::vector<RejectReason> reason;  // per site
};

// Rule-based action elimination: a deploy action survives iff the site is
// undeployed, at least one feasible parent exists, and the site keeps the
// minimum separation from every deployed node (or, under the legacy rule,
// lies within min_distance_m of all of them).
ActionMask filter_actions(const NetworkState& state, const FilterConfig& cfg, FilterDiag* diag = nullptr);

// Highest-q valid action; ties go to the lowest index. Requires
// q.size() == mask.size() and at least one valid entry.
int masked_argmax(std::span<const double> q, const ActionMask& mask);

}  // namespace iab
