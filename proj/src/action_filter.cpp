#include "iab/action_filter.hpp"

#include <stdexcept>

namespace iab {

int ActionMask::valid_count() const {
    int n = 0;
    for (char v : valid) {
        n += v ? 1 : 0;
    }
    return n;
}

bool ActionMask::any_deploy() const {
    for (std::size_t a = 1; a < valid.size(); ++a) {
        if (valid[a]) {
            return true;
        }
    }
    return false;
}

ActionMask filter_actions(const NetworkState& state, const FilterConfig& cfg, FilterDiag* diag) {
    const Scenario& s = state.scenario();
    const ScenarioTables& t = *state.tables();
    const int sites = s.site_count();

    ActionMask mask;
    mask.valid.assign(static_cast<std::size_t>(sites) + 1, 0);
    mask.valid[0] = 1;  // stopping is always allowed
    if (diag) {
        diag->reason.assign(static_cast<std::size_t>(sites), RejectReason::none);
    }

    for (int j = 0; j < sites; ++j) {
        RejectReason reason = RejectReason::none;

        if (state.deployed(j)) {
            reason = RejectReason::already_deployed;
        }

        if (reason == RejectReason::none) {
            for (int d : state.deployed_sites()) {
                const double dist = t.site_site_dist[static_cast<std::size_t>(j) * sites + d];
                const bool bad = cfg.legacy_distance_rule ? dist > cfg.min_distance_m : dist < cfg.min_distance_m;
                if (bad) {
                    reason = RejectReason::min_separation;
                    break;
                }
            }
        }

        if (reason == RejectReason::none && !state.best_parent(j)) {
            reason = RejectReason::no_feasible_parent;
        }

        if (reason == RejectReason::none) {
            mask.valid[static_cast<std::size_t>(j) + 1] = 1;
        } else if (diag) {
            diag->reason[static_cast<std::size_t>(j)] = reason;
        }
    }
    return mask;
}

int masked_argmax(std::span<const double> q, const ActionMask& mask) {
    if (static_cast<int>(q.size()) != mask.size()) {
        throw std::invalid_argument("masked_argmax: q/mask size mismatch");
    }
    int best = -1;
    for (int a = 0; a < mask.size(); ++a) {
        if (!mask.is_valid(a)) {
            continue;
        }
        if (best < 0 || q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) {
            best = a;
        }
    }
    if (best < 0) {
        throw std::invalid_argument("masked_argmax: no valid action");
    }
    return best;
}

}  // namespace iab
