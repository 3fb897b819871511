#pragma once

#include <cstdint>
#include <vector>

#include "iab/action_filter.hpp"
#include "iab/network_state.hpp"

namespace iab {

using StateVec = std::vector<double>;

struct StepResult {
    StateVec state;
    double reward = 0.0;
    bool done = false;
};

struct TraceEntry {
    int step = 0;
    int action = 0;
    double reward = 0.0;
    double coverage = 0.0;
    int n_nodes = 0;
};

// Episodic deployment environment. One instance per rollout; copyable.
// State encoding is three per-cell channels: deployment (0/1), normalized
// residual rate, normalized served-children count. Action 0 stops the
// episode; action a > 0 deploys site a-1 under the policy-selected parent.
class MdpEnv {
public:
    explicit MdpEnv(const Scenario& s);
    MdpEnv(const Scenario& s, std::shared_ptr<const ScenarioTables> tables);

    StateVec reset(std::uint64_t seed);
    StepResult step(int action);

    const ActionMask& valid_mask() const { return mask_; }
    const NetworkState& state() const { return state_; }
    bool done() const { return done_; }
    int steps_taken() const { return steps_; }
    int action_count() const { return scn_->action_count(); }
    int input_dim() const { return 3 * scn_->map.cell_count(); }
    int resolved_n_ref() const { return n_ref_; }
    double max_children_norm() const { return max_children_norm_; }
    const std::vector<TraceEntry>& trace() const { return trace_; }

    StateVec encode() const { return encode_state(state_, max_children_norm_); }
    double current_reward() const { return reward_of(state_, scn_->reward, n_ref_); }

    // Reward of a state under the given weights; n_ref must be resolved.
    static double reward_of(const NetworkState& state, const RewardConfig& cfg, int n_ref);
    static StateVec encode_state(const NetworkState& state, double max_children_norm);

private:
    void refresh_mask();

    const Scenario* scn_;
    NetworkState state_;
    ActionMask mask_;
    bool done_ = true;
    int steps_ = 0;
    int n_ref_ = 0;
    double max_children_norm_ = 1.0;
    std::uint64_t seed_ = 0;
    std::vector<TraceEntry> trace_;
};

}  // namespace iab
