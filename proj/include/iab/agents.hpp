#pragma once

#include <cstdint>
#include <vector>

#include "iab/mdp_env.hpp"
#include "iab/mlp.hpp"

namespace iab {

struct Transition {
    StateVec state;
    int action = 0;
    double reward = 0.0;
    StateVec next_state;
    bool done = false;
    std::vector<char> next_valid;  // action mask of the next state
};

// Ring buffer with FIFO eviction and uniform without-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }

    // Logical index 0 is the oldest stored transition.
    const Transition& at(std::size_t logical) const;

    std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // ring write position once full
    std::vector<Transition> store_;
};

// Masked epsilon-greedy: with probability epsilon a uniformly random valid
// action, otherwise the masked argmax of the online q-values.
int select_action(const Mlp& online, const StateVec& state, const ActionMask& mask, double epsilon, Rng& rng);

// Bootstrap targets for a sampled batch. DQN maxes the target net over the
// next state's valid actions; DDQN evaluates the online argmax with the
// target net; terminal transitions truncate to the reward.
std::vector<double> td_target(const std::vector<const Transition*>& batch, Variant variant, const Mlp& online,
                              const Mlp& target, double gamma);

struct EpisodeStats {
    int episode = 0;
    double reward = 0.0;  // undiscounted episode return
    double epsilon = 0.0;
    int nodes = 0;
    double coverage = 0.0;
    double wall_ms = 0.0;
};

struct RunMetrics {
    std::vector<EpisodeStats> episodes;
};

struct TrainResult {
    Mlp net;
    AdamState adam;
    RunMetrics metrics;
    std::string rng_state;  // trainer RNG at the end of the run
};

// Episode loop with action elimination: filter valid actions, act
// epsilon-greedily, store the transition, and take one gradient step per env
// step once the buffer holds a full batch. The target network syncs every
// target_update_every gradient steps (or per episode when configured so);
// epsilon decays multiplicatively per episode.
TrainResult train(MdpEnv& env, const TrainConfig& cfg);

}  // namespace iab
