#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace iab {

// Raised on malformed or contradictory configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a scenario admits no feasible plan (CLI exit code 3).
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data-rate bookkeeping for the backhaul budget accounting.
struct RateConfig {
    double donor_fixed_gbps = 30.0;   // fixed feed available at each donor
    double node_access_gbps = 2.0;    // access demand of a deployed node
    double donor_access_gbps = 2.0;   // access demand served by a donor itself
    double overhead = 1.2;            // per-hop rate overhead factor, >= 1
};

// Weights of the per-step reward; n_ref < 0 means "use the greedy baseline's
// node count", resolved when the environment is constructed.
struct RewardConfig {
    double alpha = 0.1;               // per-uncovered-cell penalty
    double beta = 1.0;                // per-node penalty
    double lambda = 50.0;             // coverage-shortfall penalty weight
    double gamma_bonus = 20.0;        // coverage-threshold bonus weight
    double eta = 5.0;                 // excess-node penalty weight
    double coverage_threshold = 1.0;  // fraction of cells that must be covered
    int n_ref = -1;
};

// Action-elimination parameters. The legacy rule inverts the separation test
// (invalid when farther than min_distance_m from any deployed node), kept for
// auditability; the default is the minimum-separation reading.
struct FilterConfig {
    double min_distance_m = 100.0;
    bool legacy_distance_rule = false;
};

enum class Variant { dqn, ddqn, dueling };

Variant variant_from_string(const std::string& s);
const char* to_string(Variant v);

struct TrainConfig {
    double gamma = 0.99;
    int batch_size = 512;
    int target_update_every = 64;          // gradient steps between target syncs
    bool target_update_per_episode = false;
    double epsilon_start = 1.0;
    double epsilon_decay = 0.9995;         // multiplicative, per episode
    double epsilon_min = 0.05;
    int episodes = 3000;
    int learn_every = 1;                   // gradient steps per env step
    std::size_t replay_capacity = 20000;
    std::vector<int> hidden = {1024, 512, 256};
    double learning_rate = 1e-3;
    double grad_clip = 0.0;                // 0 disables clipping
    int eval_tests = 100;
    double eval_epsilon = 0.05;
    Variant variant = Variant::dqn;
    std::uint64_t seed = 0;                // copied from the scenario seed
};

}  // namespace iab
