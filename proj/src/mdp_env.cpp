#include "iab/mdp_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iab/greedy.hpp"

namespace iab {

MdpEnv::MdpEnv(const Scenario& s) : MdpEnv(s, ScenarioTables::build(s)) {}

MdpEnv::MdpEnv(const Scenario& s, std::shared_ptr<const ScenarioTables> tables)
    : scn_(&s), state_(s, std::move(tables)) {
    n_ref_ = s.reward.n_ref >= 0 ? s.reward.n_ref : resolve_n_ref(s);

    // Largest number of leaves any provider can feed, used to normalize the
    // children channel into [0, 1].
    const RateConfig& r = s.rates;
    const double distributable = r.donor_fixed_gbps / r.overhead - r.donor_access_gbps;
    const double leaf_feed = r.overhead * r.node_access_gbps;
    max_children_norm_ = std::max(1.0, std::floor(distributable / leaf_feed));

    reset(s.seed);
}

StateVec MdpEnv::reset(std::uint64_t seed) {
    seed_ = seed;
    state_.reset();
    steps_ = 0;
    done_ = false;
    trace_.clear();
    refresh_mask();
    // A scenario whose donors already meet the threshold has nothing to decide.
    if (state_.coverage_fraction() >= scn_->reward.coverage_threshold) {
        done_ = true;
    }
    return encode();
}

void MdpEnv::refresh_mask() {
    mask_ = filter_actions(state_, scn_->filter);
}

StepResult MdpEnv::step(int action) {
    if (done_) {
        throw std::logic_error("step: episode already finished");
    }
    if (action < 0 || action >= action_count()) {
        throw std::invalid_argument("step: action index out of range");
    }
    if (!mask_.is_valid(action)) {
        throw std::invalid_argument("step: action is masked invalid");
    }

    ++steps_;
    if (action == 0) {
        done_ = true;
    } else {
        const int site = action - 1;
        const auto parent = state_.best_parent(site);
        if (!parent) {
            throw std::logic_error("step: masked-valid action has no feasible parent");
        }
        state_.attach(site, *parent);
        refresh_mask();
        const bool covered = state_.coverage_fraction() >= scn_->reward.coverage_threshold;
        const bool exhausted = !mask_.any_deploy();
        const bool overlong = steps_ > scn_->site_count();
        done_ = covered || exhausted || overlong;
    }

    StepResult out;
    out.reward = current_reward();
    out.done = done_;
    out.state = encode();
    trace_.push_back(TraceEntry{steps_, action, out.reward, state_.coverage_fraction(), state_.node_count()});
    return out;
}

double MdpEnv::reward_of(const NetworkState& state, const RewardConfig& cfg, int n_ref) {
    if (n_ref < 0) {
        throw std::invalid_argument("reward_of: n_ref must be resolved");
    }
    const int cells = state.scenario().map.cell_count();
    const double uncovered = static_cast<double>(cells - state.covered_cells());
    const double nodes = static_cast<double>(state.node_count());
    const double coverage = state.coverage_fraction();

    double delta;
    if (coverage < cfg.coverage_threshold) {
        delta = -cfg.lambda * (1.0 - coverage / cfg.coverage_threshold);
    } else {
        delta = cfg.gamma_bonus * std::exp(coverage - cfg.coverage_threshold);
    }
    return -cfg.alpha * uncovered - cfg.beta * nodes + delta - cfg.eta * std::max(0.0, nodes - n_ref);
}

StateVec MdpEnv::encode_state(const NetworkState& state, double max_children_norm) {
    const Scenario& s = state.scenario();
    const int cells = s.map.cell_count();
    const NetworkState::Matrices m = state.project_matrices();

    StateVec v(static_cast<std::size_t>(3 * cells));
    const double rate_norm = s.rates.donor_fixed_gbps;
    for (int k = 0; k < cells; ++k) {
        v[static_cast<std::size_t>(k)] = m.deployment[static_cast<std::size_t>(k)];
        v[static_cast<std::size_t>(cells + k)] =
            std::clamp(m.residual[static_cast<std::size_t>(k)] / rate_norm, 0.0, 1.0);
        v[static_cast<std::size_t>(2 * cells + k)] =
            std::clamp(m.children[static_cast<std::size_t>(k)] / max_children_norm, 0.0, 1.0);
    }
    return v;
}

}  // namespace iab
