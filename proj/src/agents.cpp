#include "iab/agents.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace iab {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }
    store_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= store_.size()) {
        throw std::out_of_range("ReplayBuffer::at");
    }
    if (store_.size() < capacity_) {
        return store_[logical];
    }
    return store_[(next_ + logical) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    const std::size_t n = store_.size();
    if (batch > n) {
        throw std::invalid_argument("ReplayBuffer::sample: batch larger than buffer");
    }
    // Floyd's algorithm: distinct physical indices, uniform over the buffer.
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t i = n - batch; i < n; ++i) {
        const std::size_t j = rng.uniform_below(i + 1);
        if (std::find(picked.begin(), picked.end(), j) != picked.end()) {
            picked.push_back(i);
        } else {
            picked.push_back(j);
        }
    }
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t idx : picked) {
        out.push_back(&store_[idx]);
    }
    return out;
}

int select_action(const Mlp& online, const StateVec& state, const ActionMask& mask, double epsilon, Rng& rng) {
    if (rng.uniform01() < epsilon) {
        std::vector<int> valid;
        valid.reserve(static_cast<std::size_t>(mask.size()));
        for (int a = 0; a < mask.size(); ++a) {
            if (mask.is_valid(a)) {
                valid.push_back(a);
            }
        }
        if (valid.empty()) {
            throw std::invalid_argument("select_action: mask has no valid action");
        }
        return valid[rng.uniform_below(valid.size())];
    }
    const Eigen::VectorXd q = online.forward1(state);
    return masked_argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), mask);
}

std::vector<double> td_target(const std::vector<const Transition*>& batch, Variant variant, const Mlp& online,
                              const Mlp& target, double gamma) {
    const std::size_t n = batch.size();
    std::vector<double> y(n);

    // Forward only the non-terminal next states.
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
        if (!batch[i]->done) {
            open.push_back(i);
        } else {
            y[i] = batch[i]->reward;
        }
    }
    if (open.empty()) {
        return y;
    }

    const int dim = static_cast<int>(batch[open[0]]->next_state.size());
    Eigen::MatrixXd xn(static_cast<Eigen::Index>(open.size()), dim);
    for (std::size_t r = 0; r < open.size(); ++r) {
        const StateVec& s = batch[open[r]]->next_state;
        for (int c = 0; c < dim; ++c) {
            xn(static_cast<Eigen::Index>(r), c) = s[static_cast<std::size_t>(c)];
        }
    }

    const Eigen::MatrixXd qt = target.forward(xn);
    Eigen::MatrixXd qo;
    if (variant == Variant::ddqn) {
        qo = online.forward(xn);
    }

    for (std::size_t r = 0; r < open.size(); ++r) {
        const std::size_t i = open[r];
        const std::vector<char>& valid = batch[i]->next_valid;
        int pick = -1;
        double pick_score = 0.0;
        for (int a = 0; a < static_cast<int>(valid.size()); ++a) {
            if (!valid[static_cast<std::size_t>(a)]) {
                continue;
            }
            const double score = (variant == Variant::ddqn) ? qo(static_cast<Eigen::Index>(r), a)
                                                            : qt(static_cast<Eigen::Index>(r), a);
            if (pick < 0 || score > pick_score) {
                pick = a;
                pick_score = score;
            }
        }
        if (pick < 0) {
            throw std::logic_error("td_target: next state has no valid action");
        }
        y[i] = batch[i]->reward + gamma * qt(static_cast<Eigen::Index>(r), pick);
    }
    return y;
}

namespace {

double grad_norm(const MlpParams& g) {
    double sq = 0.0;
    for (const auto& m : g.w) sq += m.squaredNorm();
    for (const auto& v : g.b) sq += v.squaredNorm();
    for (const auto& v : g.ln_gain) sq += v.squaredNorm();
    for (const auto& v : g.ln_bias) sq += v.squaredNorm();
    return std::sqrt(sq);
}

void scale_grads(MlpParams& g, double factor) {
    for (auto& m : g.w) m *= factor;
    for (auto& v : g.b) v *= factor;
    for (auto& v : g.ln_gain) v *= factor;
    for (auto& v : g.ln_bias) v *= factor;
}

void gradient_step(Mlp& online, AdamState& adam, const std::vector<const Transition*>& batch,
                   const std::vector<double>& y, double grad_clip) {
    const std::size_t n = batch.size();
    const int dim = static_cast<int>(batch[0]->state.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), dim);
    for (std::size_t r = 0; r < n; ++r) {
        const StateVec& s = batch[r]->state;
        for (int c = 0; c < dim; ++c) {
            x(static_cast<Eigen::Index>(r), c) = s[static_cast<std::size_t>(c)];
        }
    }

    Mlp::Cache cache;
    const Eigen::MatrixXd q = online.forward_cached(x, cache);

    // Squared-error loss on the taken actions, averaged over the batch.
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    for (std::size_t r = 0; r < n; ++r) {
        const int a = batch[r]->action;
        dq(static_cast<Eigen::Index>(r), a) =
            2.0 * (q(static_cast<Eigen::Index>(r), a) - y[r]) / static_cast<double>(n);
    }

    MlpParams grads = online.backward(cache, dq);
    if (grad_clip > 0.0) {
        const double norm = grad_norm(grads);
        if (norm > grad_clip) {
            scale_grads(grads, grad_clip / norm);
        }
    }
    adam.step(online.params(), grads);
}

}  // namespace

TrainResult train(MdpEnv& env, const TrainConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 0x7261696e));  // training stream

    MlpSpec spec;
    spec.input_dim = env.input_dim();
    spec.hidden = cfg.hidden;
    spec.output_dim = env.action_count();
    spec.dueling = cfg.variant == Variant::dueling;

    Mlp online = Mlp::he_init(spec, rng);
    Mlp target = online;  // copy-into-target: deep copy by value semantics
    AdamState adam(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}, spec);
    ReplayBuffer buffer(cfg.replay_capacity);

    TrainResult result;
    result.metrics.episodes.reserve(static_cast<std::size_t>(cfg.episodes));

    double epsilon = cfg.epsilon_start;
    long grad_steps = 0;
    long env_steps = 0;

    for (int episode = 0; episode < cfg.episodes; ++episode) {
        const auto t0 = std::chrono::steady_clock::now();
        StateVec state = env.reset(mix_seed(cfg.seed, static_cast<std::uint64_t>(episode)));
        double episode_reward = 0.0;

        while (!env.done()) {
            const ActionMask mask = env.valid_mask();
            const int action = select_action(online, state, mask, epsilon, rng);
            StepResult step = env.step(action);
            episode_reward += step.reward;

            Transition t;
            t.state = std::move(state);
            t.action = action;
            t.reward = step.reward;
            t.next_state = step.state;
            t.done = step.done;
            t.next_valid = env.valid_mask().valid;
            buffer.push(std::move(t));
            state = std::move(step.state);
            ++env_steps;

            if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size) && env_steps % cfg.learn_every == 0) {
                const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
                const auto y = td_target(batch, cfg.variant, online, target, cfg.gamma);
                gradient_step(online, adam, batch, y, cfg.grad_clip);
                ++grad_steps;
                if (!cfg.target_update_per_episode && grad_steps % cfg.target_update_every == 0) {
                    target = online;
                }
            }
        }

        if (cfg.target_update_per_episode) {
            target = online;
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpisodeStats stats;
        stats.episode = episode;
        stats.reward = episode_reward;
        stats.epsilon = epsilon;
        stats.nodes = env.state().node_count();
        stats.coverage = env.state().coverage_fraction();
        stats.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        result.metrics.episodes.push_back(stats);

        epsilon = std::max(cfg.epsilon_min, epsilon * cfg.epsilon_decay);
    }

    result.net = std::move(online);
    result.adam = std::move(adam);
    result.rng_state = rng.save_state();
    return result;
}

}  // namespace iab
