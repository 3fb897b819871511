#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iab/rng.hpp"

namespace iab {

struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden = {1024, 512, 256};
    int output_dim = 0;
    bool dueling = false;    // value + advantage heads over a shared trunk
    bool layer_norm = true;  // after each hidden linear transform, before ReLU

    bool operator==(const MlpSpec&) const = default;
};

// All learnable tensors of one network. The same container shape carries
// gradients and Adam moment estimates.
struct MlpParams {
    std::vector<Eigen::MatrixXd> w;        // (out x in) per linear layer; heads last
    std::vector<Eigen::VectorXd> b;
    std::vector<Eigen::VectorXd> ln_gain;  // per hidden layer
    std::vector<Eigen::VectorXd> ln_bias;

    static MlpParams zeros(const MlpSpec& spec);
    void set_zero();
    std::size_t scalar_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);
};

// Dueling head aggregation: Q(a) = V + A(a) - mean(A).
std::vector<double> dueling_combine(double value, std::span<const double> advantages);

// Fixed-topology multilayer perceptron: per hidden layer a linear transform,
// layer normalization, then ReLU; a single linear head, or value/advantage
// heads combined with dueling_combine. Double precision throughout.
class Mlp {
public:
    Mlp() = default;

    static Mlp he_init(const MlpSpec& spec, Rng& rng);

    const MlpSpec& spec() const { return spec_; }
    MlpParams& params() { return p_; }
    const MlpParams& params() const { return p_; }

    // Rows of x are independent inputs.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd forward1(std::span<const double> input) const;

    struct Cache {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> xhat;     // normalized pre-affine (empty when layer_norm off)
        std::vector<Eigen::VectorXd> inv_std;  // per-row 1/sqrt(var+eps)
        std::vector<Eigen::MatrixXd> preact;   // pre-ReLU
        std::vector<Eigen::MatrixXd> act;      // post-ReLU (act[0] is the first hidden output)
        Eigen::MatrixXd trunk_out;
    };

    Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, Cache& cache) const;

    // Gradients of all parameters given dL/dQ for the cached forward pass.
    MlpParams backward(const Cache& cache, const Eigen::MatrixXd& dq) const;

private:
    MlpSpec spec_;
    MlpParams p_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(const AdamConfig& cfg, const MlpSpec& spec);

    void step(MlpParams& params, const MlpParams& grads);

    long timestep() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    MlpParams& first_moment() { return m_; }
    MlpParams& second_moment() { return v_; }
    const MlpParams& first_moment() const { return m_; }
    const MlpParams& second_moment() const { return v_; }
    void set_timestep(long t) { t_ = t; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    MlpParams m_, v_;
};

// Versioned binary checkpoint: spec, flattened parameters, Adam state and the
// trainer RNG state. Loading reproduces forward outputs bit-exactly.
void save_checkpoint(const std::string& path, const Mlp& net, const AdamState& adam, const std::string& rng_state);

struct LoadedCheckpoint {
    Mlp net;
    AdamState adam;
    std::string rng_state;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace iab
