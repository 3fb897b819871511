#include "iab/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace iab {

namespace {

constexpr double kLnEps = 1e-5;

// Linear layer dimensions implied by the spec: trunk layers, then either one
// head or the value head followed by the advantage head.
std::vector<std::pair<int, int>> linear_dims(const MlpSpec& spec) {
    std::vector<std::pair<int, int>> dims;
    int in = spec.input_dim;
    for (int h : spec.hidden) {
        dims.emplace_back(h, in);
        in = h;
    }
    if (spec.dueling) {
        dims.emplace_back(1, in);
        dims.emplace_back(spec.output_dim, in);
    } else {
        dims.emplace_back(spec.output_dim, in);
    }
    return dims;
}

}  // namespace

MlpParams MlpParams::zeros(const MlpSpec& spec) {
    MlpParams p;
    for (const auto& [out, in] : linear_dims(spec)) {
        p.w.push_back(Eigen::MatrixXd::Zero(out, in));
        p.b.push_back(Eigen::VectorXd::Zero(out));
    }
    for (int h : spec.hidden) {
        p.ln_gain.push_back(Eigen::VectorXd::Zero(h));
        p.ln_bias.push_back(Eigen::VectorXd::Zero(h));
    }
    return p;
}

void MlpParams::set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
    for (auto& v : ln_gain) v.setZero();
    for (auto& v : ln_bias) v.setZero();
}

std::size_t MlpParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& m : w) n += static_cast<std::size_t>(m.size());
    for (const auto& v : b) n += static_cast<std::size_t>(v.size());
    for (const auto& v : ln_gain) n += static_cast<std::size_t>(v.size());
    for (const auto& v : ln_bias) n += static_cast<std::size_t>(v.size());
    return n;
}

Eigen::VectorXd MlpParams::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(scalar_count()));
    Eigen::Index at = 0;
    auto put = [&](const auto& tensor) {
        flat.segment(at, tensor.size()) = Eigen::Map<const Eigen::VectorXd>(tensor.data(), tensor.size());
        at += tensor.size();
    };
    for (const auto& m : w) put(m);
    for (const auto& v : b) put(v);
    for (const auto& v : ln_gain) put(v);
    for (const auto& v : ln_bias) put(v);
    return flat;
}

void MlpParams::unflatten(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != scalar_count()) {
        throw std::invalid_argument("unflatten: size mismatch");
    }
    Eigen::Index at = 0;
    auto take = [&](auto& tensor) {
        Eigen::Map<Eigen::VectorXd>(tensor.data(), tensor.size()) = flat.segment(at, tensor.size());
        at += tensor.size();
    };
    for (auto& m : w) take(m);
    for (auto& v : b) take(v);
    for (auto& v : ln_gain) take(v);
    for (auto& v : ln_bias) take(v);
}

std::vector<double> dueling_combine(double value, std::span<const double> advantages) {
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= static_cast<double>(advantages.size());
    std::vector<double> q(advantages.size());
    for (std::size_t i = 0; i < advantages.size(); ++i) {
        q[i] = value + advantages[i] - mean;
    }
    return q;
}

Mlp Mlp::he_init(const MlpSpec& spec, Rng& rng) {
    if (spec.input_dim <= 0 || spec.output_dim <= 0) {
        throw std::invalid_argument("he_init: dimensions must be positive");
    }
    for (int h : spec.hidden) {
        if (h <= 0) throw std::invalid_argument("he_init: hidden widths must be positive");
    }
    Mlp net;
    net.spec_ = spec;
    net.p_ = MlpParams::zeros(spec);
    for (auto& w : net.p_.w) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = rng.uniform(-limit, limit);
            }
        }
    }
    for (auto& g : net.p_.ln_gain) g.setOnes();
    return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    Cache cache;
    return forward_cached(x, cache);
}

Eigen::VectorXd Mlp::forward1(std::span<const double> input) const {
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i) {
        x(0, static_cast<Eigen::Index>(i)) = input[i];
    }
    return forward(x).row(0);
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x, Cache& cache) const {
    if (x.cols() != spec_.input_dim) {
        throw std::invalid_argument("forward: input dimension mismatch");
    }
    const std::size_t layers = spec_.hidden.size();
    cache.input = x;
    cache.xhat.resize(layers);
    cache.inv_std.resize(layers);
    cache.preact.resize(layers);
    cache.act.resize(layers);

    Eigen::MatrixXd cur = x;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (cur * p_.w[l].transpose()).rowwise() + p_.b[l].transpose();
        if (spec_.layer_norm) {
            const Eigen::VectorXd mu = z.rowwise().mean();
            Eigen::MatrixXd centered = z.colwise() - mu;
            const Eigen::VectorXd var = centered.array().square().rowwise().mean();
            cache.inv_std[l] = (var.array() + kLnEps).rsqrt();
            cache.xhat[l] = centered.array().colwise() * cache.inv_std[l].array();
            cache.preact[l] = (cache.xhat[l].array().rowwise() * p_.ln_gain[l].transpose().array()).rowwise() +
                              p_.ln_bias[l].transpose().array();
        } else {
            cache.preact[l] = z;
        }
        cache.act[l] = cache.preact[l].cwiseMax(0.0);
        cur = cache.act[l];
    }
    cache.trunk_out = cur;

    const std::size_t head = layers;
    if (!spec_.dueling) {
        return (cur * p_.w[head].transpose()).rowwise() + p_.b[head].transpose();
    }
    const Eigen::VectorXd value = (cur * p_.w[head].transpose()).col(0).array() + p_.b[head](0);
    Eigen::MatrixXd adv = (cur * p_.w[head + 1].transpose()).rowwise() + p_.b[head + 1].transpose();
    const Eigen::VectorXd adv_mean = adv.rowwise().mean();
    Eigen::MatrixXd q = adv.colwise() - adv_mean;
    q.colwise() += value;
    return q;
}

MlpParams Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dq) const {
    MlpParams g = MlpParams::zeros(spec_);
    const std::size_t layers = spec_.hidden.size();
    const std::size_t head = layers;

    Eigen::MatrixXd dcur;  // gradient w.r.t. the trunk output
    if (!spec_.dueling) {
        g.w[head] = dq.transpose() * cache.trunk_out;
        g.b[head] = dq.colwise().sum();
        dcur = dq * p_.w[head];
    } else {
        // q = value + adv - rowmean(adv)
        const Eigen::VectorXd dvalue = dq.rowwise().sum();
        const Eigen::VectorXd dq_mean = dq.rowwise().mean();
        const Eigen::MatrixXd dadv = dq.colwise() - dq_mean;
        g.w[head] = dvalue.transpose() * cache.trunk_out;
        g.b[head] = Eigen::VectorXd::Constant(1, dvalue.sum());
        g.w[head + 1] = dadv.transpose() * cache.trunk_out;
        g.b[head + 1] = dadv.colwise().sum();
        dcur = dvalue * p_.w[head] + dadv * p_.w[head + 1];
    }

    for (std::size_t l = layers; l-- > 0;) {
        // Through ReLU.
        Eigen::MatrixXd dpre =
            (cache.preact[l].array() > 0.0).select(dcur, Eigen::MatrixXd::Zero(dcur.rows(), dcur.cols()));

        Eigen::MatrixXd dz;
        if (spec_.layer_norm) {
            g.ln_bias[l] = dpre.colwise().sum();
            g.ln_gain[l] = (dpre.array() * cache.xhat[l].array()).colwise().sum();
            const Eigen::MatrixXd dxhat = dpre.array().rowwise() * p_.ln_gain[l].transpose().array();
            const Eigen::VectorXd mean_dxhat = dxhat.rowwise().mean();
            const Eigen::VectorXd mean_dxhat_xhat = (dxhat.array() * cache.xhat[l].array()).rowwise().mean();
            dz = ((dxhat.colwise() - mean_dxhat).array() -
                  (cache.xhat[l].array().colwise() * mean_dxhat_xhat.array()))
                     .colwise() *
                 cache.inv_std[l].array();
        } else {
            dz = dpre;
        }

        const Eigen::MatrixXd& below = (l == 0) ? cache.input : cache.act[l - 1];
        g.w[l] = dz.transpose() * below;
        g.b[l] = dz.colwise().sum();
        if (l > 0) {
            dcur = dz * p_.w[l];
        }
    }
    return g;
}

AdamState::AdamState(const AdamConfig& cfg, const MlpSpec& spec)
    : cfg_(cfg), m_(MlpParams::zeros(spec)), v_(MlpParams::zeros(spec)) {}

void AdamState::step(MlpParams& params, const MlpParams& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v.array() = cfg_.beta2 * v.array() + (1.0 - cfg_.beta2) * g.array().square();
        p.array() -= cfg_.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.epsilon);
    };
    for (std::size_t i = 0; i < params.w.size(); ++i) update(params.w[i], grads.w[i], m_.w[i], v_.w[i]);
    for (std::size_t i = 0; i < params.b.size(); ++i) update(params.b[i], grads.b[i], m_.b[i], v_.b[i]);
    for (std::size_t i = 0; i < params.ln_gain.size(); ++i) {
        update(params.ln_gain[i], grads.ln_gain[i], m_.ln_gain[i], v_.ln_gain[i]);
        update(params.ln_bias[i], grads.ln_bias[i], m_.ln_bias[i], v_.ln_bias[i]);
    }
}

namespace {

constexpr char kMagic[8] = {'I', 'A', 'B', 'Q', '0', '0', '0', '1'};

void write_doubles(std::ofstream& out, const Eigen::VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_doubles(std::ifstream& in, std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated parameter payload");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Mlp& net, const AdamState& adam, const std::string& rng_state) {
    nlohmann::json header;
    header["spec"] = {{"input_dim", net.spec().input_dim},
                      {"hidden", net.spec().hidden},
                      {"output_dim", net.spec().output_dim},
                      {"dueling", net.spec().dueling},
                      {"layer_norm", net.spec().layer_norm}};
    header["adam"] = {{"learning_rate", adam.config().learning_rate},
                      {"beta1", adam.config().beta1},
                      {"beta2", adam.config().beta2},
                      {"epsilon", adam.config().epsilon},
                      {"t", adam.timestep()}};
    header["rng_state"] = rng_state;
    header["scalar_count"] = net.params().scalar_count();
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = header_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(), static_cast<std::streamsize>(len));
    write_doubles(out, net.params().flatten());
    write_doubles(out, adam.first_moment().flatten());
    write_doubles(out, adam.second_moment().flatten());
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: bad magic (wrong or corrupt file)");
    }
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header_text(len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("checkpoint: truncated header");
    const nlohmann::json header = nlohmann::json::parse(header_text);

    MlpSpec spec;
    spec.input_dim = header.at("spec").at("input_dim").get<int>();
    spec.hidden = header.at("spec").at("hidden").get<std::vector<int>>();
    spec.output_dim = header.at("spec").at("output_dim").get<int>();
    spec.dueling = header.at("spec").at("dueling").get<bool>();
    spec.layer_norm = header.at("spec").at("layer_norm").get<bool>();

    AdamConfig acfg;
    acfg.learning_rate = header.at("adam").at("learning_rate").get<double>();
    acfg.beta1 = header.at("adam").at("beta1").get<double>();
    acfg.beta2 = header.at("adam").at("beta2").get<double>();
    acfg.epsilon = header.at("adam").at("epsilon").get<double>();

    LoadedCheckpoint loaded;
    Rng dummy(0);
    loaded.net = Mlp::he_init(spec, dummy);
    const std::size_t count = header.at("scalar_count").get<std::size_t>();
    if (count != loaded.net.params().scalar_count()) {
        throw std::runtime_error("checkpoint: parameter count does not match spec");
    }
    loaded.net.params().unflatten(read_doubles(in, count));
    loaded.adam = AdamState(acfg, spec);
    loaded.adam.first_moment().unflatten(read_doubles(in, count));
    loaded.adam.second_moment().unflatten(read_doubles(in, count));
    loaded.adam.set_timestep(header.at("adam").at("t").get<long>());
    loaded.rng_state = header.at("rng_state").get<std::string>();
    return loaded;
}

}  // namespace iab
