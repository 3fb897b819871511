#include "iab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

namespace iab {

namespace {

using nlohmann::json;

// Reads one object block, collecting the keys it consumes so that anything
// left over can be rejected as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& raw(const char* key) {
        mark(key);
        if (!j_.contains(key)) {
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        }
        return j_.at(key);
    }

    double number(const char* key) {
        const json& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number");
        }
        return v.get<double>();
    }

    double number_or(const char* key, double def) {
        mark(key);
        if (!j_.contains(key)) return def;
        return number(key);
    }

    int integer_or(const char* key, int def) {
        mark(key);
        if (!j_.contains(key)) return def;
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v.get<int>();
    }

    std::uint64_t uinteger_or(const char* key, std::uint64_t def) {
        mark(key);
        if (!j_.contains(key)) return def;
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(path_ + "." + key + ": expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean_or(const char* key, bool def) {
        mark(key);
        if (!j_.contains(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) {
            throw ConfigError(path_ + "." + key + ": expected a boolean");
        }
        return v.get<bool>();
    }

    std::string string_or(const char* key, const std::string& def) {
        mark(key);
        if (!j_.contains(key)) return def;
        const json& v = raw(key);
        if (!v.is_string()) {
            throw ConfigError(path_ + "." + key + ": expected a string");
        }
        return v.get<std::string>();
    }

    // Fails on keys that were never consumed by any accessor.
    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
            }
        }
    }

    const json& object() const { return j_; }
    const std::string& path() const { return path_; }

private:
    void mark(const char* key) { seen_.insert(key); }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Point parse_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(path + ": expected [x, y]");
    }
    return Point{v[0].get<double>(), v[1].get<double>()};
}

GridMap parse_map(const json& block) {
    ObjectReader r(block, "map");
    GridMap m;
    m.width_m = r.number("width_m");
    m.height_m = r.number("height_m");
    m.cell_size_m = r.number("cell_size_m");
    r.finish();

    if (m.width_m <= 0 || m.height_m <= 0 || m.cell_size_m <= 0) {
        throw ConfigError("map: dimensions must be positive");
    }
    const double cx = m.width_m / m.cell_size_m;
    const double cy = m.height_m / m.cell_size_m;
    if (std::abs(cx - std::round(cx)) > 1e-9 || std::abs(cy - std::round(cy)) > 1e-9) {
        throw ConfigError("map: width_m and height_m must be exact multiples of cell_size_m");
    }

    const int cols = static_cast<int>(std::round(cx));
    const int rows = static_cast<int>(std::round(cy));
    m.cells.reserve(static_cast<std::size_t>(cols) * rows);
    for (int iy = 0; iy < rows; ++iy) {
        for (int ix = 0; ix < cols; ++ix) {
            m.cells.push_back(Point{(ix + 0.5) * m.cell_size_m, (iy + 0.5) * m.cell_size_m});
        }
    }
    return m;
}

DonorLayout parse_donors(const json& block, const GridMap& map) {
    ObjectReader r(block, "donors");
    DonorLayout layout;
    const bool has_pattern = r.has("pattern");
    const bool has_positions = r.has("positions");
    if (has_pattern == has_positions) {
        throw ConfigError("donors: exactly one of 'pattern' or 'positions' is required");
    }
    if (has_pattern) {
        layout.pattern = pattern_from_string(r.string_or("pattern", ""));
        layout.positions = donor_positions(layout.pattern, map);
    } else {
        layout.pattern = DonorPattern::explicit_positions;
        const json& arr = r.raw("positions");
        if (!arr.is_array()) {
            throw ConfigError("donors.positions: expected an array of [x, y]");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            layout.positions.push_back(parse_point(arr[i], "donors.positions[" + std::to_string(i) + "]"));
        }
    }
    r.finish();

    for (const Point& p : layout.positions) {
        if (p.x < 0 || p.x > map.width_m || p.y < 0 || p.y > map.height_m) {
            throw ConfigError("donors: position outside the map");
        }
    }
    return layout;
}

RateConfig parse_rates(const json& block) {
    ObjectReader r(block, "rates");
    RateConfig c;
    c.donor_fixed_gbps = r.number_or("donor_fixed", c.donor_fixed_gbps);
    c.node_access_gbps = r.number_or("node_access", c.node_access_gbps);
    c.donor_access_gbps = r.number_or("donor_access", c.donor_access_gbps);
    c.overhead = r.number_or("overhead", c.overhead);
    r.finish();

    if (c.overhead < 1.0) throw ConfigError("rates.overhead: must be >= 1");
    if (c.donor_fixed_gbps <= 0 || c.node_access_gbps <= 0 || c.donor_access_gbps <= 0) {
        throw ConfigError("rates: all rates must be positive");
    }
    return c;
}

RadioConfig parse_radio(const json& block) {
    ObjectReader r(block, "radio");
    RadioConfig c;
    c.tx_power_dbm = r.number_or("tx_power_dbm", c.tx_power_dbm);
    c.tx_gain_db = r.number_or("tx_gain_db", c.tx_gain_db);
    c.rx_gain_db = r.number_or("rx_gain_db", c.rx_gain_db);
    c.bandwidth_hz = r.number_or("bandwidth_hz", c.bandwidth_hz);
    c.frequency_ghz = r.number_or("frequency_ghz", c.frequency_ghz);
    c.atmospheric_atten_db_per_km = r.number_or("atmospheric_atten_db_per_km", c.atmospheric_atten_db_per_km);
    c.rain_atten_db_per_km = r.number_or("rain_atten_db_per_km", c.rain_atten_db_per_km);
    c.snr_threshold_db = r.number_or("snr_threshold_db", c.snr_threshold_db);
    c.backhaul_snr_threshold_db = r.number_or("backhaul_snr_threshold_db", c.backhaul_snr_threshold_db);
    const std::string mode = r.string_or("coverage_mode", "radius");
    if (mode == "radius") {
        c.coverage_mode = CoverageMode::radius;
    } else if (mode == "snr") {
        c.coverage_mode = CoverageMode::snr;
    } else {
        throw ConfigError("radio.coverage_mode: expected 'radius' or 'snr'");
    }
    c.coverage_radius_m = r.number_or("coverage_radius_m", c.coverage_radius_m);
    c.backhaul_radius_m = r.number_or("backhaul_radius_m", c.backhaul_radius_m);
    r.finish();

    if (c.bandwidth_hz <= 0) throw ConfigError("radio.bandwidth_hz: must be positive");
    if (c.coverage_radius_m <= 0 || c.backhaul_radius_m <= 0) {
        throw ConfigError("radio: radii must be positive");
    }
    if (c.coverage_radius_m > c.backhaul_radius_m) {
        std::cerr << "warning: coverage_radius_m (" << c.coverage_radius_m
                  << ") exceeds backhaul_radius_m (" << c.backhaul_radius_m << ")\n";
    }
    return c;
}

RewardConfig parse_reward(const json& block) {
    ObjectReader r(block, "reward");
    RewardConfig c;
    c.alpha = r.number_or("alpha", c.alpha);
    c.beta = r.number_or("beta", c.beta);
    c.lambda = r.number_or("lambda", c.lambda);
    c.gamma_bonus = r.number_or("gamma", c.gamma_bonus);
    c.eta = r.number_or("eta", c.eta);
    c.coverage_threshold = r.number_or("coverage_threshold", c.coverage_threshold);
    c.n_ref = r.integer_or("n_ref", c.n_ref);
    r.finish();

    if (c.alpha < 0 || c.beta < 0 || c.lambda < 0 || c.gamma_bonus < 0 || c.eta < 0) {
        throw ConfigError("reward: weights must be non-negative");
    }
    if (c.coverage_threshold <= 0 || c.coverage_threshold > 1) {
        throw ConfigError("reward.coverage_threshold: must be in (0, 1]");
    }
    return c;
}

FilterConfig parse_filter(const json& block) {
    ObjectReader r(block, "filter");
    FilterConfig c;
    c.min_distance_m = r.number_or("min_distance_m", c.min_distance_m);
    c.legacy_distance_rule = r.boolean_or("legacy_distance_rule", c.legacy_distance_rule);
    r.finish();
    if (c.min_distance_m < 0) throw ConfigError("filter.min_distance_m: must be non-negative");
    return c;
}

TrainConfig parse_training(const json& block) {
    ObjectReader r(block, "training");
    TrainConfig c;
    c.gamma = r.number_or("gamma", c.gamma);
    c.batch_size = r.integer_or("batch_size", c.batch_size);
    c.target_update_every = r.integer_or("target_update_every", c.target_update_every);
    c.target_update_per_episode = r.boolean_or("target_update_per_episode", c.target_update_per_episode);
    c.epsilon_start = r.number_or("epsilon_start", c.epsilon_start);
    c.epsilon_decay = r.number_or("epsilon_decay", c.epsilon_decay);
    c.epsilon_min = r.number_or("epsilon_min", c.epsilon_min);
    c.episodes = r.integer_or("episodes", c.episodes);
    c.learn_every = r.integer_or("learn_every", c.learn_every);
    c.replay_capacity = static_cast<std::size_t>(r.integer_or("replay_capacity", static_cast<int>(c.replay_capacity)));
    c.learning_rate = r.number_or("learning_rate", c.learning_rate);
    c.grad_clip = r.number_or("grad_clip", c.grad_clip);
    c.eval_tests = r.integer_or("eval_tests", c.eval_tests);
    c.eval_epsilon = r.number_or("eval_epsilon", c.eval_epsilon);
    c.variant = variant_from_string(r.string_or("variant", to_string(c.variant)));
    if (r.has("hidden")) {
        const json& arr = r.raw("hidden");
        if (!arr.is_array() || arr.empty()) {
            throw ConfigError("training.hidden: expected a non-empty array of layer widths");
        }
        c.hidden.clear();
        for (const json& v : arr) {
            if (!v.is_number_integer() || v.get<int>() <= 0) {
                throw ConfigError("training.hidden: layer widths must be positive integers");
            }
            c.hidden.push_back(v.get<int>());
        }
    }
    r.finish();

    if (c.gamma < 0 || c.gamma > 1) throw ConfigError("training.gamma: must be in [0, 1]");
    if (c.batch_size < 1) throw ConfigError("training.batch_size: must be >= 1");
    if (c.epsilon_start < 0 || c.epsilon_start > 1 || c.epsilon_min < 0 || c.epsilon_min > 1 ||
        c.epsilon_decay < 0 || c.epsilon_decay > 1) {
        throw ConfigError("training: epsilon parameters must be in [0, 1]");
    }
    if (c.episodes < 0) throw ConfigError("training.episodes: must be non-negative");
    if (c.learn_every < 1) throw ConfigError("training.learn_every: must be >= 1");
    if (c.replay_capacity < 1) throw ConfigError("training.replay_capacity: must be >= 1");
    return c;
}

}  // namespace

int GridMap::cell_index_at(const Point& p) const {
    const int nx = cols();
    const int ny = rows();
    int ix = static_cast<int>(std::floor(p.x / cell_size_m));
    int iy = static_cast<int>(std::floor(p.y / cell_size_m));
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);
    return iy * nx + ix;
}

DonorPattern pattern_from_string(const std::string& s) {
    if (s == "five_dice") return DonorPattern::five_dice;
    if (s == "vertical") return DonorPattern::vertical;
    if (s == "pentagon") return DonorPattern::pentagon;
    if (s == "explicit") return DonorPattern::explicit_positions;
    throw ConfigError("unknown donor pattern '" + s + "'");
}

const char* to_string(DonorPattern p) {
    switch (p) {
        case DonorPattern::five_dice: return "five_dice";
        case DonorPattern::vertical: return "vertical";
        case DonorPattern::pentagon: return "pentagon";
        case DonorPattern::explicit_positions: return "explicit";
    }
    return "?";
}

std::vector<Point> donor_positions(DonorPattern pattern, const GridMap& map) {
    const double w = map.width_m;
    const double h = map.height_m;
    switch (pattern) {
        case DonorPattern::five_dice:
            return {Point{0.25 * w, 0.25 * h}, Point{0.75 * w, 0.25 * h}, Point{0.50 * w, 0.50 * h},
                    Point{0.25 * w, 0.75 * h}, Point{0.75 * w, 0.75 * h}};
        case DonorPattern::vertical: {
            std::vector<Point> out;
            for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                out.push_back(Point{0.5 * w, f * h});
            }
            return out;
        }
        case DonorPattern::pentagon: {
            const double r = 0.35 * std::min(w, h);
            const Point c{0.5 * w, 0.5 * h};
            std::vector<Point> out;
            for (int k = 0; k < 5; ++k) {
                const double theta = std::numbers::pi / 2.0 + k * 2.0 * std::numbers::pi / 5.0;
                out.push_back(Point{c.x + r * std::cos(theta), c.y + r * std::sin(theta)});
            }
            return out;
        }
        case DonorPattern::explicit_positions:
            throw ConfigError("donor_positions: the explicit pattern has no generated coordinates");
    }
    throw ConfigError("donor_positions: unknown pattern");
}

Scenario build_scenario(const nlohmann::json& config) {
    ObjectReader top(config, "config");
    Scenario s;
    s.map = parse_map(top.raw("map"));
    s.donors = parse_donors(top.raw("donors"), s.map);
    s.rates = top.has("rates") ? parse_rates(top.raw("rates")) : RateConfig{};
    s.radio = top.has("radio") ? parse_radio(top.raw("radio")) : RadioConfig{};
    s.reward = top.has("reward") ? parse_reward(top.raw("reward")) : RewardConfig{};
    s.filter = top.has("filter") ? parse_filter(top.raw("filter")) : FilterConfig{};
    s.training = top.has("training") ? parse_training(top.raw("training")) : TrainConfig{};
    s.seed = top.uinteger_or("seed", 0);
    s.training.seed = s.seed;
    top.finish();

    for (const Point& p : s.donors.positions) {
        s.donor_cell.push_back(s.map.cell_index_at(p));
    }

    // Candidate sites: every cell center whose cell is not occupied by a donor.
    std::set<int> occupied(s.donor_cell.begin(), s.donor_cell.end());
    for (int cell = 0; cell < s.map.cell_count(); ++cell) {
        if (!occupied.count(cell)) {
            s.sites.push_back(s.map.cells[static_cast<std::size_t>(cell)]);
            s.site_cell.push_back(cell);
        }
    }
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    nlohmann::json config;
    try {
        in >> config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return build_scenario(config);
}

nlohmann::json resolved_config(const Scenario& s) {
    nlohmann::json j;
    j["map"] = {{"width_m", s.map.width_m}, {"height_m", s.map.height_m}, {"cell_size_m", s.map.cell_size_m}};
    if (s.donors.pattern == DonorPattern::explicit_positions) {
        nlohmann::json positions = nlohmann::json::array();
        for (const Point& p : s.donors.positions) {
            positions.push_back({p.x, p.y});
        }
        j["donors"] = {{"positions", positions}};
    } else {
        j["donors"] = {{"pattern", to_string(s.donors.pattern)}};
    }
    j["rates"] = {{"donor_fixed", s.rates.donor_fixed_gbps},
                  {"node_access", s.rates.node_access_gbps},
                  {"donor_access", s.rates.donor_access_gbps},
                  {"overhead", s.rates.overhead}};
    j["radio"] = {{"tx_power_dbm", s.radio.tx_power_dbm},
                  {"tx_gain_db", s.radio.tx_gain_db},
                  {"rx_gain_db", s.radio.rx_gain_db},
                  {"bandwidth_hz", s.radio.bandwidth_hz},
                  {"frequency_ghz", s.radio.frequency_ghz},
                  {"atmospheric_atten_db_per_km", s.radio.atmospheric_atten_db_per_km},
                  {"rain_atten_db_per_km", s.radio.rain_atten_db_per_km},
                  {"snr_threshold_db", s.radio.snr_threshold_db},
                  {"backhaul_snr_threshold_db", s.radio.backhaul_snr_threshold_db},
                  {"coverage_mode", s.radio.coverage_mode == CoverageMode::radius ? "radius" : "snr"},
                  {"coverage_radius_m", s.radio.coverage_radius_m},
                  {"backhaul_radius_m", s.radio.backhaul_radius_m}};
    j["reward"] = {{"alpha", s.reward.alpha},
                   {"beta", s.reward.beta},
                   {"lambda", s.reward.lambda},
                   {"gamma", s.reward.gamma_bonus},
                   {"eta", s.reward.eta},
                   {"coverage_threshold", s.reward.coverage_threshold},
                   {"n_ref", s.reward.n_ref}};
    j["filter"] = {{"min_distance_m", s.filter.min_distance_m},
                   {"legacy_distance_rule", s.filter.legacy_distance_rule}};
    j["training"] = {{"gamma", s.training.gamma},
                     {"batch_size", s.training.batch_size},
                     {"target_update_every", s.training.target_update_every},
                     {"target_update_per_episode", s.training.target_update_per_episode},
                     {"epsilon_start", s.training.epsilon_start},
                     {"epsilon_decay", s.training.epsilon_decay},
                     {"epsilon_min", s.training.epsilon_min},
                     {"episodes", s.training.episodes},
                     {"learn_every", s.training.learn_every},
                     {"replay_capacity", s.training.replay_capacity},
                     {"hidden", s.training.hidden},
                     {"learning_rate", s.training.learning_rate},
                     {"grad_clip", s.training.grad_clip},
                     {"eval_tests", s.training.eval_tests},
                     {"eval_epsilon", s.training.eval_epsilon},
                     {"variant", to_string(s.training.variant)}};
    j["seed"] = s.seed;
    return j;
}

void apply_desk_scale_preset(nlohmann::json& config) {
    config["map"] = {{"width_m", 500.0}, {"height_m", 500.0}, {"cell_size_m", 50.0}};
    config["donors"] = {{"positions", {{125.0, 125.0}, {375.0, 375.0}}}};
    nlohmann::json& training = config["training"];
    if (!training.is_object()) training = nlohmann::json::object();
    training["episodes"] = 3000;
    training["batch_size"] = 128;
    training["hidden"] = {128, 64};
    training["epsilon_decay"] = 0.9985;
}

}  // namespace iab
