#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "iab/rng.hpp"
#include "iab/scenario.hpp"

namespace iab::test {

inline nlohmann::json positions_json(const std::vector<std::pair<double, double>>& donors) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [x, y] : donors) {
        arr.push_back({x, y});
    }
    return arr;
}

// Minimal config for an explicit-donor map; radii in meters.
inline nlohmann::json small_config(double width, double height, double cell,
                                   const std::vector<std::pair<double, double>>& donors, double cover_r,
                                   double backhaul_r) {
    return nlohmann::json{
        {"map", {{"width_m", width}, {"height_m", height}, {"cell_size_m", cell}}},
        {"donors", {{"positions", positions_json(donors)}}},
        {"radio", {{"coverage_radius_m", cover_r}, {"backhaul_radius_m", backhaul_r}}},
        {"seed", 1}};
}

inline nlohmann::json default_config(const std::string& pattern = "five_dice") {
    return nlohmann::json{{"map", {{"width_m", 1000.0}, {"height_m", 1000.0}, {"cell_size_m", 50.0}}},
                          {"donors", {{"pattern", pattern}}},
                          {"seed", 1}};
}

// Random tiny instance with at most 8 candidate sites; geometry, radii and
// rate budgets all vary. Used by the property suites and the oracle checks.
inline nlohmann::json random_tiny_config(Rng& rng) {
    static const std::pair<int, int> dims[] = {{3, 3}, {2, 4}, {4, 2}, {3, 2}, {2, 3}};
    const auto [nx, ny] = dims[rng.uniform_below(std::size(dims))];
    const double cell = 50.0;
    const double width = nx * cell;
    const double height = ny * cell;

    const int donors = 1 + static_cast<int>(rng.uniform_below(2));
    std::vector<std::pair<double, double>> donor_pos;
    std::vector<int> taken;
    while (static_cast<int>(donor_pos.size()) < donors) {
        const int cell_idx = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(nx * ny)));
        bool dup = false;
        for (int t : taken) {
            dup = dup || t == cell_idx;
        }
        if (dup) continue;
        taken.push_back(cell_idx);
        const int ix = cell_idx % nx;
        const int iy = cell_idx / nx;
        donor_pos.emplace_back((ix + 0.5) * cell, (iy + 0.5) * cell);
    }

    nlohmann::json config = small_config(width, height, cell, donor_pos, rng.uniform(55.0, 120.0),
                                         rng.uniform(75.0, 170.0));
    config["rates"] = {{"donor_fixed", rng.uniform(8.0, 30.0)},
                       {"node_access", rng.uniform(1.0, 3.0)},
                       {"donor_access", rng.uniform(1.0, 3.0)},
                       {"overhead", rng.uniform(1.0, 1.3)}};
    config["filter"] = {{"min_distance_m", rng.uniform01() < 0.5 ? 0.0 : 60.0}};
    config["seed"] = rng.next_u64() % 100000;
    return config;
}

}  // namespace iab::test
