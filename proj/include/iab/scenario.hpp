#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "iab/config.hpp"
#include "iab/geometry.hpp"
#include "iab/link_model.hpp"

namespace iab {

// Regular grid over the map. Cells are ordered row-major (y outer, x inner);
// centers lie strictly inside the map rectangle.
struct GridMap {
    double width_m = 0.0;
    double height_m = 0.0;
    double cell_size_m = 0.0;
    std::vector<Point> cells;

    int cols() const { return static_cast<int>(width_m / cell_size_m + 0.5); }
    int rows() const { return static_cast<int>(height_m / cell_size_m + 0.5); }
    int cell_count() const { return static_cast<int>(cells.size()); }

    // Index of the cell whose half-open extent contains p; positions on the
    // far map edge are clamped into the last row/column.
    int cell_index_at(const Point& p) const;
};

enum class DonorPattern { five_dice, vertical, pentagon, explicit_positions };

DonorPattern pattern_from_string(const std::string& s);
const char* to_string(DonorPattern p);

struct DonorLayout {
    DonorPattern pattern = DonorPattern::explicit_positions;
    std::vector<Point> positions;
};

// Donor coordinates for the named five-donor layouts.
std::vector<Point> donor_positions(DonorPattern pattern, const GridMap& map);

// The full immutable world description: geometry, candidate sites, donors and
// every configuration block. Construction is a pure function of the config.
struct Scenario {
    GridMap map;
    std::vector<Point> sites;    // candidate node sites, index 0..J-1
    std::vector<int> site_cell;  // site index -> cell index
    DonorLayout donors;
    std::vector<int> donor_cell;  // donor index -> cell index
    RateConfig rates;
    RadioConfig radio;
    RewardConfig reward;
    FilterConfig filter;
    TrainConfig training;
    std::uint64_t seed = 0;

    int site_count() const { return static_cast<int>(sites.size()); }
    int donor_count() const { return static_cast<int>(donors.positions.size()); }
    int action_count() const { return site_count() + 1; }
};

// Parses and validates a configuration document. Unknown keys anywhere in the
// document are rejected; defaults are documented in the README.
Scenario build_scenario(const nlohmann::json& config);
Scenario load_scenario_file(const std::string& path);

// The config with every default filled in; hashing this makes output
// directories a pure function of (config, seed).
nlohmann::json resolved_config(const Scenario& s);

// Replaces map/donors/training with the small preset used for quick runs:
// 500 m x 500 m map, 50 m cells, two donors, 3000 episodes.
void apply_desk_scale_preset(nlohmann::json& config);

}  // namespace iab
