#include "iab/greedy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace iab {

namespace {

int new_cells_if_deployed(const NetworkState& state, int site) {
    const ScenarioTables& t = *state.tables();
    const auto& covered = state.covered_bitmap();
    int fresh = 0;
    const std::size_t off = static_cast<std::size_t>(site) * t.words;
    for (int w = 0; w < t.words; ++w) {
        fresh += std::popcount(t.site_cover[off + static_cast<std::size_t>(w)] & ~covered[static_cast<std::size_t>(w)]);
    }
    return fresh;
}

}  // namespace

GreedyResult greedy_plan(const Scenario& s) {
    GreedyResult result{NetworkState(s), false};
    NetworkState& state = result.state;
    const double threshold = s.reward.coverage_threshold;

    while (state.coverage_fraction() < threshold) {
        const ActionMask mask = filter_actions(state, s.filter);
        int best_site = -1;
        int best_gain = 0;
        int best_depth = 0;
        ParentRef best_parent{};

        for (int j = 0; j < s.site_count(); ++j) {
            if (!mask.is_valid(j + 1)) continue;
            const int gain = new_cells_if_deployed(state, j);
            if (gain <= 0) continue;
            const auto parent = state.best_parent(j);
            if (!parent) continue;
            const int depth = parent->is_donor() ? 1 : state.hop_depth(parent->index) + 1;
            // Ascending site order makes "lower index" the implicit last tie-break.
            if (gain > best_gain || (gain == best_gain && depth < best_depth)) {
                best_site = j;
                best_gain = gain;
                best_depth = depth;
                best_parent = *parent;
            }
        }
        if (best_site < 0) {
            break;  // nothing valid adds coverage
        }
        state.attach(best_site, best_parent);
    }
    result.reached_threshold = state.coverage_fraction() >= threshold;
    return result;
}

int resolve_n_ref(const Scenario& s) {
    return greedy_plan(s).state.node_count();
}

namespace {

// Attempts to attach every subset member in the given order, each under the
// policy-selected parent. Returns the resulting state when all succeed.
std::optional<NetworkState> try_order(const Scenario& s, const std::shared_ptr<const ScenarioTables>& tables,
                                      const std::vector<int>& order) {
    NetworkState state(s, tables);
    for (int site : order) {
        const auto parent = state.best_parent(site);
        if (!parent) {
            return std::nullopt;
        }
        state.attach(site, *parent);
    }
    return state;
}

std::optional<NetworkState> build_forest(const Scenario& s, const std::shared_ptr<const ScenarioTables>& tables,
                                         std::vector<int> members) {
    if (members.empty()) {
        return NetworkState(s, tables);
    }
    const ScenarioTables& t = *tables;

    // First try: nearest-to-connected order.
    std::vector<int> order;
    {
        std::vector<int> left = members;
        std::vector<int> connected;  // attached members
        while (!left.empty()) {
            double best_d = 0.0;
            std::size_t best_i = 0;
            bool found = false;
            for (std::size_t i = 0; i < left.size(); ++i) {
                double d = std::numeric_limits<double>::infinity();
                for (int donor = 0; donor < s.donor_count(); ++donor) {
                    d = std::min(d, t.donor_site_dist[static_cast<std::size_t>(donor) * t.site_count + left[i]]);
                }
                for (int c : connected) {
                    d = std::min(d, t.site_site_dist[static_cast<std::size_t>(c) * t.site_count + left[i]]);
                }
                if (!found || d < best_d) {
                    best_d = d;
                    best_i = i;
                    found = true;
                }
            }
            order.push_back(left[best_i]);
            connected.push_back(left[best_i]);
            left.erase(left.begin() + static_cast<std::ptrdiff_t>(best_i));
        }
    }
    if (auto state = try_order(s, tables, order)) {
        return state;
    }

    // Fallback: lexicographic permutations, bounded.
    constexpr long kMaxOrders = 40320;  // 8!
    std::sort(members.begin(), members.end());
    long tried = 0;
    do {
        if (auto state = try_order(s, tables, members)) {
            return state;
        }
    } while (++tried < kMaxOrders && std::next_permutation(members.begin(), members.end()));
    return std::nullopt;
}

}  // namespace

std::optional<NetworkState> brute_force_optimum(const Scenario& s, int max_sites) {
    const int n = s.site_count();
    if (n > max_sites) {
        throw std::invalid_argument("brute_force_optimum: too many candidate sites");
    }
    const auto tables = ScenarioTables::build(s);
    const ScenarioTables& t = *tables;
    const double threshold = s.reward.coverage_threshold;
    const int need = static_cast<int>(std::ceil(threshold * t.cell_count - 1e-9));

    for (int size = 0; size <= n; ++size) {
        // Enumerate subsets of the given size in lexicographic order.
        std::vector<int> pick(static_cast<std::size_t>(size));
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            // Coverage of donors plus the subset.
            int covered = 0;
            for (int w = 0; w < t.words; ++w) {
                std::uint64_t bits = t.donor_cover_all[static_cast<std::size_t>(w)];
                for (int j : pick) {
                    bits |= t.site_cover[static_cast<std::size_t>(j) * t.words + static_cast<std::size_t>(w)];
                }
                covered += std::popcount(bits);
            }
            if (covered >= need) {
                if (auto state = build_forest(s, tables, pick)) {
                    return state;
                }
            }
            // Advance the combination.
            int i = size - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) {
                --i;
            }
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < size; ++k) {
                pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
            }
        }
    }
    return std::nullopt;
}

}  // namespace iab
