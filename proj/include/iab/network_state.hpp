#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "iab/scenario.hpp"

namespace iab {

// Reference to a backhaul provider: either a donor or a deployed node.
struct ParentRef {
    enum class Kind : std::uint8_t { donor, node };
    Kind kind = Kind::donor;
    int index = -1;

    static ParentRef donor(int i) { return ParentRef{Kind::donor, i}; }
    static ParentRef node(int j) { return ParentRef{Kind::node, j}; }
    bool is_donor() const { return kind == Kind::donor; }
    bool operator==(const ParentRef&) const = default;
};

// Geometry tables precomputed once per scenario and shared (read-only) by
// every NetworkState over it: coverage bitmaps and reachability/distances.
struct ScenarioTables {
    int cell_count = 0;
    int site_count = 0;
    int donor_count = 0;
    int words = 0;  // 64-bit words per coverage bitmap

    std::vector<std::uint64_t> site_cover;        // [site * words + w]
    std::vector<std::uint64_t> donor_cover_all;   // union over donors
    std::vector<char> donor_site_reach;           // [donor * sites + site]
    std::vector<char> site_site_reach;            // [site * sites + site]
    std::vector<double> donor_site_dist;          // [donor * sites + site]
    std::vector<double> site_site_dist;           // [site * sites + site]

    static std::shared_ptr<const ScenarioTables> build(const Scenario& s);

    bool reachable(ParentRef parent, int site) const {
        return parent.is_donor() ? donor_site_reach[static_cast<std::size_t>(parent.index) * site_count + site] != 0
                                 : site_site_reach[static_cast<std::size_t>(parent.index) * site_count + site] != 0;
    }
    double dist(ParentRef parent, int site) const {
        return parent.is_donor() ? donor_site_dist[static_cast<std::size_t>(parent.index) * site_count + site]
                                 : site_site_dist[static_cast<std::size_t>(parent.index) * site_count + site];
    }
};

// Deployed topology: a forest of backhaul links rooted at donors, with
// per-node feed rates held at the minimum that satisfies every hop's demand
// (access plus children, scaled by the overhead factor at each level).
// The state must not outlive the scenario it was built from.
class NetworkState {
public:
    explicit NetworkState(const Scenario& s);
    NetworkState(const Scenario& s, std::shared_ptr<const ScenarioTables> tables);

    void reset();

    // Minimum feed a node needs from its parent given its current children.
    double required_feed(int site) const;

    // True iff the site can be attached under `parent` without breaking
    // reachability or any donor budget. Budgets are recomputed from the tree,
    // not read from caches. Throws if parent is neither a donor nor a
    // deployed node.
    bool can_attach(int site, ParentRef parent) const;

    // Deploys the site under the parent, raising every ancestor's feed to its
    // new minimum. Throws (leaving the state unchanged) if can_attach fails.
    void attach(int site, ParentRef parent);

    // Parent choice used by the environment and the greedy baseline: feasible
    // parent with the largest donor headroom after the attach; ties broken by
    // distance, then donors before nodes, then lower index.
    std::optional<ParentRef> best_parent(int site) const;

    bool deployed(int site) const { return deployed_[static_cast<std::size_t>(site)] != 0; }
    int node_count() const { return static_cast<int>(order_.size()); }
    const std::vector<int>& deployed_sites() const { return order_; }
    ParentRef parent_of(int site) const;
    double feed_rate(int site) const;
    int hop_depth(int site) const;  // 1 = directly under a donor

    // Remaining feed a donor can still distribute to new children
    // (incrementally maintained; the _recomputed form re-derives it from the
    // tree and is what feasibility checks trust).
    double donor_residual(int donor) const;
    double donor_residual_recomputed(int donor) const;
    // Distributable capacity of any provider; for a node this is the root
    // donor's residual deflated by one overhead factor per hop.
    double residual_of(ParentRef provider) const;
    int children_count(ParentRef provider) const;
    int root_donor_of(ParentRef provider) const;

    double coverage_fraction() const;
    int covered_cells() const { return covered_count_; }
    bool cell_covered(int cell) const;
    const std::vector<std::uint64_t>& covered_bitmap() const { return covered_; }

    struct Matrices {
        std::vector<double> deployment;  // 0/1 per cell, donors included
        std::vector<double> residual;    // Gbps per provider cell
        std::vector<double> children;    // served-children count per provider cell
    };
    Matrices project_matrices() const;

    // From-scratch re-derivations used for validation against the
    // incrementally maintained caches.
    double recompute_subtree_feed(int site) const;
    double recompute_donor_load(int donor) const;  // sum of direct children feeds
    int recompute_covered_cells() const;

    const Scenario& scenario() const { return *scn_; }
    const std::shared_ptr<const ScenarioTables>& tables() const { return tab_; }

private:
    double attach_cost_at_donor(ParentRef parent) const;  // donor budget consumed by a new leaf
    void bump_ancestors(int site, double delta);

    const Scenario* scn_;
    std::shared_ptr<const ScenarioTables> tab_;

    std::vector<char> deployed_;
    std::vector<int> order_;
    std::vector<ParentRef> parent_;
    std::vector<double> feed_;
    std::vector<int> depth_;
    std::vector<std::vector<int>> node_children_;
    std::vector<std::vector<int>> donor_children_;
    std::vector<double> donor_child_feed_;
    std::vector<std::uint64_t> covered_;
    int covered_count_ = 0;
};

}  // namespace iab
