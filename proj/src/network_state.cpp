#include "iab/network_state.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace iab {

namespace {

constexpr double kBudgetTol = 1e-9;

void set_bit(std::vector<std::uint64_t>& bits, std::size_t offset, int i) {
    bits[offset + static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64);
}

}  // namespace

std::shared_ptr<const ScenarioTables> ScenarioTables::build(const Scenario& s) {
    auto t = std::make_shared<ScenarioTables>();
    t->cell_count = s.map.cell_count();
    t->site_count = s.site_count();
    t->donor_count = s.donor_count();
    t->words = (t->cell_count + 63) / 64;

    const std::size_t words = static_cast<std::size_t>(t->words);
    t->site_cover.assign(static_cast<std::size_t>(t->site_count) * words, 0);
    t->donor_cover_all.assign(words, 0);

    for (int j = 0; j < t->site_count; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * words;
        for (int k = 0; k < t->cell_count; ++k) {
            if (covers(s.sites[static_cast<std::size_t>(j)], s.map.cells[static_cast<std::size_t>(k)], s.radio)) {
                set_bit(t->site_cover, off, k);
            }
        }
    }
    for (int i = 0; i < t->donor_count; ++i) {
        for (int k = 0; k < t->cell_count; ++k) {
            if (covers(s.donors.positions[static_cast<std::size_t>(i)], s.map.cells[static_cast<std::size_t>(k)],
                       s.radio)) {
                set_bit(t->donor_cover_all, 0, k);
            }
        }
    }

    t->donor_site_reach.assign(static_cast<std::size_t>(t->donor_count) * t->site_count, 0);
    t->donor_site_dist.assign(static_cast<std::size_t>(t->donor_count) * t->site_count, 0.0);
    for (int i = 0; i < t->donor_count; ++i) {
        for (int j = 0; j < t->site_count; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * t->site_count + j;
            t->donor_site_dist[idx] = distance(s.donors.positions[static_cast<std::size_t>(i)],
                                               s.sites[static_cast<std::size_t>(j)]);
            t->donor_site_reach[idx] = backhaul_reachable(s.donors.positions[static_cast<std::size_t>(i)],
                                                          s.sites[static_cast<std::size_t>(j)], s.radio)
                                           ? 1
                                           : 0;
        }
    }

    t->site_site_reach.assign(static_cast<std::size_t>(t->site_count) * t->site_count, 0);
    t->site_site_dist.assign(static_cast<std::size_t>(t->site_count) * t->site_count, 0.0);
    for (int a = 0; a < t->site_count; ++a) {
        for (int b = 0; b < t->site_count; ++b) {
            const std::size_t idx = static_cast<std::size_t>(a) * t->site_count + b;
            t->site_site_dist[idx] =
                distance(s.sites[static_cast<std::size_t>(a)], s.sites[static_cast<std::size_t>(b)]);
            t->site_site_reach[idx] = backhaul_reachable(s.sites[static_cast<std::size_t>(a)],
                                                         s.sites[static_cast<std::size_t>(b)], s.radio)
                                          ? 1
                                          : 0;
        }
    }
    return t;
}

NetworkState::NetworkState(const Scenario& s) : NetworkState(s, ScenarioTables::build(s)) {}

NetworkState::NetworkState(const Scenario& s, std::shared_ptr<const ScenarioTables> tables)
    : scn_(&s), tab_(std::move(tables)) {
    reset();
}

void NetworkState::reset() {
    const std::size_t sites = static_cast<std::size_t>(scn_->site_count());
    deployed_.assign(sites, 0);
    order_.clear();
    parent_.assign(sites, ParentRef{});
    feed_.assign(sites, 0.0);
    depth_.assign(sites, 0);
    node_children_.assign(sites, {});
    donor_children_.assign(static_cast<std::size_t>(scn_->donor_count()), {});
    donor_child_feed_.assign(static_cast<std::size_t>(scn_->donor_count()), 0.0);
    covered_ = tab_->donor_cover_all;
    covered_count_ = 0;
    for (std::uint64_t w : covered_) {
        covered_count_ += std::popcount(w);
    }
}

double NetworkState::required_feed(int site) const {
    const RateConfig& r = scn_->rates;
    double children = 0.0;
    for (int c : node_children_[static_cast<std::size_t>(site)]) {
        children += feed_[static_cast<std::size_t>(c)];
    }
    return r.overhead * (r.node_access_gbps + children);
}

double NetworkState::recompute_subtree_feed(int site) const {
    const RateConfig& r = scn_->rates;
    double children = 0.0;
    for (int c : node_children_[static_cast<std::size_t>(site)]) {
        children += recompute_subtree_feed(c);
    }
    return r.overhead * (r.node_access_gbps + children);
}

double NetworkState::recompute_donor_load(int donor) const {
    double load = 0.0;
    for (int c : donor_children_[static_cast<std::size_t>(donor)]) {
        load += recompute_subtree_feed(c);
    }
    return load;
}

int NetworkState::recompute_covered_cells() const {
    const int cells = tab_->cell_count;
    int covered = 0;
    for (int k = 0; k < cells; ++k) {
        bool hit = (tab_->donor_cover_all[static_cast<std::size_t>(k) / 64] >> (k % 64)) & 1;
        for (int j : order_) {
            if (hit) break;
            hit = (tab_->site_cover[static_cast<std::size_t>(j) * tab_->words + static_cast<std::size_t>(k) / 64] >>
                   (k % 64)) &
                  1;
        }
        covered += hit ? 1 : 0;
    }
    return covered;
}

int NetworkState::root_donor_of(ParentRef provider) const {
    while (!provider.is_donor()) {
        provider = parent_[static_cast<std::size_t>(provider.index)];
    }
    return provider.index;
}

double NetworkState::donor_residual(int donor) const {
    const RateConfig& r = scn_->rates;
    return r.donor_fixed_gbps / r.overhead - r.donor_access_gbps - donor_child_feed_[static_cast<std::size_t>(donor)];
}

double NetworkState::donor_residual_recomputed(int donor) const {
    const RateConfig& r = scn_->rates;
    return r.donor_fixed_gbps / r.overhead - r.donor_access_gbps - recompute_donor_load(donor);
}

double NetworkState::residual_of(ParentRef provider) const {
    if (provider.is_donor()) {
        return donor_residual(provider.index);
    }
    const double root = donor_residual(root_donor_of(provider));
    return root / std::pow(scn_->rates.overhead, hop_depth(provider.index));
}

int NetworkState::children_count(ParentRef provider) const {
    return provider.is_donor() ? static_cast<int>(donor_children_[static_cast<std::size_t>(provider.index)].size())
                               : static_cast<int>(node_children_[static_cast<std::size_t>(provider.index)].size());
}

double NetworkState::attach_cost_at_donor(ParentRef parent) const {
    // A new leaf demands overhead * access from its parent; the increment is
    // multiplied by the overhead factor once more at every hop toward the
    // donor. Depth 0 for a donor parent, so the cost is overhead^(depth+1) * A.
    const RateConfig& r = scn_->rates;
    const int parent_depth = parent.is_donor() ? 0 : hop_depth(parent.index);
    return r.node_access_gbps * std::pow(r.overhead, parent_depth + 1);
}

bool NetworkState::can_attach(int site, ParentRef parent) const {
    if (site < 0 || site >= scn_->site_count()) {
        throw std::invalid_argument("can_attach: site index out of range");
    }
    if (parent.is_donor()) {
        if (parent.index < 0 || parent.index >= scn_->donor_count()) {
            throw std::invalid_argument("can_attach: donor index out of range");
        }
    } else {
        if (parent.index < 0 || parent.index >= scn_->site_count()) {
            throw std::invalid_argument("can_attach: parent node index out of range");
        }
        if (!deployed(parent.index)) {
            throw std::invalid_argument("can_attach: parent node is not deployed");
        }
    }
    if (deployed(site)) {
        return false;
    }
    if (!tab_->reachable(parent, site)) {
        return false;
    }
    const int root = root_donor_of(parent);
    return donor_residual_recomputed(root) - attach_cost_at_donor(parent) >= -kBudgetTol;
}

void NetworkState::bump_ancestors(int site, double delta) {
    // `site`'s feed just grew by `delta`; propagate the increase upward,
    // scaling by the overhead factor at each hop.
    ParentRef p = parent_[static_cast<std::size_t>(site)];
    while (!p.is_donor()) {
        delta *= scn_->rates.overhead;
        feed_[static_cast<std::size_t>(p.index)] += delta;
        p = parent_[static_cast<std::size_t>(p.index)];
    }
    donor_child_feed_[static_cast<std::size_t>(p.index)] += delta;
}

void NetworkState::attach(int site, ParentRef parent) {
    if (!can_attach(site, parent)) {
        throw std::invalid_argument("attach: precondition violated");
    }
    const RateConfig& r = scn_->rates;
    const double leaf_feed = r.overhead * r.node_access_gbps;

    deployed_[static_cast<std::size_t>(site)] = 1;
    order_.push_back(site);
    parent_[static_cast<std::size_t>(site)] = parent;
    feed_[static_cast<std::size_t>(site)] = leaf_feed;
    if (parent.is_donor()) {
        depth_[static_cast<std::size_t>(site)] = 1;
        donor_children_[static_cast<std::size_t>(parent.index)].push_back(site);
        donor_child_feed_[static_cast<std::size_t>(parent.index)] += leaf_feed;
    } else {
        depth_[static_cast<std::size_t>(site)] = depth_[static_cast<std::size_t>(parent.index)] + 1;
        node_children_[static_cast<std::size_t>(parent.index)].push_back(site);
        feed_[static_cast<std::size_t>(parent.index)] += r.overhead * leaf_feed;
        bump_ancestors(parent.index, r.overhead * leaf_feed);
    }

    const std::size_t off = static_cast<std::size_t>(site) * tab_->words;
    for (int w = 0; w < tab_->words; ++w) {
        const std::uint64_t fresh = tab_->site_cover[off + static_cast<std::size_t>(w)] &
                                    ~covered_[static_cast<std::size_t>(w)];
        covered_count_ += std::popcount(fresh);
        covered_[static_cast<std::size_t>(w)] |= fresh;
    }
}

std::optional<ParentRef> NetworkState::best_parent(int site) const {
    std::optional<ParentRef> best;
    double best_headroom = 0.0;
    double best_dist = 0.0;

    auto consider = [&](ParentRef p) {
        if (!can_attach(site, p)) {
            return;
        }
        const double headroom = donor_residual(root_donor_of(p)) - attach_cost_at_donor(p);
        const double d = tab_->dist(p, site);
        if (!best) {
            best = p;
            best_headroom = headroom;
            best_dist = d;
            return;
        }
        if (headroom > best_headroom + kBudgetTol) {
            best = p;
            best_headroom = headroom;
            best_dist = d;
        } else if (headroom >= best_headroom - kBudgetTol && d < best_dist - 1e-12) {
            best = p;
            best_headroom = headroom;
            best_dist = d;
        }
        // Equal headroom and distance: donors sort before nodes and lower
        // indices first, which is the iteration order below.
    };

    // Iteration order realizes the final tie-break: donors before nodes,
    // lower index first.
    for (int i = 0; i < scn_->donor_count(); ++i) {
        consider(ParentRef::donor(i));
    }
    for (int j = 0; j < scn_->site_count(); ++j) {
        if (deployed(j)) {
            consider(ParentRef::node(j));
        }
    }
    return best;
}

ParentRef NetworkState::parent_of(int site) const {
    if (!deployed(site)) {
        throw std::invalid_argument("parent_of: site not deployed");
    }
    return parent_[static_cast<std::size_t>(site)];
}

double NetworkState::feed_rate(int site) const {
    if (!deployed(site)) {
        throw std::invalid_argument("feed_rate: site not deployed");
    }
    return feed_[static_cast<std::size_t>(site)];
}

int NetworkState::hop_depth(int site) const {
    if (!deployed(site)) {
        throw std::invalid_argument("hop_depth: site not deployed");
    }
    return depth_[static_cast<std::size_t>(site)];
}

double NetworkState::coverage_fraction() const {
    return tab_->cell_count == 0 ? 0.0 : static_cast<double>(covered_count_) / tab_->cell_count;
}

bool NetworkState::cell_covered(int cell) const {
    return (covered_[static_cast<std::size_t>(cell) / 64] >> (cell % 64)) & 1;
}

NetworkState::Matrices NetworkState::project_matrices() const {
    const std::size_t cells = static_cast<std::size_t>(tab_->cell_count);
    Matrices m;
    m.deployment.assign(cells, 0.0);
    m.residual.assign(cells, 0.0);
    m.children.assign(cells, 0.0);

    for (int i = 0; i < scn_->donor_count(); ++i) {
        const std::size_t cell = static_cast<std::size_t>(scn_->donor_cell[static_cast<std::size_t>(i)]);
        m.deployment[cell] = 1.0;
        m.residual[cell] = donor_residual(i);
        m.children[cell] = static_cast<double>(donor_children_[static_cast<std::size_t>(i)].size());
    }
    for (int j : order_) {
        const std::size_t cell = static_cast<std::size_t>(scn_->site_cell[static_cast<std::size_t>(j)]);
        m.deployment[cell] = 1.0;
        m.residual[cell] = residual_of(ParentRef::node(j));
        m.children[cell] = static_cast<double>(node_children_[static_cast<std::size_t>(j)].size());
    }
    return m;
}

}  // namespace iab
