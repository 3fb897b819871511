#include "iab/plan_io.hpp"

#include <cmath>
#include <map>
#include <set>

namespace iab {

namespace {

constexpr double kTol = 1e-9;

std::string parent_string(ParentRef p) {
    return (p.is_donor() ? "donor:" : "node:") + std::to_string(p.index);
}

ParentRef parse_parent(const std::string& text) {
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const int index = std::stoi(text.substr(colon + 1));
        if (kind == "donor") return ParentRef::donor(index);
        if (kind == "node") return ParentRef::node(index);
    }
    throw std::invalid_argument("plan: bad parent reference '" + text + "'");
}

struct PlanNode {
    int site = -1;
    Point pos;
    ParentRef parent;
    double feed = 0.0;
    int depth = 0;
};

std::vector<PlanNode> parse_nodes(const nlohmann::json& plan) {
    if (!plan.is_object() || !plan.contains("nodes") || !plan.at("nodes").is_array()) {
        throw std::invalid_argument("plan: expected an object with a 'nodes' array");
    }
    std::vector<PlanNode> nodes;
    for (const auto& entry : plan.at("nodes")) {
        PlanNode n;
        n.site = entry.at("site_index").get<int>();
        n.pos = Point{entry.at("x").get<double>(), entry.at("y").get<double>()};
        n.parent = parse_parent(entry.at("parent").get<std::string>());
        n.feed = entry.at("feed_rate_gbps").get<double>();
        n.depth = entry.at("hop_depth").get<int>();
        nodes.push_back(n);
    }
    return nodes;
}

}  // namespace

nlohmann::json plan_to_json(const NetworkState& state) {
    const Scenario& s = state.scenario();
    nlohmann::json nodes = nlohmann::json::array();
    for (int j : state.deployed_sites()) {
        nodes.push_back({{"site_index", j},
                         {"x", s.sites[static_cast<std::size_t>(j)].x},
                         {"y", s.sites[static_cast<std::size_t>(j)].y},
                         {"parent", parent_string(state.parent_of(j))},
                         {"feed_rate_gbps", state.feed_rate(j)},
                         {"hop_depth", state.hop_depth(j)}});
    }
    nlohmann::json donors = nlohmann::json::array();
    for (int i = 0; i < s.donor_count(); ++i) {
        donors.push_back({{"donor_index", i},
                          {"x", s.donors.positions[static_cast<std::size_t>(i)].x},
                          {"y", s.donors.positions[static_cast<std::size_t>(i)].y},
                          {"residual_gbps", state.donor_residual(i)}});
    }
    return nlohmann::json{{"nodes", nodes},
                          {"donors", donors},
                          {"coverage", {{"fraction", state.coverage_fraction()},
                                        {"covered_cells", state.covered_cells()},
                                        {"total_cells", s.map.cell_count()}}}};
}

PlanCheckResult check_plan(const Scenario& s, const nlohmann::json& plan) {
    PlanCheckResult result;
    auto fail = [&](const std::string& msg) {
        result.ok = false;
        result.violations.push_back(msg);
    };

    std::vector<PlanNode> nodes;
    try {
        nodes = parse_nodes(plan);
    } catch (const std::exception& e) {
        fail(e.what());
        return result;
    }

    std::map<int, const PlanNode*> by_site;
    for (const PlanNode& n : nodes) {
        if (n.site < 0 || n.site >= s.site_count()) {
            fail("node references unknown site " + std::to_string(n.site));
            return result;
        }
        const Point expect = s.sites[static_cast<std::size_t>(n.site)];
        if (!same_point(expect, n.pos, 1e-6)) {
            fail("node at site " + std::to_string(n.site) + " has mismatched coordinates");
        }
        if (!by_site.emplace(n.site, &n).second) {
            fail("site " + std::to_string(n.site) + " deployed twice");
            return result;
        }
    }

    // Forest shape: every parent exists, depths are consistent, and walking
    // up reaches a donor within |nodes| steps.
    for (const PlanNode& n : nodes) {
        if (n.parent.is_donor()) {
            if (n.parent.index < 0 || n.parent.index >= s.donor_count()) {
                fail("node " + std::to_string(n.site) + " attached to unknown donor");
                return result;
            }
            if (n.depth != 1) {
                fail("node " + std::to_string(n.site) + " under a donor must have hop_depth 1");
            }
        } else {
            auto it = by_site.find(n.parent.index);
            if (it == by_site.end()) {
                fail("node " + std::to_string(n.site) + " attached to undeployed site " +
                     std::to_string(n.parent.index));
                return result;
            }
            if (n.depth != it->second->depth + 1) {
                fail("node " + std::to_string(n.site) + " has inconsistent hop_depth");
            }
        }
    }
    for (const PlanNode& n : nodes) {
        int hops = 0;
        const PlanNode* cur = &n;
        while (!cur->parent.is_donor()) {
            cur = by_site.at(cur->parent.index);
            if (++hops > static_cast<int>(nodes.size())) {
                fail("cycle detected through site " + std::to_string(n.site));
                return result;
            }
        }
    }

    // Backhaul reachability over every parent link.
    for (const PlanNode& n : nodes) {
        const Point from = n.parent.is_donor() ? s.donors.positions[static_cast<std::size_t>(n.parent.index)]
                                               : s.sites[static_cast<std::size_t>(n.parent.index)];
        if (!backhaul_reachable(from, s.sites[static_cast<std::size_t>(n.site)], s.radio)) {
            fail("link to site " + std::to_string(n.site) + " exceeds backhaul reach");
        }
    }

    // Rate budgets with the plan's stated feeds.
    const RateConfig& r = s.rates;
    std::map<int, double> donor_children_feed;
    std::map<int, double> node_children_feed;
    for (const PlanNode& n : nodes) {
        if (n.parent.is_donor()) {
            donor_children_feed[n.parent.index] += n.feed;
        } else {
            node_children_feed[n.parent.index] += n.feed;
        }
    }
    for (const auto& [donor, feed] : donor_children_feed) {
        if (r.donor_fixed_gbps - r.overhead * (r.donor_access_gbps + feed) < -kTol) {
            fail("donor " + std::to_string(donor) + " budget exceeded");
        }
    }
    for (const PlanNode& n : nodes) {
        const double children = node_children_feed.count(n.site) ? node_children_feed[n.site] : 0.0;
        if (n.feed - r.overhead * (r.node_access_gbps + children) < -kTol) {
            fail("node " + std::to_string(n.site) + " feed below its demand");
        }
    }

    // Coverage recount from raw geometry.
    if (plan.contains("coverage")) {
        int covered = 0;
        for (int k = 0; k < s.map.cell_count(); ++k) {
            const Point cell = s.map.cells[static_cast<std::size_t>(k)];
            bool hit = false;
            for (int i = 0; i < s.donor_count() && !hit; ++i) {
                hit = covers(s.donors.positions[static_cast<std::size_t>(i)], cell, s.radio);
            }
            for (const PlanNode& n : nodes) {
                if (hit) break;
                hit = covers(s.sites[static_cast<std::size_t>(n.site)], cell, s.radio);
            }
            covered += hit ? 1 : 0;
        }
        const auto& summary = plan.at("coverage");
        if (summary.at("covered_cells").get<int>() != covered) {
            fail("coverage summary does not match a recount");
        }
    }
    return result;
}

NetworkState plan_from_json(const Scenario& s, const nlohmann::json& plan) {
    std::vector<PlanNode> nodes = parse_nodes(plan);
    NetworkState state(s);

    // Attach in hop-depth order so parents exist before their children.
    std::stable_sort(nodes.begin(), nodes.end(), [](const PlanNode& a, const PlanNode& b) { return a.depth < b.depth; });
    for (const PlanNode& n : nodes) {
        state.attach(n.site, n.parent);
    }
    return state;
}

}  // namespace iab
