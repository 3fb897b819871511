#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "iab/network_state.hpp"
#include "test_util.hpp"

using namespace iab;
using iab::test::default_config;
using iab::test::small_config;

namespace {

// Long thin map with one donor in the first cell; cells run along y.
Scenario chain_scenario(double length_m, double coverage_r = 60.0, double backhaul_r = 300.0) {
    return build_scenario(iab::test::small_config(50, length_m, 50, {{25, 25}}, coverage_r, backhaul_r));
}

int site_at(const Scenario& s, double x, double y) {
    for (int j = 0; j < s.site_count(); ++j) {
        if (same_point(s.sites[static_cast<std::size_t>(j)], Point{x, y})) {
            return j;
        }
    }
    REQUIRE(false);
    return -1;
}

}  // namespace

TEST_CASE("required_feed at the equality case") {
    const Scenario s = chain_scenario(3000);
    NetworkState state(s);

    const int first = site_at(s, 25, 275);  // 250 m from the donor
    REQUIRE(state.can_attach(first, ParentRef::donor(0)));
    state.attach(first, ParentRef::donor(0));
    CHECK(state.feed_rate(first) == doctest::Approx(2.4).epsilon(1e-12));  // 1.2 * 2
    CHECK(state.required_feed(first) == doctest::Approx(2.4).epsilon(1e-12));

    const int second = site_at(s, 25, 525);
    state.attach(second, ParentRef::node(first));
    // Parent now carries its own access plus the child's feed.
    CHECK(state.required_feed(first) == doctest::Approx(1.2 * (2.0 + 2.4)).epsilon(1e-12));
    CHECK(state.feed_rate(first) == doctest::Approx(5.28).epsilon(1e-12));
}

TEST_CASE("overhead-free rates: required feed equals the access rate") {
    auto config = iab::test::small_config(50, 3000, 50, {{25, 25}}, 60, 300);
    config["rates"] = {{"overhead", 1.0}};
    const Scenario s = build_scenario(config);
    NetworkState state(s);
    const int first = site_at(s, 25, 275);
    state.attach(first, ParentRef::donor(0));
    CHECK(state.required_feed(first) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("can_attach: range and budget") {
    const Scenario s = chain_scenario(3000);
    NetworkState state(s);

    // Donor residual with default rates: 30/1.2 - 2 = 23.
    CHECK(state.donor_residual(0) == doctest::Approx(23.0).epsilon(1e-12));

    const int near = site_at(s, 25, 275);  // 250 m away
    CHECK(state.can_attach(near, ParentRef::donor(0)));

    const int far = site_at(s, 25, 375);  // 350 m away, backhaul radius is 300
    CHECK_FALSE(state.can_attach(far, ParentRef::donor(0)));

    CHECK_THROWS_AS(state.can_attach(near, ParentRef::node(far)), std::invalid_argument);
    CHECK_THROWS_AS(state.can_attach(-1, ParentRef::donor(0)), std::invalid_argument);
    CHECK_THROWS_AS(state.can_attach(near, ParentRef::donor(7)), std::invalid_argument);
}

TEST_CASE("chain depth is bounded by the donor budget") {
    const Scenario s = chain_scenario(5000);
    NetworkState state(s);

    // Attaching the h-th hop costs access * overhead^h of donor budget; the
    // maximal depth follows from the running sum against 30/1.2 - 2.
    const double budget = 30.0 / 1.2 - 2.0;
    int expected_depth = 0;
    double spent = 0.0;
    while (true) {
        const double cost = 2.0 * std::pow(1.2, expected_depth + 1);
        if (spent + cost > budget + 1e-9) break;
        spent += cost;
        ++expected_depth;
    }
    CHECK(expected_depth == 5);

    ParentRef parent = ParentRef::donor(0);
    int depth = 0;
    double y = 25.0;
    while (true) {
        y += 250.0;
        const int site = site_at(s, 25, y);
        if (!state.can_attach(site, parent)) {
            break;
        }
        state.attach(site, parent);
        parent = ParentRef::node(site);
        ++depth;
    }
    CHECK(depth == expected_depth);
    CHECK(state.node_count() == depth);
    CHECK(state.hop_depth(state.deployed_sites().back()) == depth);
}

TEST_CASE("attach consumes exactly the leaf feed from the donor") {
    const Scenario s = chain_scenario(3000);
    NetworkState state(s);
    const double before = state.donor_residual(0);
    state.attach(site_at(s, 25, 275), ParentRef::donor(0));
    CHECK(before - state.donor_residual(0) == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("reset round-trips to the donors-only state") {
    const Scenario s = chain_scenario(3000);
    NetworkState fresh(s);
    NetworkState state = fresh;
    state.attach(site_at(s, 25, 275), ParentRef::donor(0));
    state.reset();
    CHECK(state.node_count() == 0);
    CHECK(state.coverage_fraction() == doctest::Approx(fresh.coverage_fraction()));
    CHECK(state.donor_residual(0) == doctest::Approx(fresh.donor_residual(0)));
    CHECK(state.covered_bitmap() == fresh.covered_bitmap());
}

TEST_CASE("attach rejects a violated precondition and leaves the state unchanged") {
    const Scenario s = chain_scenario(3000);
    NetworkState state(s);
    const int far = site_at(s, 25, 375);
    CHECK_THROWS_AS(state.attach(far, ParentRef::donor(0)), std::invalid_argument);
    CHECK(state.node_count() == 0);
    CHECK(state.donor_residual(0) == doctest::Approx(23.0));
}

TEST_CASE("coverage fraction") {
    SUBCASE("no donors, no nodes") {
        const Scenario s = build_scenario(iab::test::small_config(200, 200, 50, {}, 60, 80));
        NetworkState state(s);
        CHECK(state.coverage_fraction() == doctest::Approx(0.0));
    }

    SUBCASE("single central donor, geometric recount") {
        const Scenario s = build_scenario(iab::test::small_config(400, 400, 50, {{200, 200}}, 200, 300));
        NetworkState state(s);
        int expect = 0;
        for (const Point& cell : s.map.cells) {
            if (distance(cell, Point{200, 200}) <= 200.0) {
                ++expect;
            }
        }
        CHECK(expect > 0);
        CHECK(state.covered_cells() == expect);
        CHECK(state.coverage_fraction() == doctest::Approx(static_cast<double>(expect) / 64.0));
    }

    SUBCASE("deploying every candidate site saturates the default map") {
        auto config = default_config();
        config["rates"] = {{"donor_fixed", 1e9}};
        const Scenario s = build_scenario(config);
        NetworkState state(s);
        // Sweep until every site is deployed; the huge donor budget leaves
        // reachability as the only constraint.
        bool progress = true;
        while (progress) {
            progress = false;
            for (int j = 0; j < s.site_count(); ++j) {
                if (state.deployed(j)) continue;
                if (const auto parent = state.best_parent(j)) {
                    state.attach(j, *parent);
                    progress = true;
                }
            }
        }
        REQUIRE(state.node_count() == s.site_count());
        CHECK(state.coverage_fraction() == doctest::Approx(1.0));
    }
}

TEST_CASE("projected matrices") {
    const Scenario s = build_scenario(default_config());
    NetworkState state(s);

    SUBCASE("empty network") {
        const auto m = state.project_matrices();
        std::set<int> donor_cells(s.donor_cell.begin(), s.donor_cell.end());
        for (int k = 0; k < s.map.cell_count(); ++k) {
            const bool is_donor = donor_cells.count(k) > 0;
            CHECK(m.deployment[static_cast<std::size_t>(k)] == (is_donor ? 1.0 : 0.0));
            if (is_donor) {
                CHECK(m.residual[static_cast<std::size_t>(k)] == doctest::Approx(23.0));
            } else {
                CHECK(m.residual[static_cast<std::size_t>(k)] == 0.0);
            }
            CHECK(m.children[static_cast<std::size_t>(k)] == 0.0);
        }
    }

    SUBCASE("one attach adds exactly one deployment bit and one child") {
        const auto before = state.project_matrices();
        int site = -1;
        std::optional<ParentRef> parent;
        for (int j = 0; j < s.site_count() && !parent; ++j) {
            parent = state.best_parent(j);
            site = j;
        }
        REQUIRE(parent);
        state.attach(site, *parent);
        const auto after = state.project_matrices();
        int new_ones = 0;
        for (std::size_t k = 0; k < before.deployment.size(); ++k) {
            if (after.deployment[k] != before.deployment[k]) {
                ++new_ones;
                CHECK(after.deployment[k] == 1.0);
            }
        }
        CHECK(new_ones == 1);
        double child_sum = 0.0;
        for (double c : after.children) child_sum += c;
        CHECK(child_sum == doctest::Approx(1.0));
    }

    SUBCASE("children matrix sums to the node count") {
        Rng rng(5);
        for (int step = 0; step < 12; ++step) {
            const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(s.site_count())));
            if (state.deployed(j)) continue;
            if (const auto parent = state.best_parent(j)) {
                state.attach(j, *parent);
            }
        }
        REQUIRE(state.node_count() > 0);
        const auto m = state.project_matrices();
        double child_sum = 0.0;
        for (double c : m.children) child_sum += c;
        CHECK(child_sum == doctest::Approx(static_cast<double>(state.node_count())));
    }
}

TEST_CASE("a coverage-neutral attach still updates the matrices") {
    // Donor covers the whole map; any node adds nothing to coverage.
    const Scenario s = build_scenario(iab::test::small_config(200, 200, 50, {{100, 100}}, 400, 400));
    NetworkState state(s);
    REQUIRE(state.coverage_fraction() == doctest::Approx(1.0));
    const auto before = state.project_matrices();
    state.attach(0, ParentRef::donor(0));
    const auto after = state.project_matrices();
    CHECK(state.coverage_fraction() == doctest::Approx(1.0));
    CHECK(before.deployment != after.deployment);
    CHECK(before.residual != after.residual);
}

TEST_CASE("parent policy prefers headroom, then distance, then donor index") {
    SUBCASE("equal headroom goes to the closer provider") {
        const Scenario s = build_scenario(iab::test::small_config(400, 50, 50, {{25, 25}, {325, 25}}, 60, 400));
        NetworkState state(s);
        const int site = site_at(s, 125, 25);  // 100 m from donor 0, 200 m from donor 1
        const auto parent = state.best_parent(site);
        REQUIRE(parent);
        CHECK(*parent == ParentRef::donor(0));
    }

    SUBCASE("equal headroom and distance goes to the lower donor index") {
        const Scenario s = build_scenario(iab::test::small_config(300, 50, 50, {{25, 25}, {225, 25}}, 60, 400));
        NetworkState state(s);
        const int site = site_at(s, 125, 25);  // 100 m from both donors
        const auto parent = state.best_parent(site);
        REQUIRE(parent);
        CHECK(*parent == ParentRef::donor(0));
    }

    SUBCASE("larger headroom wins over smaller distance") {
        const Scenario s = build_scenario(iab::test::small_config(400, 50, 50, {{25, 25}, {375, 25}}, 60, 150));
        NetworkState state(s);
        const int n1 = site_at(s, 125, 25);
        state.attach(n1, ParentRef::donor(0));
        // From the mid site both n1 (150 m) and donor 1 (100 m) are in reach;
        // donor 1 offers the larger post-attach headroom and must win.
        const int mid = site_at(s, 275, 25);
        const auto parent = state.best_parent(mid);
        REQUIRE(parent);
        CHECK(*parent == ParentRef::donor(1));
    }
}

TEST_CASE("random attach sequences keep every invariant") {
    Rng rng(2024);
    for (int instance = 0; instance < 40; ++instance) {
        const Scenario s = build_scenario(iab::test::random_tiny_config(rng));
        NetworkState state(s);
        double last_coverage = state.coverage_fraction();

        for (int step = 0; step < 24; ++step) {
            // Pick any feasible (site, parent) uniformly-ish.
            std::vector<std::pair<int, ParentRef>> options;
            for (int j = 0; j < s.site_count(); ++j) {
                if (state.deployed(j)) continue;
                for (int i = 0; i < s.donor_count(); ++i) {
                    if (state.can_attach(j, ParentRef::donor(i))) {
                        options.emplace_back(j, ParentRef::donor(i));
                    }
                }
                for (int d : state.deployed_sites()) {
                    if (state.can_attach(j, ParentRef::node(d))) {
                        options.emplace_back(j, ParentRef::node(d));
                    }
                }
            }
            if (options.empty()) break;
            const auto& [site, parent] = options[rng.uniform_below(options.size())];
            state.attach(site, parent);

            // Donor budgets from scratch.
            for (int i = 0; i < s.donor_count(); ++i) {
                const double load = state.recompute_donor_load(i);
                CHECK(s.rates.donor_fixed_gbps - s.rates.overhead * (s.rates.donor_access_gbps + load) >= -1e-9);
                CHECK(state.donor_residual(i) == doctest::Approx(state.donor_residual_recomputed(i)).epsilon(1e-9));
            }
            // Node budgets: assigned feed covers access plus children.
            for (int j : state.deployed_sites()) {
                CHECK(state.feed_rate(j) >= state.required_feed(j) - 1e-9);
                CHECK(state.feed_rate(j) == doctest::Approx(state.recompute_subtree_feed(j)).epsilon(1e-9));
            }
            // Forest shape: one parent each, rooted at a donor, acyclic.
            for (int j : state.deployed_sites()) {
                ParentRef p = state.parent_of(j);
                int hops = 1;
                while (!p.is_donor()) {
                    CHECK(state.deployed(p.index));
                    p = state.parent_of(p.index);
                    ++hops;
                    REQUIRE(hops <= state.node_count() + 1);
                }
                CHECK(state.hop_depth(j) == hops);
            }
            // Reachability of every parent link.
            for (int j : state.deployed_sites()) {
                const ParentRef p = state.parent_of(j);
                const Point from = p.is_donor() ? s.donors.positions[static_cast<std::size_t>(p.index)]
                                                : s.sites[static_cast<std::size_t>(p.index)];
                CHECK(backhaul_reachable(from, s.sites[static_cast<std::size_t>(j)], s.radio));
            }
            // Coverage is monotone and matches a recount.
            CHECK(state.coverage_fraction() >= last_coverage);
            last_coverage = state.coverage_fraction();
            CHECK(state.covered_cells() == state.recompute_covered_cells());
        }
    }
}
