#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iab/link_model.hpp"
#include "iab/rng.hpp"
#include "iab/scenario.hpp"
#include "test_util.hpp"

using namespace iab;

namespace {

// Straight-line re-evaluation of the budget equations, kept independent of
// the implementation under test.
double snr_oracle(double d_m, const RadioConfig& r) {
    const double d_km = d_m / 1000.0;
    const double fspl = 20.0 * std::log10(d_km) + 20.0 * std::log10(r.frequency_ghz) + 92.45;
    const double loss = fspl + r.atmospheric_atten_db_per_km * d_km + r.rain_atten_db_per_km * d_km;
    const double noise = -174.0 + 10.0 * std::log10(r.bandwidth_hz);
    return r.tx_power_dbm + r.tx_gain_db + r.rx_gain_db - loss - noise;
}

}  // namespace

TEST_CASE("thermal noise floor") {
    CHECK(thermal_noise_dbm(1.0) == doctest::Approx(-174.0));
    CHECK(thermal_noise_dbm(1e9) == doctest::Approx(-84.0));
    CHECK(thermal_noise_dbm(1e8) == doctest::Approx(-94.0));
    CHECK_THROWS_AS(thermal_noise_dbm(0.0), std::invalid_argument);
    CHECK_THROWS_AS(thermal_noise_dbm(-5.0), std::invalid_argument);
}

TEST_CASE("thermal noise scales by exactly 10 dB per decade") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const double w = rng.uniform(1.0, 1e10);
        CHECK(thermal_noise_dbm(10.0 * w) == doctest::Approx(thermal_noise_dbm(w) + 10.0).epsilon(1e-12));
    }
}

TEST_CASE("link budget arithmetic matches the direct formula") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        RadioConfig r;
        r.tx_power_dbm = rng.uniform(10.0, 40.0);
        r.tx_gain_db = rng.uniform(0.0, 25.0);
        r.rx_gain_db = rng.uniform(0.0, 25.0);
        r.bandwidth_hz = rng.uniform(1e6, 2e9);
        r.frequency_ghz = rng.uniform(20.0, 80.0);
        r.atmospheric_atten_db_per_km = rng.uniform(0.0, 20.0);
        r.rain_atten_db_per_km = rng.uniform(0.0, 10.0);
        const double d = rng.uniform(1.0, 2000.0);
        CHECK(link_snr_db(d, r) == doctest::Approx(snr_oracle(d, r)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(link_snr_db(0.0, RadioConfig{}), std::invalid_argument);
}

TEST_CASE("worked example: budget terms that sum to 24 dB") {
    // Gains 10+10, power 30, 1 GHz bandwidth puts the noise at -84 dBm; the
    // distance is solved so that free-space loss alone is 110 dB.
    RadioConfig r;
    r.atmospheric_atten_db_per_km = 0.0;
    const double d_km = std::pow(10.0, (110.0 - 92.45 - 20.0 * std::log10(r.frequency_ghz)) / 20.0);
    CHECK(link_snr_db(d_km * 1000.0, r) == doctest::Approx(30.0 + 20.0 - 110.0 + 84.0).epsilon(1e-9));
}

TEST_CASE("doubling distance costs 20log10(2) of free-space loss plus linear attenuation") {
    RadioConfig r;  // 15 dB/km atmospheric
    const double d = 100.0;
    const double drop = link_snr_db(d, r) - link_snr_db(2.0 * d, r);
    CHECK(drop == doctest::Approx(20.0 * std::log10(2.0) + 15.0 * (d / 1000.0)).epsilon(1e-12));
}

TEST_CASE("default thresholds are calibrated to the 200 m / 300 m radii") {
    const RadioConfig r;
    CHECK(link_snr_db(200.0, r) >= r.snr_threshold_db);
    CHECK(link_snr_db(201.0, r) < r.snr_threshold_db);
    CHECK(link_snr_db(300.0, r) >= r.backhaul_snr_threshold_db);
    CHECK(link_snr_db(301.0, r) < r.backhaul_snr_threshold_db);
}

TEST_CASE("shannon rate") {
    CHECK(shannon_rate_gbps(0.0, 1e9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(shannon_rate_gbps(-800.0, 1e9) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(shannon_rate_gbps(10.0, 1e9) == doctest::Approx(std::log2(11.0)).epsilon(1e-12));
    CHECK_THROWS_AS(shannon_rate_gbps(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("coverage predicate in radius mode") {
    const RadioConfig r;  // 200 m coverage, 300 m backhaul
    const Point a{0.0, 0.0};
    CHECK(covers(a, Point{150.0, 0.0}, r));
    CHECK(covers(a, Point{200.0, 0.0}, r));
    CHECK_FALSE(covers(a, Point{250.0, 0.0}, r));
    CHECK(backhaul_reachable(a, Point{300.0, 0.0}, r));
    CHECK_FALSE(backhaul_reachable(a, Point{301.0, 0.0}, r));
}

TEST_CASE("self-coverage at zero distance in both modes") {
    RadioConfig r;
    const Point a{10.0, 20.0};
    CHECK(covers(a, a, r));
    CHECK(backhaul_reachable(a, a, r));
    r.coverage_mode = CoverageMode::snr;
    CHECK(covers(a, a, r));
    CHECK(backhaul_reachable(a, a, r));
}

TEST_CASE("coverage implies backhaul reachability under the default radii") {
    RadioConfig radius_mode;
    RadioConfig snr_mode;
    snr_mode.coverage_mode = CoverageMode::snr;
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const Point a{rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0)};
        const Point b{rng.uniform(0.0, 1000.0), rng.uniform(0.0, 1000.0)};
        if (covers(a, b, radius_mode)) {
            CHECK(backhaul_reachable(a, b, radius_mode));
        }
        if (covers(a, b, snr_mode)) {
            CHECK(backhaul_reachable(a, b, snr_mode));
        }
    }
}

TEST_CASE("snr is strictly decreasing in distance") {
    const RadioConfig r;
    double prev = link_snr_db(1.0, r);
    for (double d = 11.0; d < 2000.0; d += 10.0) {
        const double cur = link_snr_db(d, r);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("radius and snr modes agree on all grid-cell-center pairs") {
    const Scenario s = build_scenario(iab::test::default_config());
    RadioConfig radius_mode = s.radio;
    RadioConfig snr_mode = s.radio;
    snr_mode.coverage_mode = CoverageMode::snr;

    for (std::size_t a = 0; a < s.map.cells.size(); ++a) {
        for (std::size_t b = a; b < s.map.cells.size(); ++b) {
            const Point& pa = s.map.cells[a];
            const Point& pb = s.map.cells[b];
            REQUIRE(covers(pa, pb, radius_mode) == covers(pa, pb, snr_mode));
            REQUIRE(backhaul_reachable(pa, pb, radius_mode) == backhaul_reachable(pa, pb, snr_mode));
        }
    }
}
