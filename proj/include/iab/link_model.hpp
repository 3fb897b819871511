#pragma once

#include "iab/geometry.hpp"

namespace iab {

enum class CoverageMode { radius, snr };

// mmWave link budget inputs. The default SNR thresholds are calibrated so
// that snr mode reproduces the radius-mode footprints: the access threshold
// sits between the link SNR at 200 m and 201 m, the backhaul threshold
// between 300 m and 301 m (60 GHz, 1 GHz bandwidth, 15 dB/km atmospheric
// absorption, dry air).
struct RadioConfig {
    double tx_power_dbm = 30.0;
    double tx_gain_db = 10.0;
    double rx_gain_db = 10.0;
    double bandwidth_hz = 1e9;
    double frequency_ghz = 60.0;
    double atmospheric_atten_db_per_km = 15.0;
    double rain_atten_db_per_km = 0.0;
    double snr_threshold_db = 16.93;
    double backhaul_snr_threshold_db = 11.92;
    CoverageMode coverage_mode = CoverageMode::radius;
    double coverage_radius_m = 200.0;
    double backhaul_radius_m = 300.0;
};

// Thermal noise floor: -174 dBm/Hz integrated over the bandwidth.
double thermal_noise_dbm(double bandwidth_hz);

// Free-space path loss in dB; distance in meters, frequency in GHz.
double free_space_path_loss_db(double distance_m, double frequency_ghz);

// Link budget: tx power + antenna gains - (FSPL + atmospheric + rain) - noise.
// The result is a signal-to-noise ratio in dB.
double link_snr_db(double distance_m, const RadioConfig& radio);

// Shannon capacity of the link in Gbps.
double shannon_rate_gbps(double snr_db, double bandwidth_hz);

// Access coverage predicate; identical for donors and nodes.
bool covers(const Point& from, const Point& to, const RadioConfig& radio);

// Backhaul feasibility predicate over a candidate parent-child link.
bool backhaul_reachable(const Point& from, const Point& to, const RadioConfig& radio);

}  // namespace iab
