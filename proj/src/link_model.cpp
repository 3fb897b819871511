#include "iab/link_model.hpp"

#include <cmath>
#include <stdexcept>

namespace iab {

double thermal_noise_dbm(double bandwidth_hz) {
    if (bandwidth_hz <= 0.0) {
        throw std::invalid_argument("thermal_noise_dbm: bandwidth must be positive");
    }
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

double free_space_path_loss_db(double distance_m, double frequency_ghz) {
    if (distance_m <= 0.0) {
        throw std::invalid_argument("free_space_path_loss_db: distance must be positive");
    }
    const double d_km = distance_m / 1000.0;
    return 20.0 * std::log10(d_km) + 20.0 * std::log10(frequency_ghz) + 92.45;
}

double link_snr_db(double distance_m, const RadioConfig& radio) {
    if (distance_m <= 0.0) {
        throw std::invalid_argument("link_snr_db: distance must be positive");
    }
    const double d_km = distance_m / 1000.0;
    const double gain_all = radio.tx_gain_db + radio.rx_gain_db;
    const double loss_all = free_space_path_loss_db(distance_m, radio.frequency_ghz) +
                            radio.atmospheric_atten_db_per_km * d_km +
                            radio.rain_atten_db_per_km * d_km;
    return radio.tx_power_dbm + gain_all - loss_all - thermal_noise_dbm(radio.bandwidth_hz);
}

double shannon_rate_gbps(double snr_db, double bandwidth_hz) {
    if (bandwidth_hz <= 0.0) {
        throw std::invalid_argument("shannon_rate_gbps: bandwidth must be positive");
    }
    const double snr_linear = std::pow(10.0, snr_db / 10.0);
    return bandwidth_hz * std::log2(1.0 + snr_linear) / 1e9;
}

bool covers(const Point& from, const Point& to, const RadioConfig& radio) {
    const double d = distance(from, to);
    if (d == 0.0) {
        return true;
    }
    if (radio.coverage_mode == CoverageMode::radius) {
        return d <= radio.coverage_radius_m;
    }
    return link_snr_db(d, radio) > radio.snr_threshold_db;
}

bool backhaul_reachable(const Point& from, const Point& to, const RadioConfig& radio) {
    const double d = distance(from, to);
    if (d == 0.0) {
        return true;
    }
    if (radio.coverage_mode == CoverageMode::radius) {
        return d <= radio.backhaul_radius_m;
    }
    return link_snr_db(d, radio) > radio.backhaul_snr_threshold_db;
}

}  // namespace iab
