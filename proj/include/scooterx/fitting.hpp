// Least-squares fit of the log-distance model to RSSI-vs-distance samples.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scooterx {

struct RssiSample {
    double distance_m = 0.0;
    double rssi_dbm = 0.0;
    std::string label;
};

struct LogDistanceFit {
    double gamma = 0.0;
    double intercept_db = 0.0;     // fitted X'_sigma, RSSI at 1 m
    double residual_std_db = 0.0;  // sqrt(RSS / (n - 2)), 0 for n == 2
    std::size_t sample_count = 0;
};

// Ordinary least squares of rssi against -10 log10(distance).
LogDistanceFit fit_log_distance(std::span<const RssiSample> samples);

// Collapses samples sharing a distance into their mean, sorted by distance.
std::vector<RssiSample> bin_means(std::span<const RssiSample> samples);

// Difference of the two fitted intercepts, a minus b.
double attenuation_delta(const LogDistanceFit& a, const LogDistanceFit& b);

// Reads `distance_m,rssi_dbm,label` CSV (header required).
std::vector<RssiSample> read_samples_csv(std::istream& in);

}  // namespace scooterx
