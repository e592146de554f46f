#include "scooterx/fitting.hpp"

#include "scooterx/csv.hpp"
#include "scooterx/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>

namespace scooterx {

LogDistanceFit fit_log_distance(std::span<const RssiSample> samples)
{
    if (samples.size() < 2) {
        throw InvalidArgument("fit_log_distance: need at least two samples");
    }
    const std::size_t n = samples.size();
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& s : samples) {
        if (!(s.distance_m > 0.0)) {
            throw InvalidArgument("fit_log_distance: distances must be positive");
        }
        mean_x += -10.0 * std::log10(s.distance_m);
        mean_y += s.rssi_dbm;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : samples) {
        const double dx = -10.0 * std::log10(s.distance_m) - mean_x;
        sxx += dx * dx;
        sxy += dx * (s.rssi_dbm - mean_y);
    }
    if (sxx <= 0.0) {
        throw InvalidArgument("rank deficient: all sample distances are equal");
    }

    LogDistanceFit fit;
    fit.sample_count = n;
    fit.gamma = sxy / sxx;
    fit.intercept_db = mean_y - fit.gamma * mean_x;

    double rss = 0.0;
    for (const auto& s : samples) {
        const double r = s.rssi_dbm - (fit.intercept_db - 10.0 * fit.gamma * std::log10(s.distance_m));
        rss += r * r;
    }
    fit.residual_std_db = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2)) : 0.0;
    return fit;
}

std::vector<RssiSample> bin_means(std::span<const RssiSample> samples)
{
    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
        std::string label;
    };
    std::map<double, Acc> bins;
    for (const auto& s : samples) {
        Acc& acc = bins[s.distance_m];
        acc.sum += s.rssi_dbm;
        if (acc.count++ == 0) {
            acc.label = s.label;
        }
    }
    std::vector<RssiSample> out;
    out.reserve(bins.size());
    for (const auto& [d, acc] : bins) {
        out.push_back({d, acc.sum / static_cast<double>(acc.count), acc.label});
    }
    return out;
}

double attenuation_delta(const LogDistanceFit& a, const LogDistanceFit& b)
{
    return a.intercept_db - b.intercept_db;
}

std::vector<RssiSample> read_samples_csv(std::istream& in)
{
    CsvReader reader(in, {"distance_m", "rssi_dbm", "label"});
    std::vector<RssiSample> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        RssiSample s;
        s.distance_m = reader.number(fields[0], "distance_m");
        s.rssi_dbm = reader.number(fields[1], "rssi_dbm");
        s.label = fields[2];
        if (!(s.distance_m > 0.0)) {
            throw DataError(reader.where() + ": distance must be positive");
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) {
        throw DataError("sample file contains no records");
    }
    return out;
}

}  // namespace scooterx
