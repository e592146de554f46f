#include "scooterx/channel.hpp"

#include "scooterx/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scooterx {

namespace {

constexpr double kMeasurementBudgetDb = kMeasurementTxPowerDbm + 2.0 * kMeasurementAntennaGainDbi;

struct LocationRow {
    AntennaLocation location;
    std::string_view name;
    double gamma;
    double scooter_only_db;
    double with_driver_db;
    double driver_loss_db;
};

// Fits of the measurement campaign, scooter alone and with the driver seated.
constexpr std::array<LocationRow, 5> kMeasuredRows = {{
    {AntennaLocation::RearCarrier, "rear_carrier", 2.0, -43.4, -53.9, 10.5},
    {AntennaLocation::TopHeadlight, "top_headlight", 1.8, -54.7, -67.1, 12.4},
    {AntennaLocation::TopRightLicensePlate, "top_right_license_plate", 2.4, -34.6, -44.2, 9.6},
    {AntennaLocation::LeftMirror, "left_mirror", 1.7, -34.2, -44.3, 10.1},
    {AntennaLocation::LeftHeadlight, "left_headlight", 2.0, -49.1, -58.5, 9.4},
}};

const LocationRow& measured_row(AntennaLocation location)
{
    for (const auto& row : kMeasuredRows) {
        if (row.location == location) {
            return row;
        }
    }
    throw InvalidArgument("no measured fit for antenna location " + std::string(to_string(location)));
}

LinkSample compose(const RadioParams& radio, const PathLossParams& params,
                   const LosClassification& link, double distance_m, double random_db,
                   const VehicleLossModel& vehicle_model)
{
    LinkSample s;
    s.distance_m = distance_m;
    s.classification = link;
    s.path_loss_db = path_loss_db(params, distance_m);
    s.body_loss_db = body_loss_db(params, link.blocking_bodies);
    s.vehicle_loss_db = vehicle_loss_db(link.obstructing_vehicle_ids.size(), vehicle_model);
    s.cable_loss_db = radio.cable_loss_db;
    s.random_db = random_db;
    s.rssi_dbm = radio.tx_power_dbm + 2.0 * radio.antenna_gain_dbi - s.cable_loss_db -
                 s.path_loss_db - s.body_loss_db - s.vehicle_loss_db - s.random_db;
    s.reported_rssi_dbm = std::max(s.rssi_dbm, kEdFloorDbm);
    s.received = s.rssi_dbm >= radio.rx_sensitivity_dbm;
    return s;
}

}  // namespace

std::string_view to_string(AntennaLocation location)
{
    if (location == AntennaLocation::CarRoof) {
        return "car_roof";
    }
    return measured_row(location).name;
}

AntennaLocation antenna_location_from_string(std::string_view name)
{
    if (name == "car_roof") {
        return AntennaLocation::CarRoof;
    }
    for (const auto& row : kMeasuredRows) {
        if (row.name == name) {
            return row.location;
        }
    }
    throw InvalidArgument("unknown antenna location '" + std::string(name) + "'");
}

void PathLossParams::validate() const
{
    if (!(gamma >= 1.0 && gamma <= 6.0)) {
        throw InvalidArgument("path-loss exponent must lie in [1, 6]");
    }
    if (!std::isfinite(intercept_db)) {
        throw InvalidArgument("intercept must be finite");
    }
    if (!(driver_loss_db >= 0.0) || !(passenger_extra_loss_db >= 0.0) || !(shadow_sigma_db >= 0.0)) {
        throw InvalidArgument("attenuation terms and sigma must be non-negative");
    }
}

PathLossParams default_params(AntennaLocation location)
{
    if (location == AntennaLocation::CarRoof) {
        // No roof fit exists; reuse the highest scooter mount. Cars carry no rider.
        const LocationRow& mirror = measured_row(AntennaLocation::LeftMirror);
        return {mirror.gamma, mirror.scooter_only_db, 0.0, 0.0, kDefaultShadowSigmaDb};
    }
    const LocationRow& row = measured_row(location);
    return {row.gamma, row.scooter_only_db, row.driver_loss_db, kPassengerExtraLossDb,
            kDefaultShadowSigmaDb};
}

MeasuredIntercepts measured_intercepts(AntennaLocation location)
{
    const LocationRow& row = measured_row(location);
    return {row.scooter_only_db, row.with_driver_db};
}

void RadioParams::validate() const
{
    if (!(frequency_hz > 0.0)) {
        throw InvalidArgument("frequency must be positive");
    }
    if (!(cable_loss_db >= 0.0)) {
        throw InvalidArgument("cable loss must be non-negative");
    }
    if (!std::isfinite(tx_power_dbm) || !std::isfinite(antenna_gain_dbi)) {
        throw InvalidArgument("transmit power and gain must be finite");
    }
    if (!(rx_sensitivity_dbm <= tx_power_dbm) || !(carrier_sense_dbm <= tx_power_dbm)) {
        throw InvalidArgument("thresholds must not exceed the transmit power");
    }
}

RadioParams RadioParams::measurement()
{
    RadioParams r;
    r.tx_power_dbm = kMeasurementTxPowerDbm;
    r.antenna_gain_dbi = kMeasurementAntennaGainDbi;
    r.rx_sensitivity_dbm = kEdFloorDbm;
    r.carrier_sense_dbm = kEdFloorDbm;
    r.frequency_hz = 2.48e9;
    r.cable_loss_db = 0.0;
    return r;
}

RadioParams RadioParams::simulation()
{
    return RadioParams{};
}

double path_loss_db(const PathLossParams& params, double distance_m)
{
    if (!(distance_m > 0.0)) {
        throw InvalidArgument("path_loss_db: distance must be positive");
    }
    return kMeasurementBudgetDb - params.intercept_db + 10.0 * params.gamma * std::log10(distance_m);
}

double mean_rssi_dbm(const RadioParams& radio, const PathLossParams& params, double distance_m)
{
    return radio.tx_power_dbm + 2.0 * radio.antenna_gain_dbi - radio.cable_loss_db -
           path_loss_db(params, distance_m);
}

double body_loss_db(const PathLossParams& params, std::span<const Occupancy> blocking_bodies)
{
    double total = 0.0;
    for (Occupancy o : blocking_bodies) {
        switch (o) {
        case Occupancy::Empty:
            throw InvalidArgument("body_loss_db: an empty scooter cannot block");
        case Occupancy::Driver:
            total += params.driver_loss_db;
            break;
        case Occupancy::DriverAndPassenger:
            total += params.driver_loss_db + params.passenger_extra_loss_db;
            break;
        }
    }
    return total;
}

void VehicleLossModel::validate() const
{
    if (!(per_vehicle_db >= 0.0) || !(max_db >= 0.0)) {
        throw InvalidArgument("vehicle loss terms must be non-negative");
    }
}

double vehicle_loss_db(std::size_t obstructing_count, const VehicleLossModel& model)
{
    return std::min(static_cast<double>(obstructing_count) * model.per_vehicle_db, model.max_db);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

LinkSample evaluate_link(const RadioParams& radio, const PathLossParams& params,
                         const LosClassification& link, double distance_m,
                         const VehicleLossModel& vehicle_model)
{
    return compose(radio, params, link, distance_m, 0.0, vehicle_model);
}

LinkSample evaluate_link(const RadioParams& radio, const PathLossParams& params,
                         const LosClassification& link, double distance_m, Rng& rng,
                         const VehicleLossModel& vehicle_model)
{
    double random_db = 0.0;
    if (params.shadow_sigma_db > 0.0) {
        std::normal_distribution<double> shadow(0.0, params.shadow_sigma_db);
        random_db = shadow(rng);
    }
    return compose(radio, params, link, distance_m, random_db, vehicle_model);
}

LinkSample evaluate_link_with_offset(const RadioParams& radio, const PathLossParams& params,
                                     const LosClassification& link, double distance_m,
                                     double random_db, const VehicleLossModel& vehicle_model)
{
    return compose(radio, params, link, distance_m, random_db, vehicle_model);
}

LinkSample combine_selective(std::span<const LinkSample> samples)
{
    if (samples.empty()) {
        throw InvalidArgument("combine_selective: no samples");
    }
    const auto best = std::max_element(samples.begin(), samples.end(),
                                       [](const LinkSample& a, const LinkSample& b) {
                                           return a.rssi_dbm < b.rssi_dbm;
                                       });
    return *best;
}

}  // namespace scooterx
