// Link budget: fitted log-distance path loss per antenna location, rider-body
// and vehicle attenuation, an optional lognormal term, selective combining.
#pragma once

#include "scooterx/geometry.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace scooterx {

enum class AntennaLocation : std::uint8_t {
    RearCarrier,
    TopHeadlight,
    TopRightLicensePlate,
    LeftMirror,
    LeftHeadlight,
    CarRoof,
};

inline constexpr std::array<AntennaLocation, 5> kScooterAntennaLocations = {
    AntennaLocation::RearCarrier, AntennaLocation::TopHeadlight,
    AntennaLocation::TopRightLicensePlate, AntennaLocation::LeftMirror,
    AntennaLocation::LeftHeadlight};

std::string_view to_string(AntennaLocation location);
AntennaLocation antenna_location_from_string(std::string_view name);

// Fitted path-loss pair plus attenuation offsets for one antenna location.
// The intercept is the fitted X'_sigma: mean RSSI at 1 m under the measurement
// radio (see kMeasurementTxPowerDbm / kMeasurementAntennaGainDbi).
struct PathLossParams {
    double gamma = 2.0;
    double intercept_db = -40.0;
    double driver_loss_db = 0.0;
    double passenger_extra_loss_db = 0.0;
    double shadow_sigma_db = 3.0;

    void validate() const;
};

// Radio used for the field measurements the intercepts were fitted from.
inline constexpr double kMeasurementTxPowerDbm = 3.3;
inline constexpr double kMeasurementAntennaGainDbi = 8.0;
// Receiver energy-detection floor; only applied to reported values.
inline constexpr double kEdFloorDbm = -90.0;
// Passenger attenuation on top of the driver, measured at the left mirror.
inline constexpr double kPassengerExtraLossDb = 17.9 - 10.1;
inline constexpr double kDefaultShadowSigmaDb = 3.0;
// Links shorter than this are evaluated at this distance; the fitted intercept
// is the 1 m value.
inline constexpr double kMinLinkDistance = 1.0;

PathLossParams default_params(AntennaLocation location);

// Measured intercept pairs, scooter alone and with the driver seated.
struct MeasuredIntercepts {
    double scooter_only_db;
    double with_driver_db;
};
MeasuredIntercepts measured_intercepts(AntennaLocation location);

struct RadioParams {
    double tx_power_dbm = 15.0;
    double antenna_gain_dbi = 1.0;  // each end
    double rx_sensitivity_dbm = -85.0;
    double carrier_sense_dbm = -87.57;
    double frequency_hz = 2.4e9;
    double cable_loss_db = 0.0;  // per feed, TX side

    void validate() const;

    // Transmit power, gains and detection floor of the measurement campaign.
    static RadioParams measurement();
    // 802.11 beaconing radio used in the traffic simulations.
    static RadioParams simulation();
};

// Mean loss between the transmitter's output and the receiver's input, such
// that the measurement radio sees mean RSSI = intercept - 10 gamma log10(d).
double path_loss_db(const PathLossParams& params, double distance_m);

// Mean RSSI ignoring body and vehicle terms.
double mean_rssi_dbm(const RadioParams& radio, const PathLossParams& params, double distance_m);

double body_loss_db(const PathLossParams& params, std::span<const Occupancy> blocking_bodies);

struct VehicleLossModel {
    double per_vehicle_db = 10.0;
    double max_db = 30.0;

    void validate() const;
};

double vehicle_loss_db(std::size_t obstructing_count, const VehicleLossModel& model = {});

struct LinkSample {
    double distance_m = 0.0;
    LosClassification classification;
    double path_loss_db = 0.0;
    double body_loss_db = 0.0;
    double vehicle_loss_db = 0.0;
    double cable_loss_db = 0.0;
    double random_db = 0.0;
    double rssi_dbm = 0.0;           // unclamped, used for all thresholds
    double reported_rssi_dbm = 0.0;  // clamped at the ED floor, for logs
    bool received = false;
};

using Rng = std::mt19937_64;

// Independent stream `stream` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

// Deterministic link budget.
LinkSample evaluate_link(const RadioParams& radio, const PathLossParams& params,
                         const LosClassification& link, double distance_m,
                         const VehicleLossModel& vehicle_model = {});

// Adds a zero-mean Gaussian term with std shadow_sigma_db drawn from rng.
LinkSample evaluate_link(const RadioParams& radio, const PathLossParams& params,
                         const LosClassification& link, double distance_m, Rng& rng,
                         const VehicleLossModel& vehicle_model = {});

// Link budget with a caller-supplied random term (dB of extra loss).
LinkSample evaluate_link_with_offset(const RadioParams& radio, const PathLossParams& params,
                                     const LosClassification& link, double distance_m,
                                     double random_db, const VehicleLossModel& vehicle_model = {});

// Highest-RSSI sample wins.
LinkSample combine_selective(std::span<const LinkSample> samples);

}  // namespace scooterx
