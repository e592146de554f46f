// Communication range and grid coverage maps around a transmitting vehicle for
// single and dual antenna configurations.
#pragma once

#include "scooterx/channel.hpp"
#include "scooterx/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string_view>
#include <vector>

namespace scooterx {

enum class AntennaMode : std::uint8_t { Single, DualFront, FrontAndBack };

std::string_view to_string(AntennaMode mode);
AntennaMode antenna_mode_from_string(std::string_view name);

struct AntennaMount {
    LocalPoint offset;
    AntennaLocation location = AntennaLocation::LeftMirror;
    double cable_loss_db = 0.0;
};

// Cable run from the front electronics to a rear-carrier antenna.
inline constexpr double kRearFeedCableLossDb = 5.0;
inline constexpr double kRearCarrierLongitudinal = -0.8;

struct AntennaConfig {
    AntennaMode mode = AntennaMode::Single;
    std::vector<AntennaMount> mounts;

    void validate() const;

    // Mount 0 is always the profile's primary antenna.
    static AntennaConfig single(const VehicleProfile& profile,
                                AntennaLocation location = AntennaLocation::LeftMirror);
    // Second antenna mirrored across the vehicle's long axis.
    static AntennaConfig dual_front(const VehicleProfile& profile,
                                    AntennaLocation location = AntennaLocation::LeftMirror);
    // Second antenna on the rear carrier, behind the rider, fed by a long cable.
    static AntennaConfig front_and_back(const VehicleProfile& profile,
                                        AntennaLocation location = AntennaLocation::LeftMirror,
                                        double rear_cable_loss_db = kRearFeedCableLossDb);
};

// Copy of `profile` whose antenna list is the configuration's mounts.
VehicleProfile with_mounts(VehicleProfile profile, const AntennaConfig& config);

// Distance at which the mean RSSI falls to the receive sensitivity. When
// shadowed, the attenuation of a blocking body with `body` occupancy is
// subtracted from the budget.
double communication_range(const PathLossParams& params, const RadioParams& radio, bool shadowed,
                           Occupancy body = Occupancy::DriverAndPassenger);

// Far-field angular width of the directions blocked for every mount at once.
// Zero when no direction is shadowed for all mounts.
double effective_shadow_cone(const VehicleProfile& profile);

struct CoverageRequest {
    VehicleProfile tx_profile = VehicleProfile::scooter();
    Pose tx_pose;
    AntennaConfig antennas;
    double strip_length = 1700.0;  // along global x
    double strip_width = 30.0;     // along global y
    double spacing = 1.0;
    double rx_antenna_height = 1.13;
    std::vector<PlacedVehicle> obstacles;
    RadioParams radio = RadioParams::simulation();
    // Per-location overrides; missing locations use default_params.
    std::map<AntennaLocation, PathLossParams> params;
    VehicleLossModel vehicle_model;
    unsigned threads = 0;  // 0: hardware concurrency

    PathLossParams params_for(AntennaLocation location) const;
};

struct CoverageCell {
    double rssi_dbm = 0.0;  // unclamped
    bool covered = false;
    LosClass cls = LosClass::Los;
    std::uint8_t antenna = 0;  // winning mount
};

struct CoverageMap {
    Pose origin;
    double spacing = 1.0;
    double length = 0.0;
    double width = 0.0;
    std::size_t columns = 0;
    std::size_t rows = 0;
    double rx_sensitivity_dbm = 0.0;
    std::vector<CoverageCell> cells;  // row-major, row = y index

    const CoverageCell& at(std::size_t column, std::size_t row) const
    {
        return cells[row * columns + column];
    }
    Vec2 cell_center(std::size_t column, std::size_t row) const;
    std::size_t covered_count() const;
    double covered_area_m2() const;
};

CoverageMap coverage_map(const CoverageRequest& request);

// (covered_dual - covered_single) / covered_single by cell count.
double coverage_improvement(const CoverageMap& single, const CoverageMap& dual);

// Angular extent of body-shadowed cells whose distance from `apex` lies in
// [r_min, r_max], measured around `axis_heading` (global radians).
double measure_shadow_wedge(const CoverageMap& map, Vec2 apex, double axis_heading, double r_min,
                            double r_max);

// CSV with header x,y,rssi_dbm,covered,classification; RSSI clamped at the ED floor.
void write_coverage_csv(const CoverageMap& map, std::ostream& out);

// CSV with header x,y,classification.
void write_shadow_csv(const CoverageMap& map, std::ostream& out);

// What a saved coverage run needs for a later comparison.
struct CoverageSummary {
    AntennaMode mode = AntennaMode::Single;
    std::size_t columns = 0;
    std::size_t rows = 0;
    double spacing = 0.0;
    std::size_t covered_cells = 0;
    double covered_area_m2 = 0.0;
};

CoverageSummary summarize(const CoverageMap& map, AntennaMode mode);

// Same quantity as coverage_improvement, from two summaries of identical grids.
double coverage_improvement(const CoverageSummary& single, const CoverageSummary& dual);

}  // namespace scooterx
