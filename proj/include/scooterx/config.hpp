// JSON documents for scenarios, coverage runs and results. Loading merges the
// user document over the serialized defaults and rejects keys the defaults do
// not have, so a typo never silently falls back to a default.
#pragma once

#include "scooterx/coverage.hpp"
#include "scooterx/fitting.hpp"
#include "scooterx/simkernel.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scooterx {

using Json = nlohmann::ordered_json;

// Recursively overwrites `base` with `patch`. Unknown keys and type changes
// throw InvalidArgument naming the dotted path. An empty object in `base` is a
// free-form map and accepts any keys.
void merge_strict(Json& base, const Json& patch);

// Applies "dotted.key=value". The value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(Json& doc, std::string_view assignment);

Json to_json(const RadioParams& radio);
Json to_json(const PathLossParams& params);
Json to_json(const ScenarioConfig& scenario);
ScenarioConfig scenario_from_json(const Json& doc);

// Defaults, then `file_doc` (may be null), then each override in order.
ScenarioConfig load_scenario(const Json& file_doc, std::span<const std::string> overrides);

struct CoverageConfig {
    AntennaMode mode = AntennaMode::Single;
    AntennaLocation location = AntennaLocation::LeftMirror;
    Occupancy occupancy = Occupancy::DriverAndPassenger;
    double heading_deg = 0.0;
    double strip_length = 1700.0;
    double strip_width = 30.0;
    double spacing = 1.0;
    double rx_antenna_height = 1.13;
    double rear_cable_loss_db = kRearFeedCableLossDb;
    RadioParams radio = RadioParams::simulation();
    std::map<AntennaLocation, PathLossParams> params;
    VehicleLossModel vehicle_model;

    CoverageRequest request() const;
};

Json to_json(const CoverageConfig& config);
CoverageConfig coverage_from_json(const Json& doc);
CoverageConfig load_coverage(const Json& file_doc, std::span<const std::string> overrides);

Json to_json(const CoverageSummary& summary);
CoverageSummary coverage_summary_from_json(const Json& doc);

Json to_json(const SimStats& stats);
Json to_json(const LogDistanceFit& fit);

// "name=start:stop:step" with an inclusive stop.
struct Sweep {
    std::string name;
    std::vector<double> values;
};
Sweep parse_sweep(std::string_view spec);

// CSV car_fraction,variant,avg_received_per_vehicle, averaged over seeds.
void write_sweep_csv(std::span<const SweepResult> results, std::ostream& out);

Json read_json_file(const std::string& path);

}  // namespace scooterx
