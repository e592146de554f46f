// Vehicle motion: trace ingestion and a synthetic car-following generator on
// the double-square loop track.
#pragma once

#include "scooterx/channel.hpp"
#include "scooterx/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace scooterx {

struct TraceRecord {
    double time = 0.0;
    VehicleId id = 0;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double speed = 0.0;
};

struct TraceState {
    Pose pose;
    double speed = 0.0;
};

// Per-vehicle time-sorted series with interpolated lookup. Immutable once built.
class TraceSet {
public:
    TraceSet() = default;
    // Records may interleave across vehicles but must be time-ordered per
    // vehicle; throws DataError otherwise.
    static TraceSet from_records(std::span<const TraceRecord> records);

    bool empty() const { return series_.empty(); }
    std::size_t vehicle_count() const { return series_.size(); }
    std::vector<VehicleId> vehicle_ids() const;
    bool contains(VehicleId id) const { return series_.count(id) != 0; }
    std::span<const TraceRecord> records(VehicleId id) const;

    // Linear interpolation of position, shortest-arc interpolation of heading;
    // queries outside the recorded span clamp to the first/last record.
    TraceState position_at(VehicleId id, double t) const;

    // Throws DataError unless every vehicle spans [0, duration] with no two
    // consecutive records further apart than max_gap seconds.
    void check_coverage(double duration, double max_gap) const;

    // All records ordered by (time, id).
    std::vector<TraceRecord> all_records() const;

private:
    std::map<VehicleId, std::vector<TraceRecord>> series_;
};

enum class TraceFormat { Csv, JsonLines };

// CSV header: time,id,x,y,heading,speed. JSON lines: one object per line with
// the same keys.
TraceSet load_trace(std::istream& in, TraceFormat format);
TraceSet load_trace_file(const std::string& path);
void write_trace(const TraceSet& trace, std::ostream& out, TraceFormat format);

struct TrackLayout {
    double edge_length = 50.0;
    std::size_t lanes = 3;
    double lane_width = 3.0;

    void validate() const;
};

// Two square loops sharing one edge, driven as a figure-eight:
// right square counter-clockwise, shared edge southbound, left square
// clockwise, shared edge southbound again. Lane 0 is the rightmost lane.
class LoopTrack {
public:
    explicit LoopTrack(const TrackLayout& layout);

    std::size_t lanes() const { return lanes_.size(); }
    double lane_length(std::size_t lane) const { return lanes_.at(lane).cumulative.back(); }
    Pose pose_at(std::size_t lane, double arc) const;
    double distance_to_next_corner(std::size_t lane, double arc) const;

private:
    struct Lane {
        std::vector<Vec2> vertices;       // closed: last == first
        std::vector<double> cumulative;   // arc length at each vertex
    };
    std::size_t segment_of(const Lane& lane, double arc) const;

    std::vector<Lane> lanes_;
};

struct VehicleDynamics {
    double max_speed = 0.0;  // m/s
    double max_accel = 0.0;  // m/s^2
    double max_decel = 0.0;  // m/s^2, positive
};

VehicleDynamics scooter_dynamics();
VehicleDynamics car_dynamics();

struct ChannelToggles {
    bool body_shadowing = true;
    bool vehicle_obstruction = true;
};

struct ScenarioConfig {
    double duration = 100.0;
    std::size_t vehicle_count = 50;
    double car_fraction = 0.3;
    TrackLayout topology;
    RadioParams radio = RadioParams::simulation();
    ChannelToggles toggles;
    std::uint64_t seed = 1;

    // mobility
    double sample_interval = 0.1;
    double headway = 2.0;
    double min_gap = 2.0;
    double corner_speed = 20.0 / 3.6;
    VehicleDynamics scooter = scooter_dynamics();
    VehicleDynamics car = car_dynamics();

    // riders and antennas
    double passenger_probability = 0.0;
    AntennaLocation scooter_antenna = AntennaLocation::LeftMirror;
    AntennaLocation car_antenna = AntennaLocation::CarRoof;
    std::map<AntennaLocation, PathLossParams> params;  // overrides of default_params
    VehicleLossModel vehicle_model;
    bool random_shadowing = true;

    // beaconing
    double beacon_rate_hz = 10.0;
    std::size_t beacon_bytes = 100;
    double data_rate_bps = 11e6;
    double candidate_margin = 50.0;
    double max_trace_gap = 1.0;

    // Explicit kinds for externally supplied traces; otherwise derived from
    // car_fraction and the seed.
    std::map<VehicleId, VehicleKind> kinds;

    void validate() const;
    PathLossParams params_for(AntennaLocation location) const;
};

// Exactly round(car_fraction * n) cars, chosen by a seeded shuffle of `ids`.
std::map<VehicleId, VehicleKind> assign_kinds(const ScenarioConfig& config,
                                              std::span<const VehicleId> ids);

// Scooter occupancy drawn per vehicle from passenger_probability.
std::map<VehicleId, Occupancy> assign_occupancy(const ScenarioConfig& config,
                                                const std::map<VehicleId, VehicleKind>& kinds);

std::size_t track_capacity(const ScenarioConfig& config);

// Vehicles 0..n-1 on the loop track, sampled every sample_interval over
// [0, duration]. Deterministic for a given config.
TraceSet generate_synthetic(const ScenarioConfig& config);

}  // namespace scooterx
