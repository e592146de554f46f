// Planar geometry for scooter-to-X links: vehicle frames, the rider-body
// line-of-sight predicate, shadow cones and vehicle obstruction.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace scooterx {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// A point in a vehicle's own frame. +longitudinal is the direction of travel,
// +lateral is the rider's left.
struct LocalPoint {
    double lateral = 0.0;
    double longitudinal = 0.0;
};

double normalize_heading(double radians);

// Position and travel direction on the road plane. Heading is measured from the
// global x-axis, counter-clockwise, and kept in [0, 2*pi).
class Pose {
public:
    Pose() = default;
    Pose(double x, double y, double heading);

    double x() const { return x_; }
    double y() const { return y_; }
    double heading() const { return heading_; }
    double cos_heading() const { return cos_; }
    double sin_heading() const { return sin_; }
    Vec2 position() const { return {x_, y_}; }

private:
    double x_ = 0.0;
    double y_ = 0.0;
    double heading_ = 0.0;
    double cos_ = 1.0;
    double sin_ = 0.0;
};

LocalPoint to_local_frame(const Pose& observer, Vec2 point);
Vec2 to_global_frame(const Pose& observer, LocalPoint point);

enum class Occupancy : std::uint8_t { Empty, Driver, DriverAndPassenger };

std::string_view to_string(Occupancy occupancy);
Occupancy occupancy_from_string(std::string_view name);

// Obstruction footprint of the rider as seen from one antenna.
//
// axis_offset is the longitudinal distance from the antenna to the body's
// central horizontal axis (the body sits behind the antenna). left_extent and
// right_extent are the lateral distances from the antenna's projection on that
// axis to the leftmost and rightmost body points.
struct BodyGeometry {
    double axis_offset = 0.0;
    double left_extent = 0.0;
    double right_extent = 0.0;
    Occupancy occupancy = Occupancy::Empty;

    bool occupied() const { return occupancy != Occupancy::Empty; }
    void validate() const;

    // Geometry calibrated from the measured lane thresholds (3.9 m on the left,
    // 24 m on the right at 3.5 m lateral offset) and a 42 cm shoulder span.
    static BodyGeometry calibrated_default(Occupancy occupancy = Occupancy::Driver);
};

enum class VehicleKind : std::uint8_t { Scooter, Car };

std::string_view to_string(VehicleKind kind);
VehicleKind vehicle_kind_from_string(std::string_view name);

struct VehicleProfile {
    VehicleKind kind = VehicleKind::Scooter;
    double length = 2.0;
    double width = 1.0;
    double antenna_height = 1.13;
    double obstacle_height = 1.66;
    // Antenna mounts in the vehicle frame (origin at the footprint centre).
    std::vector<LocalPoint> antenna_offsets;
    // Rider body relative to antenna_offsets[0].
    BodyGeometry body;

    void validate() const;

    static VehicleProfile scooter(Occupancy occupancy = Occupancy::Driver);
    static VehicleProfile car();
};

// The rider body as seen from one particular mount. For a mount behind the
// rider (a rear-carrier antenna) body_ahead is set and the predicate is applied
// with the longitudinal axis mirrored.
struct BodyView {
    BodyGeometry geometry;
    bool body_ahead = false;
};

BodyView body_view(const VehicleProfile& profile, std::size_t antenna_index);

using VehicleId = std::uint32_t;

struct PlacedVehicle {
    VehicleId id = 0;
    Pose pose;
    std::shared_ptr<const VehicleProfile> profile;

    Vec2 antenna_position(std::size_t antenna_index = 0) const;
    Vec3 antenna_point(std::size_t antenna_index = 0) const;
};

// True when the carrier's rider body lies on the segment between the carrier's
// antenna and the remote antenna. Both points are in the carrier's frame.
bool body_blocks_los(const BodyGeometry& body, LocalPoint antenna, LocalPoint remote);

// The predicate spelled out: which case applies and both sides of the
// inequality axis_offset * |d_lat| < extent * |d_long| (blocked when it holds).
enum class BodyCase : std::uint8_t { Unoccupied, NotBehind, Behind, BehindLeft, BehindRight };

std::string_view to_string(BodyCase body_case);

struct BodyLosExplanation {
    BodyCase body_case = BodyCase::Unoccupied;
    double lhs = 0.0;
    double rhs = 0.0;
    bool blocked = false;
};

BodyLosExplanation explain_body_los(const BodyGeometry& body, LocalPoint antenna, LocalPoint remote);

// Same predicate for an arbitrary mount, honouring BodyView::body_ahead.
bool body_blocks_los(const BodyView& view, LocalPoint antenna, LocalPoint remote);

// True when the ground-plane TX-RX segment crosses the obstacle footprint and
// the obstacle rises above the straight ray somewhere over that crossing.
bool vehicle_obstructs(Vec3 tx_antenna, Vec3 rx_antenna, const PlacedVehicle& obstacle);

enum class LosClass : std::uint8_t { Los, BodyShadowed, VehicleObstructed, BodyAndVehicle };

std::string_view to_string(LosClass cls);

struct LosClassification {
    LosClass cls = LosClass::Los;
    std::size_t blocking_body_count = 0;
    // Occupancy of each blocking body, TX side first.
    std::vector<Occupancy> blocking_bodies;
    std::vector<VehicleId> obstructing_vehicle_ids;
};

struct LinkEnd {
    const PlacedVehicle& vehicle;
    std::size_t antenna_index = 0;
};

struct ClassifyOptions {
    bool body_shadowing = true;
    bool vehicle_obstruction = true;
};

LosClassification classify_link(const LinkEnd& tx, const LinkEnd& rx,
                                std::span<const PlacedVehicle> others,
                                ClassifyOptions options = {});

// Angular width of the region behind the body where the remote has no line of
// sight: atan(left/axis) + atan(right/axis).
double shadow_cone_angle(const BodyGeometry& body);

// Near/far-field boundary 2*D^2/lambda.
double fraunhofer_distance(double antenna_largest_dimension, double frequency_hz);

// One (lateral, longitudinal) pair at which the shadow starts.
struct ShadowThreshold {
    double lateral = 0.0;
    double longitudinal = 0.0;
};

// Solves axis/left = long_l/lat_l, axis/right = long_r/lat_r and
// left + right = shoulder_span.
BodyGeometry calibrate_body_geometry(double shoulder_span, ShadowThreshold left_threshold,
                                     ShadowThreshold right_threshold,
                                     Occupancy occupancy = Occupancy::Driver);

}  // namespace scooterx
