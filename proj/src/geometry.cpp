#include "scooterx/geometry.hpp"

#include "scooterx/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scooterx {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

bool finite(double v) { return std::isfinite(v); }

// Shoulder span of the measured rider and the lane thresholds observed at a
// 3.5 m lateral offset.
constexpr double kShoulderSpan = 0.42;
constexpr ShadowThreshold kLeftLaneThreshold{3.5, 3.9};
constexpr ShadowThreshold kRightLaneThreshold{3.5, 24.0};

// Scooter layout: antenna 0.45 m ahead of the footprint centre, rider centred
// on the scooter's long axis.
constexpr double kScooterAntennaLongitudinal = 0.45;

}  // namespace

double normalize_heading(double radians)
{
    if (!finite(radians)) {
        throw InvalidArgument("heading must be finite");
    }
    double h = std::fmod(radians, kTwoPi);
    if (h < 0.0) {
        h += kTwoPi;
    }
    // fmod of a tiny negative value can round up to exactly 2*pi
    if (h >= kTwoPi) {
        h = 0.0;
    }
    return h;
}

Pose::Pose(double x, double y, double heading)
    : x_(x), y_(y), heading_(normalize_heading(heading)), cos_(std::cos(heading_)), sin_(std::sin(heading_))
{
    if (!finite(x) || !finite(y)) {
        throw InvalidArgument("pose coordinates must be finite");
    }
}

LocalPoint to_local_frame(const Pose& observer, Vec2 point)
{
    const double dx = point.x - observer.x();
    const double dy = point.y - observer.y();
    const double c = observer.cos_heading();
    const double s = observer.sin_heading();
    // forward = (c, s), left = (-s, c)
    return {-s * dx + c * dy, c * dx + s * dy};
}

Vec2 to_global_frame(const Pose& observer, LocalPoint point)
{
    const double c = observer.cos_heading();
    const double s = observer.sin_heading();
    return {observer.x() + c * point.longitudinal - s * point.lateral,
            observer.y() + s * point.longitudinal + c * point.lateral};
}

std::string_view to_string(Occupancy occupancy)
{
    switch (occupancy) {
    case Occupancy::Empty: return "empty";
    case Occupancy::Driver: return "driver";
    case Occupancy::DriverAndPassenger: return "driver_and_passenger";
    }
    return "unknown";
}

Occupancy occupancy_from_string(std::string_view name)
{
    if (name == "empty") return Occupancy::Empty;
    if (name == "driver") return Occupancy::Driver;
    if (name == "driver_and_passenger" || name == "passenger") return Occupancy::DriverAndPassenger;
    throw InvalidArgument("unknown occupancy '" + std::string(name) + "'");
}

void BodyGeometry::validate() const
{
    if (!occupied()) {
        return;
    }
    if (!(axis_offset > 0.0) || !(left_extent > 0.0) || !(right_extent > 0.0)) {
        throw InvalidArgument("occupied body needs positive axis offset and lateral extents");
    }
    if (left_extent + right_extent > 1.0) {
        throw InvalidArgument("body lateral span exceeds 1 m");
    }
}

BodyGeometry BodyGeometry::calibrated_default(Occupancy occupancy)
{
    return calibrate_body_geometry(kShoulderSpan, kLeftLaneThreshold, kRightLaneThreshold,
                                   occupancy);
}

std::string_view to_string(VehicleKind kind)
{
    return kind == VehicleKind::Car ? "car" : "scooter";
}

VehicleKind vehicle_kind_from_string(std::string_view name)
{
    if (name == "scooter") return VehicleKind::Scooter;
    if (name == "car") return VehicleKind::Car;
    throw InvalidArgument("unknown vehicle kind '" + std::string(name) + "'");
}

void VehicleProfile::validate() const
{
    if (!(length > 0.0) || !(width > 0.0) || !(antenna_height > 0.0) || !(obstacle_height > 0.0)) {
        throw InvalidArgument("vehicle dimensions and heights must be positive");
    }
    if (antenna_offsets.empty()) {
        throw InvalidArgument("vehicle needs at least one antenna");
    }
    for (const auto& a : antenna_offsets) {
        if (std::abs(a.longitudinal) > length / 2.0 || std::abs(a.lateral) > width / 2.0) {
            throw InvalidArgument("antenna offset outside the vehicle footprint");
        }
    }
    if (kind == VehicleKind::Car && body.occupied()) {
        throw InvalidArgument("a car carries no rider body");
    }
    body.validate();
    if (body.occupied()) {
        for (std::size_t i = 0; i < antenna_offsets.size(); ++i) {
            (void)body_view(*this, i);
        }
    }
}

VehicleProfile VehicleProfile::scooter(Occupancy occupancy)
{
    VehicleProfile p;
    p.kind = VehicleKind::Scooter;
    p.length = 2.0;
    p.width = 1.0;
    p.antenna_height = 1.13;
    p.obstacle_height = 1.66;
    // an empty scooter keeps the rider's dimensions so mounts stay where they are
    p.body = BodyGeometry::calibrated_default(occupancy == Occupancy::Empty ? Occupancy::Driver : occupancy);
    p.body.occupancy = occupancy;
    const double span = p.body.left_extent + p.body.right_extent;
    // body centred laterally: its left edge sits at +span/2
    p.antenna_offsets = {{span / 2.0 - p.body.left_extent, kScooterAntennaLongitudinal}};
    return p;
}

VehicleProfile VehicleProfile::car()
{
    VehicleProfile p;
    p.kind = VehicleKind::Car;
    p.length = 5.0;
    p.width = 2.0;
    p.antenna_height = 1.435;
    p.obstacle_height = 1.435;
    p.antenna_offsets = {{0.0, 0.0}};
    p.body = BodyGeometry{};
    return p;
}

BodyView body_view(const VehicleProfile& profile, std::size_t antenna_index)
{
    if (antenna_index >= profile.antenna_offsets.size()) {
        throw InvalidArgument("antenna index out of range");
    }
    const BodyGeometry& ref = profile.body;
    if (!ref.occupied() || antenna_index == 0) {
        return {ref, false};
    }
    const LocalPoint a0 = profile.antenna_offsets.front();
    const LocalPoint ai = profile.antenna_offsets[antenna_index];
    const double axis = a0.longitudinal - ref.axis_offset;
    const double left_edge = a0.lateral + ref.left_extent;
    const double right_edge = a0.lateral - ref.right_extent;

    BodyView view;
    view.geometry.occupancy = ref.occupancy;
    const double d = ai.longitudinal - axis;
    view.body_ahead = d < 0.0;
    view.geometry.axis_offset = std::abs(d);
    view.geometry.left_extent = left_edge - ai.lateral;
    view.geometry.right_extent = ai.lateral - right_edge;
    if (!(view.geometry.axis_offset > 0.0) || !(view.geometry.left_extent > 0.0) ||
        !(view.geometry.right_extent > 0.0)) {
        throw InvalidArgument("antenna mount must sit off the body axis and within its lateral span");
    }
    return view;
}

Vec2 PlacedVehicle::antenna_position(std::size_t antenna_index) const
{
    return to_global_frame(pose, profile->antenna_offsets.at(antenna_index));
}

Vec3 PlacedVehicle::antenna_point(std::size_t antenna_index) const
{
    const Vec2 p = antenna_position(antenna_index);
    return {p.x, p.y, profile->antenna_height};
}

std::string_view to_string(BodyCase body_case)
{
    switch (body_case) {
    case BodyCase::Unoccupied: return "unoccupied";
    case BodyCase::NotBehind: return "not_behind_body_axis";
    case BodyCase::Behind: return "directly_behind";
    case BodyCase::BehindLeft: return "behind_left";
    case BodyCase::BehindRight: return "behind_right";
    }
    return "unknown";
}

BodyLosExplanation explain_body_los(const BodyGeometry& body, LocalPoint antenna, LocalPoint remote)
{
    BodyLosExplanation e;
    e.blocked = body_blocks_los(body, antenna, remote);
    if (!body.occupied()) {
        return e;
    }
    const double d_lat = remote.lateral - antenna.lateral;
    const double d_long = remote.longitudinal - antenna.longitudinal;
    const double extent = d_lat > 0.0 ? body.left_extent : body.right_extent;
    e.lhs = body.axis_offset * std::abs(d_lat);
    e.rhs = extent * std::abs(d_long);
    if (!(d_long < -body.axis_offset)) {
        e.body_case = BodyCase::NotBehind;
    } else if (d_lat == 0.0) {
        e.body_case = BodyCase::Behind;
    } else {
        e.body_case = d_lat > 0.0 ? BodyCase::BehindLeft : BodyCase::BehindRight;
    }
    return e;
}

bool body_blocks_los(const BodyGeometry& body, LocalPoint antenna, LocalPoint remote)
{
    if (!body.occupied()) {
        return false;
    }
    const double d_lat = remote.lateral - antenna.lateral;
    const double d_long = remote.longitudinal - antenna.longitudinal;
    // one-sided: only the half-plane behind the body axis is shadowed
    if (!(d_long < -body.axis_offset)) {
        return false;
    }
    if (d_lat == 0.0) {
        return true;
    }
    const double extent = d_lat > 0.0 ? body.left_extent : body.right_extent;
    // LOS iff axis/extent >= |d_long|/|d_lat|
    return body.axis_offset * std::abs(d_lat) < extent * std::abs(d_long);
}

bool body_blocks_los(const BodyView& view, LocalPoint antenna, LocalPoint remote)
{
    if (view.body_ahead) {
        antenna.longitudinal = -antenna.longitudinal;
        remote.longitudinal = -remote.longitudinal;
    }
    return body_blocks_los(view.geometry, antenna, remote);
}

bool vehicle_obstructs(Vec3 tx_antenna, Vec3 rx_antenna, const PlacedVehicle& obstacle)
{
    const VehicleProfile& prof = *obstacle.profile;
    // reject on the footprint's bounding circle before the exact clip
    {
        const double ex = rx_antenna.x - tx_antenna.x;
        const double ey = rx_antenna.y - tx_antenna.y;
        const double px = obstacle.pose.x() - tx_antenna.x;
        const double py = obstacle.pose.y() - tx_antenna.y;
        const double len2 = ex * ex + ey * ey;
        const double t = len2 > 0.0 ? std::clamp((px * ex + py * ey) / len2, 0.0, 1.0) : 0.0;
        const double dx = px - t * ex;
        const double dy = py - t * ey;
        const double r2 = (prof.length * prof.length + prof.width * prof.width) / 4.0;
        if (dx * dx + dy * dy > r2) {
            return false;
        }
    }
    const LocalPoint a = to_local_frame(obstacle.pose, {tx_antenna.x, tx_antenna.y});
    const LocalPoint b = to_local_frame(obstacle.pose, {rx_antenna.x, rx_antenna.y});

    // Liang-Barsky clip of a + t (b - a), t in [0, 1], against the footprint
    double t0 = 0.0;
    double t1 = 1.0;
    const double half_len = prof.length / 2.0;
    const double half_wid = prof.width / 2.0;
    const double p[4] = {-(b.longitudinal - a.longitudinal), b.longitudinal - a.longitudinal,
                         -(b.lateral - a.lateral), b.lateral - a.lateral};
    const double q[4] = {a.longitudinal + half_len, half_len - a.longitudinal,
                         a.lateral + half_wid, half_wid - a.lateral};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) {
                return false;
            }
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, r);
        } else {
            t1 = std::min(t1, r);
        }
        if (t0 > t1) {
            return false;
        }
    }
    // ray height is linear in t, so its minimum over the crossing is at an end
    const double h0 = tx_antenna.z + t0 * (rx_antenna.z - tx_antenna.z);
    const double h1 = tx_antenna.z + t1 * (rx_antenna.z - tx_antenna.z);
    return prof.obstacle_height > std::min(h0, h1);
}

std::string_view to_string(LosClass cls)
{
    switch (cls) {
    case LosClass::Los: return "los";
    case LosClass::BodyShadowed: return "body_shadowed";
    case LosClass::VehicleObstructed: return "vehicle_obstructed";
    case LosClass::BodyAndVehicle: return "body_and_vehicle";
    }
    return "unknown";
}

namespace {

// Does the carrier's body block the path to `remote` (a global point)?
bool carrier_body_blocks(const LinkEnd& carrier, Vec2 remote)
{
    const VehicleProfile& prof = *carrier.vehicle.profile;
    if (prof.kind != VehicleKind::Scooter || !prof.body.occupied()) {
        return false;
    }
    const BodyView view = body_view(prof, carrier.antenna_index);
    const LocalPoint antenna = prof.antenna_offsets[carrier.antenna_index];
    return body_blocks_los(view, antenna, to_local_frame(carrier.vehicle.pose, remote));
}

}  // namespace

LosClassification classify_link(const LinkEnd& tx, const LinkEnd& rx,
                                std::span<const PlacedVehicle> others, ClassifyOptions options)
{
    if (tx.vehicle.id == rx.vehicle.id) {
        throw InvalidArgument("classify_link: tx and rx must differ");
    }
    LosClassification out;
    const Vec3 tx_point = tx.vehicle.antenna_point(tx.antenna_index);
    const Vec3 rx_point = rx.vehicle.antenna_point(rx.antenna_index);

    if (options.body_shadowing) {
        if (carrier_body_blocks(tx, {rx_point.x, rx_point.y})) {
            out.blocking_bodies.push_back(tx.vehicle.profile->body.occupancy);
        }
        if (carrier_body_blocks(rx, {tx_point.x, tx_point.y})) {
            out.blocking_bodies.push_back(rx.vehicle.profile->body.occupancy);
        }
    }
    out.blocking_body_count = out.blocking_bodies.size();

    if (options.vehicle_obstruction) {
        for (const PlacedVehicle& other : others) {
            if (other.id == tx.vehicle.id || other.id == rx.vehicle.id) {
                continue;
            }
            if (vehicle_obstructs(tx_point, rx_point, other)) {
                out.obstructing_vehicle_ids.push_back(other.id);
            }
        }
    }

    const bool body = out.blocking_body_count > 0;
    const bool vehicle = !out.obstructing_vehicle_ids.empty();
    out.cls = body && vehicle ? LosClass::BodyAndVehicle
              : body          ? LosClass::BodyShadowed
              : vehicle       ? LosClass::VehicleObstructed
                              : LosClass::Los;
    return out;
}

double shadow_cone_angle(const BodyGeometry& body)
{
    if (!body.occupied()) {
        throw InvalidArgument("no body");
    }
    body.validate();
    return std::atan(body.left_extent / body.axis_offset) +
           std::atan(body.right_extent / body.axis_offset);
}

double fraunhofer_distance(double antenna_largest_dimension, double frequency_hz)
{
    if (!(antenna_largest_dimension > 0.0) || !(frequency_hz > 0.0)) {
        throw InvalidArgument("fraunhofer_distance: inputs must be positive");
    }
    const double wavelength = kSpeedOfLight / frequency_hz;
    return 2.0 * antenna_largest_dimension * antenna_largest_dimension / wavelength;
}

BodyGeometry calibrate_body_geometry(double shoulder_span, ShadowThreshold left_threshold,
                                     ShadowThreshold right_threshold, Occupancy occupancy)
{
    if (!(shoulder_span > 0.0) || !(left_threshold.lateral > 0.0) ||
        !(left_threshold.longitudinal > 0.0) || !(right_threshold.lateral > 0.0) ||
        !(right_threshold.longitudinal > 0.0)) {
        throw InvalidArgument("calibrate_body_geometry: span and thresholds must be positive");
    }
    if (occupancy == Occupancy::Empty) {
        throw InvalidArgument("calibrate_body_geometry: occupancy must not be empty");
    }
    // extent_side = axis * lat_side / long_side; the extents sum to the span
    const double left_ratio = left_threshold.lateral / left_threshold.longitudinal;
    const double right_ratio = right_threshold.lateral / right_threshold.longitudinal;
    BodyGeometry body;
    body.occupancy = occupancy;
    body.axis_offset = shoulder_span / (left_ratio + right_ratio);
    body.left_extent = body.axis_offset * left_ratio;
    body.right_extent = body.axis_offset * right_ratio;
    if (!(body.axis_offset > 0.0) || !(body.left_extent > 0.0) || !(body.right_extent > 0.0) ||
        !finite(body.axis_offset)) {
        throw InvalidArgument("calibrate_body_geometry: inconsistent thresholds");
    }
    body.validate();
    return body;
}

}  // namespace scooterx
