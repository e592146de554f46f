#include "scooterx/error.hpp"
#include "scooterx/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

using namespace scooterx;

namespace {

constexpr double kDeg = kPi / 180.0;

double cross(Vec2 o, Vec2 a, Vec2 b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Proper or touching intersection of segments p1p2 and q1q2.
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2)
{
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0) || d1 == 0 || d2 == 0) && ((d3 > 0) != (d4 > 0) || d3 == 0 || d4 == 0);
}

// Body as a segment h_t behind the antenna spanning [-w_tr, +w_tl] laterally.
// Frame used here: x = lateral, y = longitudinal.
bool oracle_blocked(const BodyGeometry& b, LocalPoint antenna, LocalPoint remote)
{
    const Vec2 a{antenna.lateral, antenna.longitudinal};
    const Vec2 r{remote.lateral, remote.longitudinal};
    const Vec2 left{antenna.lateral + b.left_extent, antenna.longitudinal - b.axis_offset};
    const Vec2 right{antenna.lateral - b.right_extent, antenna.longitudinal - b.axis_offset};
    return segments_intersect(a, r, left, right);
}

// Distance of `remote` from the lines through the antenna and each body end;
// points closer than `band` are on the boundary.
bool near_boundary(const BodyGeometry& b, LocalPoint antenna, LocalPoint remote, double band)
{
    const Vec2 a{antenna.lateral, antenna.longitudinal};
    const Vec2 r{remote.lateral, remote.longitudinal};
    const Vec2 ends[2] = {{antenna.lateral + b.left_extent, antenna.longitudinal - b.axis_offset},
                          {antenna.lateral - b.right_extent, antenna.longitudinal - b.axis_offset}};
    for (Vec2 e : ends) {
        const double len = std::hypot(e.x - a.x, e.y - a.y);
        if (std::abs(cross(a, e, r)) / len < band) {
            return true;
        }
    }
    // the body's own line
    return std::abs(r.y - ends[0].y) < band;
}

std::shared_ptr<const VehicleProfile> scooter_profile(Occupancy o = Occupancy::Driver)
{
    return std::make_shared<const VehicleProfile>(VehicleProfile::scooter(o));
}

std::shared_ptr<const VehicleProfile> car_profile()
{
    return std::make_shared<const VehicleProfile>(VehicleProfile::car());
}

// Longitudinal distance behind the antenna at which the shadow starts for a
// remote at the given lateral offset, by bisection on the predicate.
double shadow_onset(const BodyGeometry& body, double lateral)
{
    const LocalPoint a{0.0, 0.0};
    double lo = 0.0;
    double hi = 1000.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (body_blocks_los(body, a, {lateral, -mid}) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("to_local_frame reference points")
{
    const LocalPoint a = to_local_frame(Pose(0, 0, 0), {10, 0});
    CHECK(a.lateral == doctest::Approx(0.0));
    CHECK(a.longitudinal == doctest::Approx(10.0));

    const LocalPoint b = to_local_frame(Pose(0, 0, kPi / 2), {0, 5});
    CHECK(b.lateral == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.longitudinal == doctest::Approx(5.0));

    const LocalPoint c = to_local_frame(Pose(3, 4, 0), {3, 4});
    CHECK(c.lateral == 0.0);
    CHECK(c.longitudinal == 0.0);

    // +lateral is the left of the direction of travel
    CHECK(to_local_frame(Pose(0, 0, 0), {0, 1}).lateral == doctest::Approx(1.0));
}

TEST_CASE("local and global frames are inverse")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 1000; ++i) {
        const Pose p(u(rng), u(rng), u(rng));
        const Vec2 g{u(rng), u(rng)};
        const Vec2 back = to_global_frame(p, to_local_frame(p, g));
        CHECK(back.x == doctest::Approx(g.x).epsilon(1e-12));
        CHECK(back.y == doctest::Approx(g.y).epsilon(1e-12));
    }
}

TEST_CASE("pose validation and heading normalization")
{
    CHECK(Pose(0, 0, -kPi / 2).heading() == doctest::Approx(3 * kPi / 2));
    CHECK(Pose(0, 0, 5 * kPi).heading() == doctest::Approx(kPi));
    CHECK(Pose(0, 0, -1e-300).heading() < 2 * kPi);
    CHECK_THROWS_AS(Pose(NAN, 0, 0), InvalidArgument);
    CHECK_THROWS_AS(Pose(0, 0, INFINITY), InvalidArgument);
}

TEST_CASE("calibration matches a direct linear solve")
{
    // unknowns (h, wl, wr):  lat_l*h - long_l*wl = 0, lat_r*h - long_r*wr = 0, wl + wr = span
    const double span = 0.42, lat_l = 3.5, long_l = 3.9, lat_r = 3.5, long_r = 24.0;
    const double m[3][3] = {{lat_l, -long_l, 0}, {lat_r, 0, -long_r}, {0, 1, 1}};
    const double rhs[3] = {0, 0, span};
    auto det3 = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double d = det3(m);
    double sol[3];
    for (int k = 0; k < 3; ++k) {
        double mk[3][3];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                mk[r][c] = c == k ? rhs[r] : m[r][c];
            }
        }
        sol[k] = det3(mk) / d;
    }
    const BodyGeometry b = calibrate_body_geometry(span, {lat_l, long_l}, {lat_r, long_r});
    CHECK(b.axis_offset == doctest::Approx(sol[0]).epsilon(1e-12));
    CHECK(b.left_extent == doctest::Approx(sol[1]).epsilon(1e-12));
    CHECK(b.right_extent == doctest::Approx(sol[2]).epsilon(1e-12));
    CHECK(b.occupancy == Occupancy::Driver);

    CHECK_THROWS_AS(calibrate_body_geometry(0.0, {3.5, 3.9}, {3.5, 24}), InvalidArgument);
    CHECK_THROWS_AS(calibrate_body_geometry(0.42, {3.5, 3.9}, {3.5, 24}, Occupancy::Empty),
                    InvalidArgument);
}

TEST_CASE("calibrated default reproduces the lane thresholds")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    CHECK(shadow_onset(b, 3.5) == doctest::Approx(3.9).epsilon(1e-6));
    CHECK(shadow_onset(b, -3.5) == doctest::Approx(24.0).epsilon(1e-6));
}

TEST_CASE("body predicate agrees with segment intersection")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    const LocalPoint antenna{-0.151, 0.45};
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const LocalPoint r{u(rng), u(rng)};
        if (near_boundary(b, antenna, r, 1e-6)) {
            continue;
        }
        ++checked;
        REQUIRE(body_blocks_los(b, antenna, r) == oracle_blocked(b, antenna, r));
    }
    CHECK(checked > 9900);
}

TEST_CASE("unoccupied body never blocks")
{
    BodyGeometry b = BodyGeometry::calibrated_default();
    b.occupancy = Occupancy::Empty;
    CHECK_FALSE(body_blocks_los(b, {0, 0}, {0, -100}));
}

TEST_CASE("predicate cases")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    const LocalPoint a{0, 0};
    CHECK_FALSE(body_blocks_los(b, a, {0, 10}));       // ahead
    CHECK(body_blocks_los(b, a, {0, -10}));            // straight behind
    CHECK_FALSE(body_blocks_los(b, a, {5, 0}));        // beside
    CHECK_FALSE(body_blocks_los(b, a, {0, -b.axis_offset}));  // on the body axis, not behind it
    CHECK(body_blocks_los(b, a, {3.5, -4.5}));         // behind left past 3.9 m
    CHECK_FALSE(body_blocks_los(b, a, {-3.5, -20}));   // behind right short of 24 m
}

TEST_CASE("shadow cone agrees with the predicate per side")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    const double left = std::atan(b.left_extent / b.axis_offset);
    const double right = std::atan(b.right_extent / b.axis_offset);
    CHECK(shadow_cone_angle(b) == doctest::Approx(left + right));
    // far-field ray at angle phi from the rearward axis (+phi towards the left)
    for (int k = -900; k <= 900; ++k) {
        const double phi = k * 0.1 * kDeg;
        const double bound = phi > 0 ? left : right;
        if (std::abs(std::abs(phi) - bound) < 1e-3) {
            continue;
        }
        const double r = 1e6;
        const LocalPoint p{r * std::sin(phi), -r * std::cos(phi)};
        CHECK(body_blocks_los(b, {0, 0}, p) == (std::abs(phi) < bound));
    }
    BodyGeometry empty;
    CHECK_THROWS_AS(shadow_cone_angle(empty), InvalidArgument);
}

TEST_CASE("blocking is monotone along a ray")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(-10, 10);
    for (int i = 0; i < 500; ++i) {
        const double x = lat(rng);
        bool seen = false;
        for (double d = 0.5; d < 200; d += 0.5) {
            const bool blocked = body_blocks_los(b, {0, 0}, {x, -d});
            if (seen) {
                REQUIRE(blocked);
            }
            seen = seen || blocked;
        }
    }
}

TEST_CASE("rear mount sees the body ahead of it")
{
    VehicleProfile p = VehicleProfile::scooter();
    p.antenna_offsets.push_back({0.0, -0.8});
    const BodyView v = body_view(p, 1);
    CHECK(v.body_ahead);
    const LocalPoint a = p.antenna_offsets[1];
    CHECK(body_blocks_los(v, a, {0.0, 50.0}));
    CHECK_FALSE(body_blocks_los(v, a, {0.0, -50.0}));
    // the primary mount looks the other way
    CHECK_FALSE(body_view(p, 0).body_ahead);

    p.antenna_offsets.back() = {0.45, 0.9};  // outside the body's lateral span
    CHECK_THROWS_AS(body_view(p, 1), InvalidArgument);
}

TEST_CASE("vehicle obstruction reference cases")
{
    const PlacedVehicle car{9, Pose(10, 0, 0), car_profile()};
    CHECK(vehicle_obstructs({0, 0, 1.13}, {20, 0, 1.13}, car));
    // 5 m off the segment
    const PlacedVehicle off{9, Pose(10, 5 + 1.0, 0), car_profile()};
    CHECK_FALSE(vehicle_obstructs({0, 0, 1.13}, {20, 0, 1.13}, off));
    // low obstacle
    auto low = std::make_shared<VehicleProfile>(VehicleProfile::car());
    low->obstacle_height = 0.5;
    const PlacedVehicle low_car{9, Pose(10, 0, 0), low};
    CHECK_FALSE(vehicle_obstructs({0, 0, 1.13}, {20, 0, 1.13}, low_car));
    // an obstacle exactly at ray height does not block
    CHECK_FALSE(vehicle_obstructs({0, 0, 1.435}, {20, 0, 1.435}, car));
    // segment ending before the footprint
    CHECK_FALSE(vehicle_obstructs({0, 0, 1.13}, {6, 0, 1.13}, car));
}

TEST_CASE("classify_link reference cases")
{
    const std::vector<PlacedVehicle> none;

    SUBCASE("car ahead of a scooter")
    {
        const PlacedVehicle s{1, Pose(0, 0, 0), scooter_profile()};
        const PlacedVehicle c{2, Pose(20, 0, 0), car_profile()};
        const auto r = classify_link(LinkEnd{c, 0}, LinkEnd{s, 0}, none);
        CHECK(r.cls == LosClass::Los);
        CHECK(r.blocking_body_count == 0);
    }
    SUBCASE("scooter ahead of a car")
    {
        const PlacedVehicle c{1, Pose(0, 0, 0), car_profile()};
        const PlacedVehicle s{2, Pose(20, 0, 0), scooter_profile()};
        const auto r = classify_link(LinkEnd{s, 0}, LinkEnd{c, 0}, none);
        CHECK(r.cls == LosClass::BodyShadowed);
        CHECK(r.blocking_body_count == 1);
    }
    SUBCASE("side by side")
    {
        const PlacedVehicle a{1, Pose(0, 0, 0), scooter_profile()};
        const PlacedVehicle b{2, Pose(0, 3, 0), scooter_profile()};
        CHECK(classify_link(LinkEnd{a, 0}, LinkEnd{b, 0}, none).cls == LosClass::Los);
    }
    SUBCASE("two bodies and a car")
    {
        // scooter ahead facing +x, scooter behind facing -x: both bodies in between
        const PlacedVehicle a{1, Pose(30, 0, 0), scooter_profile(Occupancy::DriverAndPassenger)};
        const PlacedVehicle b{2, Pose(0, 0, kPi), scooter_profile()};
        const std::vector<PlacedVehicle> others{{3, Pose(15, 0, 0), car_profile()}};
        const auto r = classify_link(LinkEnd{a, 0}, LinkEnd{b, 0}, others);
        CHECK(r.cls == LosClass::BodyAndVehicle);
        CHECK(r.blocking_body_count == 2);
        REQUIRE(r.blocking_bodies.size() == 2);
        CHECK(r.blocking_bodies[0] == Occupancy::DriverAndPassenger);
        CHECK(r.obstructing_vehicle_ids == std::vector<VehicleId>{3});

        const auto only_vehicles = classify_link(LinkEnd{a, 0}, LinkEnd{b, 0}, others, {false, true});
        CHECK(only_vehicles.cls == LosClass::VehicleObstructed);
        const auto only_bodies = classify_link(LinkEnd{a, 0}, LinkEnd{b, 0}, others, {true, false});
        CHECK(only_bodies.cls == LosClass::BodyShadowed);
    }
}

TEST_CASE("classification is invariant under rigid motion and reciprocal")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> pos(-40, 40);
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    std::bernoulli_distribution is_car(0.3);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<PlacedVehicle> v;
        for (VehicleId id = 0; id < 8; ++id) {
            v.push_back({id, Pose(pos(rng), pos(rng), ang(rng)),
                         is_car(rng) ? car_profile() : scooter_profile()});
        }
        const double rot = ang(rng);
        const double tx = pos(rng);
        const double ty = pos(rng);
        std::vector<PlacedVehicle> moved;
        for (const auto& p : v) {
            const double x = std::cos(rot) * p.pose.x() - std::sin(rot) * p.pose.y() + tx;
            const double y = std::sin(rot) * p.pose.x() + std::cos(rot) * p.pose.y() + ty;
            moved.push_back({p.id, Pose(x, y, p.pose.heading() + rot), p.profile});
        }
        const auto a = classify_link(LinkEnd{v[0], 0}, LinkEnd{v[1], 0}, v);
        const auto b = classify_link(LinkEnd{moved[0], 0}, LinkEnd{moved[1], 0}, moved);
        CHECK(a.cls == b.cls);
        CHECK(a.blocking_body_count == b.blocking_body_count);
        CHECK(a.obstructing_vehicle_ids == b.obstructing_vehicle_ids);

        const auto back = classify_link(LinkEnd{v[1], 0}, LinkEnd{v[0], 0}, v);
        CHECK(back.cls == a.cls);
        CHECK(back.blocking_body_count == a.blocking_body_count);
    }
}

TEST_CASE("far-field distance")
{
    CHECK(fraunhofer_distance(0.175, 2.48e9) == doctest::Approx(0.506).epsilon(0.01));
    CHECK(fraunhofer_distance(0.175, 2.48e9) ==
          doctest::Approx(2 * 0.175 * 0.175 * 2.48e9 / 299792458.0));
    CHECK_THROWS_AS(fraunhofer_distance(0, 1e9), InvalidArgument);
}

TEST_CASE("explain_body_los reports the inequality")
{
    const BodyGeometry b = BodyGeometry::calibrated_default();
    const auto e = explain_body_los(b, {0, 0}, {3.5, -30});
    CHECK(e.body_case == BodyCase::BehindLeft);
    CHECK(e.blocked);
    CHECK(e.lhs == doctest::Approx(b.axis_offset * 3.5));
    CHECK(e.rhs == doctest::Approx(b.left_extent * 30));
    CHECK(explain_body_los(b, {0, 0}, {0, 5}).body_case == BodyCase::NotBehind);
}

TEST_CASE("profiles validate")
{
    CHECK_NOTHROW(VehicleProfile::scooter().validate());
    CHECK_NOTHROW(VehicleProfile::car().validate());
    VehicleProfile bad = VehicleProfile::car();
    bad.body = BodyGeometry::calibrated_default();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK(occupancy_from_string("driver_and_passenger") == Occupancy::DriverAndPassenger);
    CHECK_THROWS_AS(occupancy_from_string("bus"), InvalidArgument);
}
