#include "scooterx/coverage.hpp"
#include "scooterx/error.hpp"
#include "scooterx/simkernel.hpp"
#include "scooterx/spatial_index.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace scooterx;

namespace {

struct Parked {
    VehicleId id;
    double x, y, heading;
};

TraceSet parked(const std::vector<Parked>& vehicles, double duration)
{
    std::vector<TraceRecord> r;
    for (double t = 0.0; t <= duration + 1e-9; t += 0.5) {
        for (const Parked& v : vehicles) {
            r.push_back({t, v.id, v.x, v.y, v.heading, 0.0});
        }
    }
    return TraceSet::from_records(r);
}

ScenarioConfig quiet_pair()
{
    ScenarioConfig c;
    c.vehicle_count = 2;
    c.car_fraction = 0.0;
    c.random_shadowing = false;
    c.passenger_probability = 1.0;
    return c;
}

ScenarioConfig small_scenario(std::uint64_t seed)
{
    ScenarioConfig c;
    c.vehicle_count = 20;
    c.duration = 10.0;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("variant numbering")
{
    for (int n = 1; n <= 4; ++n) {
        const ChannelVariant v = variant_from_number(n);
        CHECK(static_cast<int>(v) == n);
        CHECK(variant_of(toggles_of(v)) == v);
    }
    CHECK_FALSE(toggles_of(ChannelVariant::FreeSpace).body_shadowing);
    CHECK(toggles_of(ChannelVariant::BodyShadowing).body_shadowing);
    CHECK_FALSE(toggles_of(ChannelVariant::BodyShadowing).vehicle_obstruction);
    CHECK_THROWS_AS(variant_from_number(0), InvalidArgument);
    CHECK_THROWS_AS(variant_from_number(5), InvalidArgument);
}

TEST_CASE("MAC arbitration")
{
    const RadioParams radio = RadioParams::simulation();
    const double strong = radio.carrier_sense_dbm + 10.0;
    const double weak = radio.carrier_sense_dbm - 1.0;

    const std::vector<MacEntry> single{{1, 0.0, 1e-4, strong, false}};
    CHECK(mac_arbitrate(single, radio) == std::vector<bool>{true});

    const std::vector<MacEntry> clash{{1, 0.0, 1e-4, strong, false}, {2, 0.0, 1e-4, strong, false}};
    CHECK(mac_arbitrate(clash, radio) == std::vector<bool>{false, false});

    const std::vector<MacEntry> masked{{1, 0.0, 1e-4, strong, false}, {2, 5e-5, 1.5e-4, weak, false}};
    const auto m = mac_arbitrate(masked, radio);
    CHECK(m[0]);
    CHECK_FALSE(m[1]);  // dominated by the strong one

    const std::vector<MacEntry> apart{{1, 0.0, 1e-4, strong, false}, {2, 2e-4, 3e-4, strong, false}};
    CHECK(mac_arbitrate(apart, radio) == std::vector<bool>{true, true});

    const std::vector<MacEntry> own{{1, 0.0, 1e-4, strong, false}, {9, 0.0, 1e-4, strong, true}};
    CHECK(mac_arbitrate(own, radio) == std::vector<bool>{false, false});

    const std::vector<MacEntry> faint{{1, 0.0, 1e-4, radio.rx_sensitivity_dbm - 0.1, false}};
    CHECK(mac_arbitrate(faint, radio) == std::vector<bool>{false});
}

TEST_CASE("neighbour query")
{
    const std::vector<Vec2> three{{5, 0}, {0, 50}, {-500, 0}};
    CHECK(neighbor_query(three, {0, 0}, 100.0) == std::vector<std::size_t>{0, 1});
    CHECK(neighbor_query(three, {1, 1}, 0.001).empty());

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2000.0, 2000.0);
    std::vector<Vec2> pts(1000);
    for (auto& p : pts) {
        p = {u(rng), u(rng)};
    }
    GridIndex index(150.0);
    index.rebuild(pts);
    for (int q = 0; q < 50; ++q) {
        const Vec2 c{u(rng), u(rng)};
        const double r = 10.0 + std::abs(u(rng)) / 2;
        std::vector<std::size_t> brute;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (std::hypot(pts[i].x - c.x, pts[i].y - c.y) <= r) {
                brute.push_back(i);
            }
        }
        CHECK(index.query(c, r) == brute);
        CHECK(neighbor_query(pts, c, r) == brute);
    }
}

TEST_CASE("beacon schedule")
{
    ScenarioConfig c;
    c.duration = 100.0;
    const std::vector<VehicleId> ids{0, 1, 2};
    const auto b = beacon_schedule(c, ids);
    CHECK(b.size() == 3000);
    CHECK(std::is_sorted(b.begin(), b.end(), [](const Beacon& x, const Beacon& y) {
        return x.emit_time < y.emit_time || (x.emit_time == y.emit_time && x.tx_id < y.tx_id);
    }));
    for (const Beacon& x : b) {
        CHECK(x.size == c.beacon_bytes);
        CHECK(x.emit_time >= 0.0);
        CHECK(x.emit_time < c.duration);
    }
    CHECK(candidate_radius(c) > communication_range(c.params_for(c.scooter_antenna), c.radio, false));
}

TEST_CASE("two parked scooters side by side hear every beacon")
{
    ScenarioConfig c = quiet_pair();
    const TraceSet t = parked({{0, 0, 0, 0}, {1, 0, 10, 0}}, c.duration);
    const SimStats s = run_variants(c, t, kAllVariants);
    CHECK(s.beacons_sent == 2000);
    for (const VariantStats& v : s.variants) {
        CHECK(v.received_per_vehicle == std::vector<std::uint64_t>{1000, 1000});
        CHECK(v.class_histogram[static_cast<int>(LosClass::Los)] == 2000);
    }
}

TEST_CASE("receiver behind an occupied scooter is cut off only by the body")
{
    ScenarioConfig c = quiet_pair();
    const PathLossParams p = c.params_for(c.scooter_antenna);
    const double d = 150.0;
    REQUIRE(d > communication_range(p, c.radio, true, Occupancy::DriverAndPassenger));
    REQUIRE(d < communication_range(p, c.radio, false));

    const TraceSet t = parked({{0, d, 0, 0}, {1, 0, 0, 0}}, c.duration);
    c.toggles = toggles_of(ChannelVariant::BodyShadowing);
    CHECK(run(c, t).variants.front().received_per_vehicle == std::vector<std::uint64_t>{0, 0});
    c.toggles = toggles_of(ChannelVariant::FreeSpace);
    CHECK(run(c, t).variants.front().received_per_vehicle == std::vector<std::uint64_t>{1000, 1000});
}

TEST_CASE("trace gaps are rejected")
{
    ScenarioConfig c = quiet_pair();
    const TraceSet t = parked({{0, 0, 0, 0}, {1, 0, 10, 0}}, 50.0);
    CHECK_THROWS_AS(run(c, t), DataError);
}

TEST_CASE("statistics invariants on small synthetic scenarios")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ScenarioConfig c = small_scenario(seed);
        const TraceSet t = generate_synthetic(c);
        const SimStats s = run_variants(c, t, kAllVariants);
        const auto total = [&](ChannelVariant v) { return s.variant(v).total_received; };

        CHECK(total(ChannelVariant::Both) <= total(ChannelVariant::VehicleObstruction));
        CHECK(total(ChannelVariant::Both) <= total(ChannelVariant::BodyShadowing));
        CHECK(total(ChannelVariant::VehicleObstruction) <= total(ChannelVariant::FreeSpace));
        CHECK(total(ChannelVariant::BodyShadowing) <= total(ChannelVariant::FreeSpace));

        for (const VariantStats& v : s.variants) {
            std::uint64_t sum = 0;
            for (auto n : v.received_per_vehicle) {
                sum += n;
            }
            CHECK(sum == v.total_received);
            CHECK(v.total_received <= v.candidate_links);
            std::uint64_t hist = 0;
            for (auto n : v.class_histogram) {
                hist += n;
            }
            CHECK(hist == v.candidate_links);
            CHECK(v.average_received_per_vehicle() ==
                  doctest::Approx(static_cast<double>(v.total_received) / c.vehicle_count));
        }

        // a single-variant run matches its entry in the shared pass
        ScenarioConfig one = c;
        one.toggles = toggles_of(ChannelVariant::BodyShadowing);
        const SimStats alone = run(one, t);
        CHECK(alone.variants.front().received_per_vehicle ==
              s.variant(ChannelVariant::BodyShadowing).received_per_vehicle);
        CHECK(alone.variants.front().class_histogram == s.variant(ChannelVariant::BodyShadowing).class_histogram);
    }
}

TEST_CASE("runs are deterministic")
{
    const ScenarioConfig c = small_scenario(11);
    const TraceSet t = generate_synthetic(c);
    const SimStats a = run_variants(c, t, kAllVariants);
    const SimStats b = run_variants(c, t, kAllVariants);
    for (std::size_t i = 0; i < a.variants.size(); ++i) {
        CHECK(a.variants[i].received_per_vehicle == b.variants[i].received_per_vehicle);
        CHECK(a.variants[i].class_histogram == b.variants[i].class_histogram);
        CHECK(a.variants[i].collided == b.variants[i].collided);
    }
}

TEST_CASE("sweep results do not depend on the thread count")
{
    ScenarioConfig base = small_scenario(4);
    base.duration = 4.0;
    const std::vector<double> fractions{0.0, 0.5};
    const std::vector<ChannelVariant> variants{ChannelVariant::FreeSpace, ChannelVariant::Both};
    const auto one = run_sweep(base, fractions, 2, variants, nullptr, 1);
    const auto many = run_sweep(base, fractions, 2, variants, nullptr, 3);
    REQUIRE(one.size() == 2);
    for (std::size_t f = 0; f < one.size(); ++f) {
        CHECK(one[f].car_fraction == fractions[f]);
        REQUIRE(one[f].runs.size() == 2);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(one[f].runs[k].seed == base.seed + k);
            for (std::size_t v = 0; v < variants.size(); ++v) {
                CHECK(one[f].runs[k].variants[v].received_per_vehicle ==
                      many[f].runs[k].variants[v].received_per_vehicle);
            }
        }
    }
}
