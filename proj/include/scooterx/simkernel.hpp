// Event-driven beaconing simulation over a trace: every vehicle broadcasts
// periodically, each candidate link gets a geometric classification and a link
// budget, and a threshold MAC decides receptions.
#pragma once

#include "scooterx/mobility.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace scooterx {

// The four large-scale channel models a run compares.
enum class ChannelVariant : std::uint8_t {
    FreeSpace = 1,           // path loss only
    VehicleObstruction = 2,  // + obstructing vehicles
    BodyShadowing = 3,       // + rider bodies
    Both = 4,
};

inline constexpr std::array<ChannelVariant, 4> kAllVariants = {
    ChannelVariant::FreeSpace, ChannelVariant::VehicleObstruction, ChannelVariant::BodyShadowing,
    ChannelVariant::Both};

ChannelToggles toggles_of(ChannelVariant variant);
ChannelVariant variant_of(ChannelToggles toggles);
ChannelVariant variant_from_number(int number);

struct Beacon {
    VehicleId tx_id = 0;
    double emit_time = 0.0;
    std::size_t size = 0;  // bytes
};

// One transmission as heard at a single receiver.
struct MacEntry {
    VehicleId tx = 0;
    double start = 0.0;
    double end = 0.0;
    double rssi_dbm = 0.0;
    bool own = false;  // the receiver's own transmission (half duplex)
};

// Outcome per entry: received iff rssi >= sensitivity, it is not the
// receiver's own, and no other entry overlapping its airtime reaches the
// carrier-sense threshold.
std::vector<bool> mac_arbitrate(std::span<const MacEntry> concurrent, const RadioParams& radio);

struct VariantStats {
    ChannelVariant variant = ChannelVariant::FreeSpace;
    std::vector<std::uint64_t> received_per_vehicle;  // parallel to SimStats::vehicle_ids
    std::uint64_t total_received = 0;
    std::uint64_t candidate_links = 0;
    std::array<std::uint64_t, 4> class_histogram{};  // indexed by LosClass
    std::uint64_t below_sensitivity = 0;
    std::uint64_t collided = 0;

    double average_received_per_vehicle() const;
};

struct SimStats {
    std::uint64_t seed = 0;
    double car_fraction = 0.0;
    std::vector<VehicleId> vehicle_ids;
    std::vector<VehicleKind> vehicle_kinds;
    std::uint64_t beacons_sent = 0;
    std::vector<VariantStats> variants;

    const VariantStats& variant(ChannelVariant v) const;
};

// Runs the variant selected by scenario.toggles.
SimStats run(const ScenarioConfig& scenario, const TraceSet& trace);

// Runs several variants over one pass; geometry and random draws are shared,
// so each variant's result equals a separate run() with matching toggles.
SimStats run_variants(const ScenarioConfig& scenario, const TraceSet& trace,
                      std::span<const ChannelVariant> variants);

struct SweepResult {
    double car_fraction = 0.0;
    std::vector<SimStats> runs;  // one per seed, ascending
};

// For each car fraction and each of `seed_count` consecutive seeds starting at
// base.seed: a synthetic trace (or `trace` when given) run over `variants`.
// Runs are independent and spread over `threads` workers (0: hardware
// concurrency); the result does not depend on the thread count.
std::vector<SweepResult> run_sweep(const ScenarioConfig& base, std::span<const double> car_fractions,
                                   std::size_t seed_count, std::span<const ChannelVariant> variants,
                                   const TraceSet* trace = nullptr, unsigned threads = 0);

// Beacon schedule: vehicle i emits at phase_i + k / rate with phase_i drawn
// uniformly in [0, 1/rate); ordered by (time, id).
std::vector<Beacon> beacon_schedule(const ScenarioConfig& scenario, std::span<const VehicleId> ids);

// Neighbour search radius: line-of-sight range at the lower of the receive and
// carrier-sense thresholds, with 4 sigma of shadowing headroom, plus margin.
double candidate_radius(const ScenarioConfig& scenario);

}  // namespace scooterx
