#include "scooterx/simkernel.hpp"

#include "scooterx/error.hpp"
#include "scooterx/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace scooterx {

namespace {

constexpr std::uint64_t kStreamPhase = 4;
constexpr std::uint64_t kStreamShadowing = 5;

// One receiver's view of a beacon under every requested variant.
struct RxResult {
    std::size_t rx = 0;  // vehicle index
    std::vector<double> rssi;  // per requested variant
    std::vector<LosClass> cls;
};

struct BeaconResult {
    std::size_t tx = 0;
    double start = 0.0;
    double end = 0.0;
    std::vector<RxResult> links;  // ascending rx

    const RxResult* find(std::size_t rx) const
    {
        auto it = std::lower_bound(links.begin(), links.end(), rx,
                                   [](const RxResult& r, std::size_t v) { return r.rx < v; });
        return it != links.end() && it->rx == rx ? &*it : nullptr;
    }
};

LosClassification filtered(const LosClassification& full, ChannelToggles toggles)
{
    LosClassification out = full;
    if (!toggles.body_shadowing) {
        out.blocking_body_count = 0;
        out.blocking_bodies.clear();
    }
    if (!toggles.vehicle_obstruction) {
        out.obstructing_vehicle_ids.clear();
    }
    const bool body = out.blocking_body_count > 0;
    const bool vehicle = !out.obstructing_vehicle_ids.empty();
    out.cls = body && vehicle ? LosClass::BodyAndVehicle
              : body          ? LosClass::BodyShadowed
              : vehicle       ? LosClass::VehicleObstructed
                              : LosClass::Los;
    return out;
}

double los_range(const RadioParams& radio, const PathLossParams& params, double threshold_dbm,
                 double headroom_db)
{
    const double margin = mean_rssi_dbm(radio, params, 1.0) - threshold_dbm + headroom_db;
    if (margin <= 0.0) {
        return kMinLinkDistance;
    }
    return std::pow(10.0, margin / (10.0 * params.gamma));
}

}  // namespace

ChannelToggles toggles_of(ChannelVariant variant)
{
    switch (variant) {
    case ChannelVariant::FreeSpace: return {false, false};
    case ChannelVariant::VehicleObstruction: return {false, true};
    case ChannelVariant::BodyShadowing: return {true, false};
    case ChannelVariant::Both: return {true, true};
    }
    throw InvalidArgument("unknown channel variant");
}

ChannelVariant variant_of(ChannelToggles toggles)
{
    if (toggles.body_shadowing) {
        return toggles.vehicle_obstruction ? ChannelVariant::Both : ChannelVariant::BodyShadowing;
    }
    return toggles.vehicle_obstruction ? ChannelVariant::VehicleObstruction
                                       : ChannelVariant::FreeSpace;
}

ChannelVariant variant_from_number(int number)
{
    if (number < 1 || number > 4) {
        throw InvalidArgument("channel variant must be 1..4");
    }
    return static_cast<ChannelVariant>(number);
}

std::vector<bool> mac_arbitrate(std::span<const MacEntry> concurrent, const RadioParams& radio)
{
    std::vector<bool> out(concurrent.size(), false);
    for (std::size_t i = 0; i < concurrent.size(); ++i) {
        const MacEntry& e = concurrent[i];
        if (e.own || e.rssi_dbm < radio.rx_sensitivity_dbm) {
            continue;
        }
        bool clear = true;
        for (std::size_t j = 0; j < concurrent.size() && clear; ++j) {
            if (j == i) {
                continue;
            }
            const MacEntry& o = concurrent[j];
            const bool overlap = o.start < e.end && e.start < o.end;
            if (overlap && (o.own || o.rssi_dbm >= radio.carrier_sense_dbm)) {
                clear = false;
            }
        }
        out[i] = clear;
    }
    return out;
}

double VariantStats::average_received_per_vehicle() const
{
    if (received_per_vehicle.empty()) {
        return 0.0;
    }
    return static_cast<double>(total_received) / static_cast<double>(received_per_vehicle.size());
}

const VariantStats& SimStats::variant(ChannelVariant v) const
{
    for (const auto& s : variants) {
        if (s.variant == v) {
            return s;
        }
    }
    throw InvalidArgument("variant not part of this run");
}

std::vector<Beacon> beacon_schedule(const ScenarioConfig& scenario, std::span<const VehicleId> ids)
{
    const double period = 1.0 / scenario.beacon_rate_hz;
    const auto per_vehicle =
        static_cast<std::size_t>(std::floor(scenario.duration * scenario.beacon_rate_hz + 1e-9));
    std::vector<VehicleId> sorted(ids.begin(), ids.end());
    std::sort(sorted.begin(), sorted.end());
    Rng rng = make_rng(scenario.seed, kStreamPhase);
    std::uniform_real_distribution<double> phase(0.0, period);

    std::vector<Beacon> out;
    out.reserve(sorted.size() * per_vehicle);
    for (VehicleId id : sorted) {
        const double p = phase(rng);
        for (std::size_t k = 0; k < per_vehicle; ++k) {
            out.push_back({id, p + static_cast<double>(k) * period, scenario.beacon_bytes});
        }
    }
    std::sort(out.begin(), out.end(), [](const Beacon& a, const Beacon& b) {
        return a.emit_time != b.emit_time ? a.emit_time < b.emit_time : a.tx_id < b.tx_id;
    });
    return out;
}

double candidate_radius(const ScenarioConfig& scenario)
{
    const RadioParams& radio = scenario.radio;
    const double threshold = std::min(radio.rx_sensitivity_dbm, radio.carrier_sense_dbm);
    double range = kMinLinkDistance;
    for (AntennaLocation loc : {scenario.scooter_antenna, scenario.car_antenna}) {
        const PathLossParams p = scenario.params_for(loc);
        const double headroom = scenario.random_shadowing ? 4.0 * p.shadow_sigma_db : 0.0;
        range = std::max(range, los_range(radio, p, threshold, headroom));
    }
    return range + scenario.candidate_margin;
}

SimStats run(const ScenarioConfig& scenario, const TraceSet& trace)
{
    const ChannelVariant v = variant_of(scenario.toggles);
    return run_variants(scenario, trace, std::span<const ChannelVariant>(&v, 1));
}

SimStats run_variants(const ScenarioConfig& scenario, const TraceSet& trace,
                      std::span<const ChannelVariant> variants)
{
    scenario.validate();
    if (variants.empty()) {
        throw InvalidArgument("no channel variants requested");
    }
    if (trace.empty()) {
        throw DataError("trace contains no vehicles");
    }
    trace.check_coverage(scenario.duration, scenario.max_trace_gap);

    const std::vector<VehicleId> ids = trace.vehicle_ids();
    const auto kinds = assign_kinds(scenario, ids);
    const auto occupancy = assign_occupancy(scenario, kinds);

    const auto car_profile = std::make_shared<const VehicleProfile>(VehicleProfile::car());
    std::map<Occupancy, std::shared_ptr<const VehicleProfile>> scooter_profiles;
    for (Occupancy o : {Occupancy::Driver, Occupancy::DriverAndPassenger}) {
        scooter_profiles[o] = std::make_shared<const VehicleProfile>(VehicleProfile::scooter(o));
    }

    const std::size_t n = ids.size();
    std::vector<PlacedVehicle> vehicles(n);
    std::map<VehicleId, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) {
        vehicles[i].id = ids[i];
        const bool car = kinds.at(ids[i]) == VehicleKind::Car;
        vehicles[i].profile = car ? car_profile : scooter_profiles.at(occupancy.at(ids[i]));
        index_of[ids[i]] = i;
    }

    const PathLossParams scooter_params = scenario.params_for(scenario.scooter_antenna);
    const PathLossParams car_params = scenario.params_for(scenario.car_antenna);
    // a link with a scooter on either end uses the scooter mount's fit
    auto link_params = [&](std::size_t tx, std::size_t rx) -> const PathLossParams& {
        if (vehicles[tx].profile->kind == VehicleKind::Scooter ||
            vehicles[rx].profile->kind == VehicleKind::Scooter) {
            return scooter_params;
        }
        return car_params;
    };

    std::vector<ChannelToggles> toggles;
    bool need_body = false;
    bool need_vehicle = false;
    for (ChannelVariant v : variants) {
        toggles.push_back(toggles_of(v));
        need_body = need_body || toggles.back().body_shadowing;
        need_vehicle = need_vehicle || toggles.back().vehicle_obstruction;
    }
    const ClassifyOptions options{need_body, need_vehicle};

    SimStats stats;
    stats.seed = scenario.seed;
    stats.car_fraction = scenario.car_fraction;
    stats.vehicle_ids = ids;
    for (VehicleId id : ids) {
        stats.vehicle_kinds.push_back(kinds.at(id));
    }
    for (ChannelVariant v : variants) {
        VariantStats vs;
        vs.variant = v;
        vs.received_per_vehicle.assign(n, 0);
        stats.variants.push_back(std::move(vs));
    }

    const std::vector<Beacon> beacons = beacon_schedule(scenario, ids);
    stats.beacons_sent = beacons.size();
    const double airtime =
        static_cast<double>(scenario.beacon_bytes) * 8.0 / scenario.data_rate_bps;
    const double radius = candidate_radius(scenario);
    const RadioParams& radio = scenario.radio;

    Rng shadow_rng = make_rng(scenario.seed, kStreamShadowing);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    GridIndex grid(radius);
    std::vector<Vec2> positions(n);

    auto evaluate = [&](const Beacon& b) {
        for (std::size_t i = 0; i < n; ++i) {
            vehicles[i].pose = trace.position_at(vehicles[i].id, b.emit_time).pose;
            positions[i] = vehicles[i].antenna_position(0);
        }
        grid.rebuild(positions);
        BeaconResult r;
        r.tx = index_of.at(b.tx_id);
        r.start = b.emit_time;
        r.end = b.emit_time + airtime;
        const PlacedVehicle& tx = vehicles[r.tx];
        for (std::size_t rx : grid.query(positions[r.tx], radius)) {
            if (rx == r.tx) {
                continue;
            }
            const PlacedVehicle& rv = vehicles[rx];
            const LosClassification full =
                classify_link(LinkEnd{tx, 0}, LinkEnd{rv, 0}, vehicles, options);
            const PathLossParams& params = link_params(r.tx, rx);
            const double d = std::max(
                std::hypot(positions[rx].x - positions[r.tx].x, positions[rx].y - positions[r.tx].y),
                kMinLinkDistance);
            // one draw per (beacon, receiver), shared by every variant
            const double z = scenario.random_shadowing ? unit_normal(shadow_rng) : 0.0;
            RxResult rr;
            rr.rx = rx;
            for (const ChannelToggles& t : toggles) {
                const LosClassification c = filtered(full, t);
                const LinkSample s = evaluate_link_with_offset(
                    radio, params, c, d, z * params.shadow_sigma_db, scenario.vehicle_model);
                rr.rssi.push_back(s.rssi_dbm);
                rr.cls.push_back(c.cls);
            }
            r.links.push_back(std::move(rr));
        }
        return r;
    };

    std::deque<BeaconResult> window;  // beacons [window_base, window_base + size)
    std::size_t window_base = 0;
    std::size_t next = 0;
    std::vector<MacEntry> entries;
    for (std::size_t b = 0; b < beacons.size(); ++b) {
        // everything that can overlap beacon b must be evaluated
        while (next < beacons.size() && beacons[next].emit_time < beacons[b].emit_time + airtime) {
            window.push_back(evaluate(beacons[next]));
            ++next;
        }
        while (window_base < b && window.front().end <= beacons[b].emit_time) {
            window.pop_front();
            ++window_base;
        }
        const BeaconResult& cur = window[b - window_base];
        std::vector<const BeaconResult*> overlapping;
        for (const BeaconResult& o : window) {
            if (&o != &cur && o.start < cur.end && cur.start < o.end) {
                overlapping.push_back(&o);
            }
        }
        for (const RxResult& link : cur.links) {
            for (std::size_t v = 0; v < toggles.size(); ++v) {
                VariantStats& vs = stats.variants[v];
                ++vs.candidate_links;
                ++vs.class_histogram[static_cast<std::size_t>(link.cls[v])];
                if (link.rssi[v] < radio.rx_sensitivity_dbm) {
                    ++vs.below_sensitivity;
                    continue;
                }
                bool ok = true;
                if (!overlapping.empty()) {
                    entries.clear();
                    entries.push_back({vehicles[cur.tx].id, cur.start, cur.end, link.rssi[v], false});
                    for (const BeaconResult* o : overlapping) {
                        const bool own = o->tx == link.rx;
                        const RxResult* heard = own ? nullptr : o->find(link.rx);
                        const double rssi = heard ? heard->rssi[v]
                                                  : -std::numeric_limits<double>::infinity();
                        entries.push_back({vehicles[o->tx].id, o->start, o->end, rssi, own});
                    }
                    ok = mac_arbitrate(entries, radio)[0];
                }
                if (ok) {
                    ++vs.received_per_vehicle[link.rx];
                    ++vs.total_received;
                } else {
                    ++vs.collided;
                }
            }
        }
    }
    return stats;
}

std::vector<SweepResult> run_sweep(const ScenarioConfig& base, std::span<const double> car_fractions,
                                   std::size_t seed_count, std::span<const ChannelVariant> variants,
                                   const TraceSet* trace, unsigned threads)
{
    if (seed_count == 0) {
        throw InvalidArgument("sweep needs at least one seed");
    }
    std::vector<SweepResult> out(car_fractions.size());
    std::vector<ScenarioConfig> jobs;
    for (std::size_t i = 0; i < car_fractions.size(); ++i) {
        out[i].car_fraction = car_fractions[i];
        out[i].runs.resize(seed_count);
        for (std::size_t k = 0; k < seed_count; ++k) {
            ScenarioConfig c = base;
            c.car_fraction = car_fractions[i];
            c.seed = base.seed + k;
            c.validate();
            jobs.push_back(std::move(c));
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const ScenarioConfig& c = jobs[j];
                SimStats s = trace != nullptr ? run_variants(c, *trace, variants)
                                              : run_variants(c, generate_synthetic(c), variants);
                out[j / seed_count].runs[j % seed_count] = std::move(s);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = jobs.size();
            }
        }
    };
    unsigned workers = threads != 0 ? threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

}  // namespace scooterx
