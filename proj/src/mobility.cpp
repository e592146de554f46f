#include "scooterx/mobility.hpp"

#include "scooterx/csv.hpp"
#include "scooterx/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace scooterx {

namespace {

constexpr std::uint64_t kStreamKinds = 1;
constexpr std::uint64_t kStreamOccupancy = 2;
constexpr std::uint64_t kStreamSpawn = 3;

double lerp(double a, double b, double f) { return a + (b - a) * f; }

TraceRecord checked(TraceRecord r, const std::string& where)
{
    if (!std::isfinite(r.time) || !std::isfinite(r.x) || !std::isfinite(r.y) ||
        !std::isfinite(r.heading) || !std::isfinite(r.speed)) {
        throw DataError(where + ": non-finite value");
    }
    if (r.speed < 0.0) {
        throw DataError(where + ": negative speed");
    }
    return r;
}

VehicleId parse_id(const std::string& text, const std::string& where)
{
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw DataError(where + ": vehicle id must be a non-negative integer");
    }
    const unsigned long long v = std::stoull(text);
    if (v > 0xFFFFFFFFull) {
        throw DataError(where + ": vehicle id out of range");
    }
    return static_cast<VehicleId>(v);
}

// Appends to per-vehicle series, rejecting time reversals.
class TraceBuilder {
public:
    void add(const TraceRecord& r, const std::string& where)
    {
        auto& series = series_[r.id];
        if (!series.empty() && r.time < series.back().time) {
            throw DataError(fmt::format("{}: timestamp {} precedes {} for vehicle {}", where, r.time,
                                        series.back().time, r.id));
        }
        series.push_back(r);
    }
    std::vector<TraceRecord> flatten() const
    {
        std::vector<TraceRecord> out;
        for (const auto& [id, s] : series_) {
            out.insert(out.end(), s.begin(), s.end());
        }
        return out;
    }
    bool empty() const { return series_.empty(); }

private:
    std::map<VehicleId, std::vector<TraceRecord>> series_;
};

}  // namespace

TraceSet TraceSet::from_records(std::span<const TraceRecord> records)
{
    TraceSet set;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TraceRecord r = checked(records[i], fmt::format("record {}", i));
        auto& series = set.series_[r.id];
        if (!series.empty() && r.time < series.back().time) {
            throw DataError(fmt::format("record {}: out-of-order timestamp for vehicle {}", i, r.id));
        }
        series.push_back(r);
    }
    return set;
}

std::vector<VehicleId> TraceSet::vehicle_ids() const
{
    std::vector<VehicleId> ids;
    ids.reserve(series_.size());
    for (const auto& [id, s] : series_) {
        ids.push_back(id);
    }
    return ids;
}

std::span<const TraceRecord> TraceSet::records(VehicleId id) const
{
    const auto it = series_.find(id);
    if (it == series_.end()) {
        throw InvalidArgument(fmt::format("no trace for vehicle {}", id));
    }
    return it->second;
}

TraceState TraceSet::position_at(VehicleId id, double t) const
{
    const auto s = records(id);
    if (t <= s.front().time) {
        return {Pose(s.front().x, s.front().y, s.front().heading), s.front().speed};
    }
    if (t >= s.back().time) {
        return {Pose(s.back().x, s.back().y, s.back().heading), s.back().speed};
    }
    // first record strictly after t
    const auto hi = std::upper_bound(s.begin(), s.end(), t,
                                     [](double v, const TraceRecord& r) { return v < r.time; });
    const TraceRecord& b = *hi;
    const TraceRecord& a = *(hi - 1);
    const double span = b.time - a.time;
    const double f = span > 0.0 ? (t - a.time) / span : 1.0;
    const double turn = std::remainder(b.heading - a.heading, 2.0 * kPi);
    return {Pose(lerp(a.x, b.x, f), lerp(a.y, b.y, f), a.heading + f * turn), lerp(a.speed, b.speed, f)};
}

void TraceSet::check_coverage(double duration, double max_gap) const
{
    if (series_.empty()) {
        throw DataError("trace is empty");
    }
    for (const auto& [id, s] : series_) {
        if (s.front().time > 0.0 || s.back().time < duration) {
            throw DataError(fmt::format("trace gap: vehicle {} covers [{}, {}], need [0, {}]", id,
                                        s.front().time, s.back().time, duration));
        }
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (s[i].time - s[i - 1].time > max_gap) {
                throw DataError(fmt::format("trace gap: vehicle {} has no record in ({}, {})", id,
                                            s[i - 1].time, s[i].time));
            }
        }
    }
}

std::vector<TraceRecord> TraceSet::all_records() const
{
    std::vector<TraceRecord> out;
    for (const auto& [id, s] : series_) {
        out.insert(out.end(), s.begin(), s.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const TraceRecord& a, const TraceRecord& b) {
        return a.time != b.time ? a.time < b.time : a.id < b.id;
    });
    return out;
}

TraceSet load_trace(std::istream& in, TraceFormat format)
{
    TraceBuilder builder;
    if (format == TraceFormat::Csv) {
        CsvReader reader(in, {"time", "id", "x", "y", "heading", "speed"});
        std::vector<std::string> f;
        while (reader.next(f)) {
            TraceRecord r;
            r.time = reader.number(f[0], "time");
            r.id = parse_id(f[1], reader.where());
            r.x = reader.number(f[2], "x");
            r.y = reader.number(f[3], "y");
            r.heading = reader.number(f[4], "heading");
            r.speed = reader.number(f[5], "speed");
            builder.add(checked(r, reader.where()), reader.where());
        }
    } else {
        std::string text;
        std::size_t line = 0;
        while (std::getline(in, text)) {
            ++line;
            if (trim(text).empty()) {
                continue;
            }
            const std::string where = fmt::format("line {}", line);
            TraceRecord r;
            try {
                const auto j = nlohmann::json::parse(text);
                r.time = j.at("time").get<double>();
                r.id = j.at("id").get<VehicleId>();
                r.x = j.at("x").get<double>();
                r.y = j.at("y").get<double>();
                r.heading = j.at("heading").get<double>();
                r.speed = j.at("speed").get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw DataError(where + ": " + e.what());
            }
            builder.add(checked(r, where), where);
        }
    }
    if (builder.empty()) {
        throw DataError("trace contains no records");
    }
    const auto records = builder.flatten();
    return TraceSet::from_records(records);
}

TraceSet load_trace_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open trace file '" + path + "'");
    }
    const bool jsonl = path.ends_with(".jsonl") || path.ends_with(".ndjson");
    return load_trace(in, jsonl ? TraceFormat::JsonLines : TraceFormat::Csv);
}

void write_trace(const TraceSet& trace, std::ostream& out, TraceFormat format)
{
    if (format == TraceFormat::Csv) {
        out << "time,id,x,y,heading,speed\n";
    }
    for (const TraceRecord& r : trace.all_records()) {
        if (format == TraceFormat::Csv) {
            out << fmt::format("{:.3f},{},{:.4f},{:.4f},{:.6f},{:.4f}\n", r.time, r.id, r.x, r.y,
                               r.heading, r.speed);
        } else {
            out << fmt::format(
                "{{\"time\":{:.3f},\"id\":{},\"x\":{:.4f},\"y\":{:.4f},\"heading\":{:.6f},\"speed\":{:.4f}}}\n",
                r.time, r.id, r.x, r.y, r.heading, r.speed);
        }
    }
}

void TrackLayout::validate() const
{
    if (!(edge_length > 0.0) || lanes < 1 || !(lane_width > 0.0)) {
        throw InvalidArgument("track needs positive edge length and lane width and at least one lane");
    }
    if (static_cast<double>(lanes) * lane_width >= edge_length) {
        throw InvalidArgument("lanes do not fit inside the loop edges");
    }
}

LoopTrack::LoopTrack(const TrackLayout& layout)
{
    layout.validate();
    const double e = layout.edge_length;
    // centre line of the figure-eight route
    const std::vector<Vec2> route = {{e, 0},     {2 * e, 0}, {2 * e, e}, {e, e}, {e, 0},
                                     {0, 0},     {0, e},     {e, e}};
    const std::size_t n = route.size();
    auto unit = [](Vec2 a, Vec2 b) {
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        return Vec2{(b.x - a.x) / len, (b.y - a.y) / len};
    };
    for (std::size_t k = 0; k < layout.lanes; ++k) {
        const double offset =
            (static_cast<double>(k) - static_cast<double>(layout.lanes - 1) / 2.0) * layout.lane_width;
        Lane lane;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 prev = route[(i + n - 1) % n];
            const Vec2 cur = route[i];
            const Vec2 next = route[(i + 1) % n];
            const Vec2 d_in = unit(prev, cur);
            const Vec2 d_out = unit(cur, next);
            const Vec2 n_in{-d_in.y, d_in.x};
            const Vec2 n_out{-d_out.y, d_out.x};
            // mitre join of the two offset segments
            const double denom = 1.0 + n_in.x * n_out.x + n_in.y * n_out.y;
            lane.vertices.push_back({cur.x + offset * (n_in.x + n_out.x) / denom,
                                     cur.y + offset * (n_in.y + n_out.y) / denom});
        }
        lane.vertices.push_back(lane.vertices.front());
        lane.cumulative.push_back(0.0);
        for (std::size_t i = 1; i < lane.vertices.size(); ++i) {
            const Vec2 a = lane.vertices[i - 1];
            const Vec2 b = lane.vertices[i];
            lane.cumulative.push_back(lane.cumulative.back() + std::hypot(b.x - a.x, b.y - a.y));
        }
        lanes_.push_back(std::move(lane));
    }
}

std::size_t LoopTrack::segment_of(const Lane& lane, double arc) const
{
    const auto it = std::upper_bound(lane.cumulative.begin(), lane.cumulative.end(), arc);
    const auto idx = static_cast<std::size_t>(it - lane.cumulative.begin());
    return std::min(idx == 0 ? 0 : idx - 1, lane.vertices.size() - 2);
}

Pose LoopTrack::pose_at(std::size_t lane_index, double arc) const
{
    const Lane& lane = lanes_.at(lane_index);
    const double length = lane.cumulative.back();
    double s = std::fmod(arc, length);
    if (s < 0.0) {
        s += length;
    }
    const std::size_t seg = segment_of(lane, s);
    const Vec2 a = lane.vertices[seg];
    const Vec2 b = lane.vertices[seg + 1];
    const double seg_len = lane.cumulative[seg + 1] - lane.cumulative[seg];
    const double f = (s - lane.cumulative[seg]) / seg_len;
    return Pose(lerp(a.x, b.x, f), lerp(a.y, b.y, f), std::atan2(b.y - a.y, b.x - a.x));
}

double LoopTrack::distance_to_next_corner(std::size_t lane_index, double arc) const
{
    const Lane& lane = lanes_.at(lane_index);
    const double length = lane.cumulative.back();
    double s = std::fmod(arc, length);
    if (s < 0.0) {
        s += length;
    }
    return lane.cumulative[segment_of(lane, s) + 1] - s;
}

VehicleDynamics scooter_dynamics() { return {60.0 / 3.6, 8.0, 4.0}; }
VehicleDynamics car_dynamics() { return {97.0 / 3.6, 7.0, 5.0}; }

void ScenarioConfig::validate() const
{
    if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
    if (!(car_fraction >= 0.0 && car_fraction <= 1.0)) throw InvalidArgument("car_fraction must lie in [0, 1]");
    if (!(sample_interval > 0.0)) throw InvalidArgument("sample_interval must be positive");
    if (!(headway > 0.0) || !(min_gap >= 0.0) || !(corner_speed > 0.0)) {
        throw InvalidArgument("headway, corner speed must be positive; min gap non-negative");
    }
    for (const VehicleDynamics* d : {&scooter, &car}) {
        if (!(d->max_speed > 0.0) || !(d->max_accel > 0.0) || !(d->max_decel > 0.0)) {
            throw InvalidArgument("vehicle dynamics must be positive");
        }
    }
    if (!(passenger_probability >= 0.0 && passenger_probability <= 1.0)) {
        throw InvalidArgument("passenger_probability must lie in [0, 1]");
    }
    if (scooter_antenna == AntennaLocation::CarRoof) {
        throw InvalidArgument("car_roof is not a scooter antenna location");
    }
    if (!(beacon_rate_hz > 0.0) || beacon_bytes == 0 || !(data_rate_bps > 0.0)) {
        throw InvalidArgument("beacon rate, size and data rate must be positive");
    }
    if (!(candidate_margin >= 0.0) || !(max_trace_gap > 0.0)) {
        throw InvalidArgument("candidate margin and trace gap must be non-negative/positive");
    }
    topology.validate();
    radio.validate();
    vehicle_model.validate();
    for (const auto& [loc, p] : params) {
        p.validate();
    }
}

PathLossParams ScenarioConfig::params_for(AntennaLocation location) const
{
    const auto it = params.find(location);
    return it != params.end() ? it->second : default_params(location);
}

std::map<VehicleId, VehicleKind> assign_kinds(const ScenarioConfig& config,
                                              std::span<const VehicleId> ids)
{
    std::vector<VehicleId> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end());
    Rng rng = make_rng(config.seed, kStreamKinds);
    std::shuffle(order.begin(), order.end(), rng);
    const auto cars = static_cast<std::size_t>(
        std::llround(config.car_fraction * static_cast<double>(order.size())));
    std::map<VehicleId, VehicleKind> kinds;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto it = config.kinds.find(order[i]);
        if (it != config.kinds.end()) {
            kinds[order[i]] = it->second;
        } else {
            kinds[order[i]] = i < cars ? VehicleKind::Car : VehicleKind::Scooter;
        }
    }
    return kinds;
}

std::map<VehicleId, Occupancy> assign_occupancy(const ScenarioConfig& config,
                                                const std::map<VehicleId, VehicleKind>& kinds)
{
    Rng rng = make_rng(config.seed, kStreamOccupancy);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::map<VehicleId, Occupancy> out;
    for (const auto& [id, kind] : kinds) {
        // draw for every vehicle so a scooter's rider does not depend on the mix
        const double draw = u(rng);
        if (kind == VehicleKind::Car) {
            out[id] = Occupancy::Empty;
        } else {
            out[id] = draw < config.passenger_probability ? Occupancy::DriverAndPassenger
                                                          : Occupancy::Driver;
        }
    }
    return out;
}

namespace {

struct SlotInfo {
    double slot = 0.0;
    std::vector<std::size_t> capacity;
};

SlotInfo lane_slots(const ScenarioConfig& config, const LoopTrack& track)
{
    SlotInfo info;
    info.slot = std::max(VehicleProfile::car().length, VehicleProfile::scooter().length) + config.min_gap;
    for (std::size_t k = 0; k < track.lanes(); ++k) {
        info.capacity.push_back(static_cast<std::size_t>(std::floor(track.lane_length(k) / info.slot)));
    }
    return info;
}

}  // namespace

std::size_t track_capacity(const ScenarioConfig& config)
{
    const LoopTrack track(config.topology);
    const SlotInfo info = lane_slots(config, track);
    return std::accumulate(info.capacity.begin(), info.capacity.end(), std::size_t{0});
}

TraceSet generate_synthetic(const ScenarioConfig& config)
{
    config.validate();
    const LoopTrack track(config.topology);
    const SlotInfo slots = lane_slots(config, track);
    const std::size_t capacity =
        std::accumulate(slots.capacity.begin(), slots.capacity.end(), std::size_t{0});
    if (config.vehicle_count > capacity) {
        throw InvalidArgument(fmt::format("{} vehicles exceed track capacity {}", config.vehicle_count, capacity));
    }

    std::vector<VehicleId> ids(config.vehicle_count);
    std::iota(ids.begin(), ids.end(), VehicleId{0});
    const auto kinds = assign_kinds(config, ids);

    struct Agent {
        VehicleId id;
        std::size_t lane;
        double arc;
        double speed;
        double length;
        VehicleDynamics dyn;
    };
    std::vector<Agent> agents;
    Rng rng = make_rng(config.seed, kStreamSpawn);

    // uniform lane choice among lanes that still have room
    std::vector<std::vector<VehicleId>> per_lane(track.lanes());
    for (VehicleId id : ids) {
        std::vector<std::size_t> open;
        for (std::size_t k = 0; k < track.lanes(); ++k) {
            if (per_lane[k].size() < slots.capacity[k]) {
                open.push_back(k);
            }
        }
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        per_lane[open[pick(rng)]].push_back(id);
    }
    for (std::size_t k = 0; k < track.lanes(); ++k) {
        const auto& members = per_lane[k];
        if (members.empty()) {
            continue;
        }
        const double length = track.lane_length(k);
        const double spacing = length / static_cast<double>(members.size());
        std::uniform_real_distribution<double> phase_dist(0.0, length);
        const double phase = phase_dist(rng);
        for (std::size_t j = 0; j < members.size(); ++j) {
            const VehicleKind kind = kinds.at(members[j]);
            const bool car = kind == VehicleKind::Car;
            agents.push_back({members[j], k, std::fmod(phase + static_cast<double>(j) * spacing, length), 0.0,
                              car ? VehicleProfile::car().length : VehicleProfile::scooter().length,
                              car ? config.car : config.scooter});
        }
    }
    std::sort(agents.begin(), agents.end(), [](const Agent& a, const Agent& b) { return a.id < b.id; });

    const auto steps = static_cast<std::size_t>(std::llround(config.duration / config.sample_interval));
    const double dt = config.sample_interval;
    std::vector<TraceRecord> records;
    records.reserve((steps + 1) * agents.size());
    std::vector<double> next_speed(agents.size());

    for (std::size_t step = 0; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        for (const Agent& a : agents) {
            const Pose p = track.pose_at(a.lane, a.arc);
            records.push_back({t, a.id, p.x(), p.y(), p.heading(), a.speed});
        }
        if (step == steps) {
            break;
        }
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const Agent& self = agents[i];
            const double lane_len = track.lane_length(self.lane);
            // nearest vehicle ahead in the same lane
            double gap = std::numeric_limits<double>::infinity();
            for (const Agent& other : agents) {
                if (other.id == self.id || other.lane != self.lane) {
                    continue;
                }
                double ahead = std::fmod(other.arc - self.arc, lane_len);
                if (ahead <= 0.0) {
                    ahead += lane_len;
                }
                gap = std::min(gap, ahead - (other.length + self.length) / 2.0);
            }
            double target = self.dyn.max_speed;
            if (std::isfinite(gap)) {
                const double room = std::max(0.0, gap - config.min_gap);
                target = std::min({target, room / config.headway, std::sqrt(2.0 * self.dyn.max_decel * room)});
            }
            const double to_corner = track.distance_to_next_corner(self.lane, self.arc);
            target = std::min(target, std::sqrt(config.corner_speed * config.corner_speed +
                                                2.0 * self.dyn.max_decel * to_corner));
            const double accel = std::clamp((target - self.speed) / dt, -self.dyn.max_decel, self.dyn.max_accel);
            next_speed[i] = std::max(0.0, self.speed + accel * dt);
        }
        for (std::size_t i = 0; i < agents.size(); ++i) {
            Agent& a = agents[i];
            a.arc = std::fmod(a.arc + 0.5 * (a.speed + next_speed[i]) * dt, track.lane_length(a.lane));
            a.speed = next_speed[i];
        }
    }
    return TraceSet::from_records(records);
}

}  // namespace scooterx
