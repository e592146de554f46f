#include "scooterx/config.hpp"

#include "scooterx/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <ostream>

namespace scooterx {

namespace {

bool same_kind(const Json& a, const Json& b)
{
    if (a.is_number() && b.is_number()) {
        return true;
    }
    return a.type() == b.type();
}

void merge_at(Json& base, const Json& patch, const std::string& path)
{
    if (!patch.is_object()) {
        throw InvalidArgument(fmt::format("'{}' must be an object", path.empty() ? "<root>" : path));
    }
    const bool free_form = base.empty();
    for (const auto& [key, value] : patch.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) {
            if (!free_form) {
                throw InvalidArgument(fmt::format("unknown key '{}'", where));
            }
            base[key] = value;
            continue;
        }
        Json& slot = base[key];
        if (slot.is_object()) {
            if (!value.is_object()) {
                throw InvalidArgument(fmt::format("'{}' must be an object", where));
            }
            merge_at(slot, value, where);
        } else if (!same_kind(slot, value)) {
            throw InvalidArgument(fmt::format("'{}' expects a {} value", where, slot.type_name()));
        } else {
            slot = value;
        }
    }
}

template <typename T>
T read(const Json& obj, const char* key)
{
    return obj.at(key).get<T>();
}

std::size_t read_count(const Json& obj, const char* key)
{
    const double v = obj.at(key).get<double>();
    if (!(v >= 0.0) || v != std::floor(v)) {
        throw InvalidArgument(fmt::format("'{}' must be a non-negative integer", key));
    }
    return static_cast<std::size_t>(v);
}

RadioParams radio_from_json(const Json& j)
{
    RadioParams r;
    r.tx_power_dbm = read<double>(j, "tx_power_dbm");
    r.antenna_gain_dbi = read<double>(j, "antenna_gain_dbi");
    r.rx_sensitivity_dbm = read<double>(j, "rx_sensitivity_dbm");
    r.carrier_sense_dbm = read<double>(j, "carrier_sense_dbm");
    r.frequency_hz = read<double>(j, "frequency_hz");
    r.cable_loss_db = read<double>(j, "cable_loss_db");
    r.validate();
    return r;
}

PathLossParams params_from_json(const Json& j)
{
    PathLossParams p;
    p.gamma = read<double>(j, "gamma");
    p.intercept_db = read<double>(j, "intercept_db");
    p.driver_loss_db = read<double>(j, "driver_loss_db");
    p.passenger_extra_loss_db = read<double>(j, "passenger_extra_loss_db");
    p.shadow_sigma_db = read<double>(j, "shadow_sigma_db");
    p.validate();
    return p;
}

Json params_table(const std::map<AntennaLocation, PathLossParams>& overrides)
{
    Json out = Json::object();
    auto lookup = [&](AntennaLocation loc) {
        const auto it = overrides.find(loc);
        return it != overrides.end() ? it->second : default_params(loc);
    };
    for (AntennaLocation loc : kScooterAntennaLocations) {
        out[std::string(to_string(loc))] = to_json(lookup(loc));
    }
    out[std::string(to_string(AntennaLocation::CarRoof))] = to_json(lookup(AntennaLocation::CarRoof));
    return out;
}

std::map<AntennaLocation, PathLossParams> params_table_from_json(const Json& j)
{
    std::map<AntennaLocation, PathLossParams> out;
    for (const auto& [name, value] : j.items()) {
        out[antenna_location_from_string(name)] = params_from_json(value);
    }
    return out;
}

Json dynamics_json(const VehicleDynamics& d)
{
    return Json{{"max_speed", d.max_speed}, {"max_accel", d.max_accel}, {"max_decel", d.max_decel}};
}

VehicleDynamics dynamics_from_json(const Json& j)
{
    return {read<double>(j, "max_speed"), read<double>(j, "max_accel"), read<double>(j, "max_decel")};
}

Json vehicle_loss_json(const VehicleLossModel& m)
{
    return Json{{"per_vehicle_db", m.per_vehicle_db}, {"max_db", m.max_db}};
}

VehicleLossModel vehicle_loss_from_json(const Json& j)
{
    VehicleLossModel m{read<double>(j, "per_vehicle_db"), read<double>(j, "max_db")};
    m.validate();
    return m;
}

Json merged(Json defaults, const Json& file_doc, std::span<const std::string> overrides)
{
    if (!file_doc.is_null()) {
        merge_strict(defaults, file_doc);
    }
    for (const std::string& o : overrides) {
        apply_override(defaults, o);
    }
    return defaults;
}

}  // namespace

void merge_strict(Json& base, const Json& patch)
{
    merge_at(base, patch, "");
}

void apply_override(Json& doc, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw InvalidArgument(fmt::format("override '{}' is not key=value", assignment));
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    // build the nested patch {"a": {"b": value}} and merge it strictly
    Json patch = value;
    std::string rest = key;
    while (!rest.empty()) {
        const auto dot = rest.rfind('.');
        const std::string leaf = dot == std::string::npos ? rest : rest.substr(dot + 1);
        if (leaf.empty()) {
            throw InvalidArgument(fmt::format("override key '{}' is malformed", key));
        }
        Json wrap = Json::object();
        wrap[leaf] = std::move(patch);
        patch = std::move(wrap);
        rest = dot == std::string::npos ? std::string() : rest.substr(0, dot);
    }
    merge_strict(doc, patch);
}

Json to_json(const RadioParams& r)
{
    return Json{{"tx_power_dbm", r.tx_power_dbm},           {"antenna_gain_dbi", r.antenna_gain_dbi},
                {"rx_sensitivity_dbm", r.rx_sensitivity_dbm}, {"carrier_sense_dbm", r.carrier_sense_dbm},
                {"frequency_hz", r.frequency_hz},           {"cable_loss_db", r.cable_loss_db}};
}

Json to_json(const PathLossParams& p)
{
    return Json{{"gamma", p.gamma},
                {"intercept_db", p.intercept_db},
                {"driver_loss_db", p.driver_loss_db},
                {"passenger_extra_loss_db", p.passenger_extra_loss_db},
                {"shadow_sigma_db", p.shadow_sigma_db}};
}

Json to_json(const ScenarioConfig& s)
{
    Json kinds = Json::object();
    for (const auto& [id, kind] : s.kinds) {
        kinds[std::to_string(id)] = std::string(to_string(kind));
    }
    Json j;
    j["duration"] = s.duration;
    j["vehicle_count"] = s.vehicle_count;
    j["car_fraction"] = s.car_fraction;
    j["seed"] = s.seed;
    j["topology"] = Json{{"edge_length", s.topology.edge_length},
                         {"lanes", s.topology.lanes},
                         {"lane_width", s.topology.lane_width}};
    j["radio"] = to_json(s.radio);
    j["toggles"] = Json{{"body_shadowing", s.toggles.body_shadowing},
                        {"vehicle_obstruction", s.toggles.vehicle_obstruction}};
    j["mobility"] = Json{{"sample_interval", s.sample_interval},
                         {"headway", s.headway},
                         {"min_gap", s.min_gap},
                         {"corner_speed", s.corner_speed},
                         {"scooter", dynamics_json(s.scooter)},
                         {"car", dynamics_json(s.car)}};
    j["passenger_probability"] = s.passenger_probability;
    j["scooter_antenna"] = std::string(to_string(s.scooter_antenna));
    j["car_antenna"] = std::string(to_string(s.car_antenna));
    j["params"] = params_table(s.params);
    j["vehicle_loss"] = vehicle_loss_json(s.vehicle_model);
    j["random_shadowing"] = s.random_shadowing;
    j["beacon"] = Json{{"rate_hz", s.beacon_rate_hz},
                       {"bytes", s.beacon_bytes},
                       {"data_rate_bps", s.data_rate_bps}};
    j["candidate_margin"] = s.candidate_margin;
    j["max_trace_gap"] = s.max_trace_gap;
    j["kinds"] = kinds;
    return j;
}

ScenarioConfig scenario_from_json(const Json& j)
{
    ScenarioConfig s;
    s.duration = read<double>(j, "duration");
    s.vehicle_count = read_count(j, "vehicle_count");
    s.car_fraction = read<double>(j, "car_fraction");
    s.seed = read_count(j, "seed");
    const Json& topo = j.at("topology");
    s.topology = {read<double>(topo, "edge_length"), read_count(topo, "lanes"),
                  read<double>(topo, "lane_width")};
    s.radio = radio_from_json(j.at("radio"));
    s.toggles = {read<bool>(j.at("toggles"), "body_shadowing"),
                 read<bool>(j.at("toggles"), "vehicle_obstruction")};
    const Json& mob = j.at("mobility");
    s.sample_interval = read<double>(mob, "sample_interval");
    s.headway = read<double>(mob, "headway");
    s.min_gap = read<double>(mob, "min_gap");
    s.corner_speed = read<double>(mob, "corner_speed");
    s.scooter = dynamics_from_json(mob.at("scooter"));
    s.car = dynamics_from_json(mob.at("car"));
    s.passenger_probability = read<double>(j, "passenger_probability");
    s.scooter_antenna = antenna_location_from_string(read<std::string>(j, "scooter_antenna"));
    s.car_antenna = antenna_location_from_string(read<std::string>(j, "car_antenna"));
    s.params = params_table_from_json(j.at("params"));
    s.vehicle_model = vehicle_loss_from_json(j.at("vehicle_loss"));
    s.random_shadowing = read<bool>(j, "random_shadowing");
    const Json& beacon = j.at("beacon");
    s.beacon_rate_hz = read<double>(beacon, "rate_hz");
    s.beacon_bytes = read_count(beacon, "bytes");
    s.data_rate_bps = read<double>(beacon, "data_rate_bps");
    s.candidate_margin = read<double>(j, "candidate_margin");
    s.max_trace_gap = read<double>(j, "max_trace_gap");
    for (const auto& [id, kind] : j.at("kinds").items()) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(id.c_str(), &end, 10);
        if (id.empty() || *end != '\0') {
            throw InvalidArgument(fmt::format("kinds: '{}' is not a vehicle id", id));
        }
        s.kinds[static_cast<VehicleId>(v)] = vehicle_kind_from_string(kind.get<std::string>());
    }
    s.validate();
    return s;
}

ScenarioConfig load_scenario(const Json& file_doc, std::span<const std::string> overrides)
{
    return scenario_from_json(merged(to_json(ScenarioConfig{}), file_doc, overrides));
}

CoverageRequest CoverageConfig::request() const
{
    CoverageRequest req;
    req.tx_profile = VehicleProfile::scooter(occupancy);
    req.tx_pose = Pose(0.0, 0.0, heading_deg * kPi / 180.0);
    switch (mode) {
    case AntennaMode::Single: req.antennas = AntennaConfig::single(req.tx_profile, location); break;
    case AntennaMode::DualFront:
        req.antennas = AntennaConfig::dual_front(req.tx_profile, location);
        break;
    case AntennaMode::FrontAndBack:
        req.antennas = AntennaConfig::front_and_back(req.tx_profile, location, rear_cable_loss_db);
        break;
    }
    req.strip_length = strip_length;
    req.strip_width = strip_width;
    req.spacing = spacing;
    req.rx_antenna_height = rx_antenna_height;
    req.radio = radio;
    req.params = params;
    req.vehicle_model = vehicle_model;
    return req;
}

Json to_json(const CoverageConfig& c)
{
    Json j;
    j["mode"] = std::string(to_string(c.mode));
    j["location"] = std::string(to_string(c.location));
    j["occupancy"] = std::string(to_string(c.occupancy));
    j["heading_deg"] = c.heading_deg;
    j["strip_length"] = c.strip_length;
    j["strip_width"] = c.strip_width;
    j["spacing"] = c.spacing;
    j["rx_antenna_height"] = c.rx_antenna_height;
    j["rear_cable_loss_db"] = c.rear_cable_loss_db;
    j["radio"] = to_json(c.radio);
    j["params"] = params_table(c.params);
    j["vehicle_loss"] = vehicle_loss_json(c.vehicle_model);
    return j;
}

CoverageConfig coverage_from_json(const Json& j)
{
    CoverageConfig c;
    c.mode = antenna_mode_from_string(read<std::string>(j, "mode"));
    c.location = antenna_location_from_string(read<std::string>(j, "location"));
    if (c.location == AntennaLocation::CarRoof) {
        throw InvalidArgument("car_roof is not a scooter antenna location");
    }
    c.occupancy = occupancy_from_string(read<std::string>(j, "occupancy"));
    c.heading_deg = read<double>(j, "heading_deg");
    c.strip_length = read<double>(j, "strip_length");
    c.strip_width = read<double>(j, "strip_width");
    c.spacing = read<double>(j, "spacing");
    c.rx_antenna_height = read<double>(j, "rx_antenna_height");
    c.rear_cable_loss_db = read<double>(j, "rear_cable_loss_db");
    if (!(c.rear_cable_loss_db >= 0.0)) {
        throw InvalidArgument("rear_cable_loss_db must be non-negative");
    }
    c.radio = radio_from_json(j.at("radio"));
    c.params = params_table_from_json(j.at("params"));
    c.vehicle_model = vehicle_loss_from_json(j.at("vehicle_loss"));
    return c;
}

CoverageConfig load_coverage(const Json& file_doc, std::span<const std::string> overrides)
{
    return coverage_from_json(merged(to_json(CoverageConfig{}), file_doc, overrides));
}

Json to_json(const CoverageSummary& s)
{
    return Json{{"mode", std::string(to_string(s.mode))},
                {"columns", s.columns},
                {"rows", s.rows},
                {"spacing", s.spacing},
                {"covered_cells", s.covered_cells},
                {"covered_area_m2", s.covered_area_m2}};
}

CoverageSummary coverage_summary_from_json(const Json& j)
{
    try {
        CoverageSummary s;
        s.mode = antenna_mode_from_string(read<std::string>(j, "mode"));
        s.columns = read_count(j, "columns");
        s.rows = read_count(j, "rows");
        s.spacing = read<double>(j, "spacing");
        s.covered_cells = read_count(j, "covered_cells");
        s.covered_area_m2 = read<double>(j, "covered_area_m2");
        return s;
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("coverage summary: ") + e.what());
    } catch (const Json::exception& e) {
        throw DataError(std::string("coverage summary: ") + e.what());
    }
}

Json to_json(const SimStats& stats)
{
    Json vehicles = Json::array();
    for (std::size_t i = 0; i < stats.vehicle_ids.size(); ++i) {
        vehicles.push_back(
            Json{{"id", stats.vehicle_ids[i]}, {"kind", std::string(to_string(stats.vehicle_kinds[i]))}});
    }
    Json variants = Json::array();
    for (const VariantStats& v : stats.variants) {
        Json hist = Json::object();
        for (std::size_t c = 0; c < v.class_histogram.size(); ++c) {
            hist[std::string(to_string(static_cast<LosClass>(c)))] = v.class_histogram[c];
        }
        variants.push_back(Json{{"variant", static_cast<int>(v.variant)},
                                {"total_received", v.total_received},
                                {"avg_received_per_vehicle", v.average_received_per_vehicle()},
                                {"candidate_links", v.candidate_links},
                                {"below_sensitivity", v.below_sensitivity},
                                {"collided", v.collided},
                                {"class_histogram", hist},
                                {"received_per_vehicle", v.received_per_vehicle}});
    }
    return Json{{"seed", stats.seed},
                {"car_fraction", stats.car_fraction},
                {"beacons_sent", stats.beacons_sent},
                {"vehicles", vehicles},
                {"variants", variants}};
}

Json to_json(const LogDistanceFit& fit)
{
    return Json{{"gamma", fit.gamma},
                {"intercept_db", fit.intercept_db},
                {"residual_std_db", fit.residual_std_db},
                {"sample_count", fit.sample_count}};
}

Sweep parse_sweep(std::string_view spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw InvalidArgument(fmt::format("sweep '{}' is not name=start:stop:step", spec));
    }
    Sweep out;
    out.name = std::string(spec.substr(0, eq));
    const std::string range(spec.substr(eq + 1));
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    char tail = 0;
    if (std::sscanf(range.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &tail) != 3) {
        throw InvalidArgument(fmt::format("sweep range '{}' is not start:stop:step", range));
    }
    if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop)) {
        throw InvalidArgument("sweep needs step > 0 and stop >= start");
    }
    // count from the span so 0:1:0.1 yields exactly 11 points
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        out.values.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

void write_sweep_csv(std::span<const SweepResult> results, std::ostream& out)
{
    out << "car_fraction,variant,avg_received_per_vehicle\n";
    for (const SweepResult& r : results) {
        if (r.runs.empty()) {
            continue;
        }
        for (const VariantStats& v : r.runs.front().variants) {
            double sum = 0.0;
            for (const SimStats& s : r.runs) {
                sum += s.variant(v.variant).average_received_per_vehicle();
            }
            out << fmt::format("{:.2f},{},{:.4f}\n", r.car_fraction, static_cast<int>(v.variant),
                               sum / static_cast<double>(r.runs.size()));
        }
    }
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open '{}'", path));
    }
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw DataError(fmt::format("'{}' is not valid JSON", path));
    }
    return doc;
}

}  // namespace scooterx
