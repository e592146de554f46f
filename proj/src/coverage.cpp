#include "scooterx/coverage.hpp"

#include "scooterx/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

namespace scooterx {

std::string_view to_string(AntennaMode mode)
{
    switch (mode) {
    case AntennaMode::Single: return "single";
    case AntennaMode::DualFront: return "dual_front";
    case AntennaMode::FrontAndBack: return "front_and_back";
    }
    return "unknown";
}

AntennaMode antenna_mode_from_string(std::string_view name)
{
    if (name == "single") return AntennaMode::Single;
    if (name == "dual_front") return AntennaMode::DualFront;
    if (name == "front_and_back") return AntennaMode::FrontAndBack;
    throw InvalidArgument("unknown antenna mode '" + std::string(name) + "'");
}

void AntennaConfig::validate() const
{
    const std::size_t expected = mode == AntennaMode::Single ? 1 : 2;
    if (mounts.size() != expected) {
        throw InvalidArgument(fmt::format("antenna mode {} needs {} mount(s), got {}",
                                          to_string(mode), expected, mounts.size()));
    }
    for (const auto& m : mounts) {
        if (!(m.cable_loss_db >= 0.0)) {
            throw InvalidArgument("cable loss must be non-negative");
        }
    }
}

AntennaConfig AntennaConfig::single(const VehicleProfile& profile, AntennaLocation location)
{
    return {AntennaMode::Single, {{profile.antenna_offsets.at(0), location, 0.0}}};
}

AntennaConfig AntennaConfig::dual_front(const VehicleProfile& profile, AntennaLocation location)
{
    const LocalPoint primary = profile.antenna_offsets.at(0);
    return {AntennaMode::DualFront,
            {{primary, location, 0.0}, {{-primary.lateral, primary.longitudinal}, location, 0.0}}};
}

AntennaConfig AntennaConfig::front_and_back(const VehicleProfile& profile, AntennaLocation location,
                                            double rear_cable_loss_db)
{
    const LocalPoint primary = profile.antenna_offsets.at(0);
    return {AntennaMode::FrontAndBack,
            {{primary, location, 0.0},
             {{0.0, kRearCarrierLongitudinal}, location, rear_cable_loss_db}}};
}

VehicleProfile with_mounts(VehicleProfile profile, const AntennaConfig& config)
{
    config.validate();
    profile.antenna_offsets.clear();
    for (const auto& m : config.mounts) {
        profile.antenna_offsets.push_back(m.offset);
    }
    profile.validate();
    return profile;
}

double communication_range(const PathLossParams& params, const RadioParams& radio, bool shadowed,
                           Occupancy body)
{
    params.validate();
    double margin = mean_rssi_dbm(radio, params, 1.0) - radio.rx_sensitivity_dbm;
    if (shadowed && body != Occupancy::Empty) {
        const Occupancy bodies[] = {body};
        margin -= body_loss_db(params, bodies);
    }
    if (margin < 0.0) {
        throw InvalidArgument("communication_range: sensitivity unreachable at 1 m");
    }
    return std::pow(10.0, margin / (10.0 * params.gamma));
}

double effective_shadow_cone(const VehicleProfile& profile)
{
    if (!profile.body.occupied()) {
        return 0.0;
    }
    // Blocked far-field directions of each mount, as angles from the axis the
    // body shadows (backward, or forward for a mount behind the rider), positive
    // toward the rider's left.
    bool any_behind = false;
    bool any_ahead = false;
    double lo = -kPi;
    double hi = kPi;
    for (std::size_t i = 0; i < profile.antenna_offsets.size(); ++i) {
        const BodyView view = body_view(profile, i);
        const BodyGeometry& g = view.geometry;
        (view.body_ahead ? any_ahead : any_behind) = true;
        lo = std::max(lo, -std::atan(g.right_extent / g.axis_offset));
        hi = std::min(hi, std::atan(g.left_extent / g.axis_offset));
    }
    // cones on opposite axes never overlap (each half-width is below 90 deg)
    if (any_ahead && any_behind) {
        return 0.0;
    }
    return std::max(0.0, hi - lo);
}

PathLossParams CoverageRequest::params_for(AntennaLocation location) const
{
    const auto it = params.find(location);
    return it != params.end() ? it->second : default_params(location);
}

Vec2 CoverageMap::cell_center(std::size_t column, std::size_t row) const
{
    return {origin.x() - length / 2.0 + (static_cast<double>(column) + 0.5) * spacing,
            origin.y() - width / 2.0 + (static_cast<double>(row) + 0.5) * spacing};
}

std::size_t CoverageMap::covered_count() const
{
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const CoverageCell& c) { return c.covered; }));
}

double CoverageMap::covered_area_m2() const
{
    return static_cast<double>(covered_count()) * spacing * spacing;
}

namespace {

struct MountContext {
    LocalPoint offset;
    BodyView view;
    Vec3 antenna;
    RadioParams radio;
    PathLossParams params;
};

CoverageCell evaluate_cell(const CoverageRequest& req, const std::vector<MountContext>& mounts,
                           Vec2 point)
{
    const Vec3 rx{point.x, point.y, req.rx_antenna_height};
    const bool occupied =
        req.tx_profile.kind == VehicleKind::Scooter && req.tx_profile.body.occupied();
    const LocalPoint remote = to_local_frame(req.tx_pose, point);

    LinkSample best;
    std::uint8_t winner = 0;
    for (std::size_t i = 0; i < mounts.size(); ++i) {
        const MountContext& m = mounts[i];
        LosClassification link;
        if (occupied && body_blocks_los(m.view, m.offset, remote)) {
            link.blocking_bodies.push_back(req.tx_profile.body.occupancy);
        }
        link.blocking_body_count = link.blocking_bodies.size();
        for (const PlacedVehicle& obstacle : req.obstacles) {
            if (vehicle_obstructs(m.antenna, rx, obstacle)) {
                link.obstructing_vehicle_ids.push_back(obstacle.id);
            }
        }
        const bool body = link.blocking_body_count > 0;
        const bool vehicle = !link.obstructing_vehicle_ids.empty();
        link.cls = body && vehicle ? LosClass::BodyAndVehicle
                   : body          ? LosClass::BodyShadowed
                   : vehicle       ? LosClass::VehicleObstructed
                                   : LosClass::Los;
        const double d = std::max(std::hypot(point.x - m.antenna.x, point.y - m.antenna.y),
                                  kMinLinkDistance);
        const LinkSample s = evaluate_link(m.radio, m.params, link, d, req.vehicle_model);
        // selective combining; ties keep the lower mount index
        if (i == 0 || s.rssi_dbm > best.rssi_dbm) {
            best = s;
            winner = static_cast<std::uint8_t>(i);
        }
    }
    return {best.rssi_dbm, best.received, best.classification.cls, winner};
}

}  // namespace

CoverageMap coverage_map(const CoverageRequest& req)
{
    if (!(req.spacing > 0.0) || !(req.strip_length > 0.0) || !(req.strip_width > 0.0)) {
        throw InvalidArgument("coverage_map: spacing and extent must be positive");
    }
    req.antennas.validate();
    req.radio.validate();
    const VehicleProfile profile = with_mounts(req.tx_profile, req.antennas);

    PlacedVehicle tx{0, req.tx_pose, std::make_shared<const VehicleProfile>(profile)};
    std::vector<MountContext> mounts;
    for (std::size_t i = 0; i < req.antennas.mounts.size(); ++i) {
        const AntennaMount& m = req.antennas.mounts[i];
        MountContext ctx;
        ctx.offset = m.offset;
        ctx.view = profile.body.occupied() ? body_view(profile, i) : BodyView{};
        ctx.antenna = tx.antenna_point(i);
        ctx.radio = req.radio;
        ctx.radio.cable_loss_db += m.cable_loss_db;
        ctx.params = req.params_for(m.location);
        ctx.params.validate();
        mounts.push_back(ctx);
    }

    CoverageMap map;
    map.origin = req.tx_pose;
    map.spacing = req.spacing;
    map.columns = static_cast<std::size_t>(std::llround(req.strip_length / req.spacing));
    map.rows = static_cast<std::size_t>(std::llround(req.strip_width / req.spacing));
    if (map.columns == 0 || map.rows == 0) {
        throw InvalidArgument("coverage_map: extent smaller than one cell");
    }
    map.length = static_cast<double>(map.columns) * req.spacing;
    map.width = static_cast<double>(map.rows) * req.spacing;
    map.rx_sensitivity_dbm = req.radio.rx_sensitivity_dbm;
    map.cells.resize(map.columns * map.rows);

    auto fill_rows = [&](std::size_t first, std::size_t stride) {
        for (std::size_t r = first; r < map.rows; r += stride) {
            for (std::size_t c = 0; c < map.columns; ++c) {
                map.cells[r * map.columns + c] = evaluate_cell(req, mounts, map.cell_center(c, r));
            }
        }
    };

    unsigned workers = req.threads != 0 ? req.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(map.rows));
    if (workers == 1) {
        fill_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(fill_rows, w, workers);
        }
    }
    return map;
}

double coverage_improvement(const CoverageMap& single, const CoverageMap& dual)
{
    if (single.columns != dual.columns || single.rows != dual.rows ||
        single.spacing != dual.spacing || single.origin.x() != dual.origin.x() ||
        single.origin.y() != dual.origin.y()) {
        throw InvalidArgument("coverage_improvement: grid mismatch");
    }
    const auto base = static_cast<double>(single.covered_count());
    if (base == 0.0) {
        throw InvalidArgument("coverage_improvement: single map covers nothing");
    }
    return (static_cast<double>(dual.covered_count()) - base) / base;
}

double measure_shadow_wedge(const CoverageMap& map, Vec2 apex, double axis_heading, double r_min,
                            double r_max)
{
    double lo = kPi;
    double hi = -kPi;
    bool any = false;
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.columns; ++c) {
            const CoverageCell& cell = map.at(c, r);
            if (cell.cls != LosClass::BodyShadowed && cell.cls != LosClass::BodyAndVehicle) {
                continue;
            }
            const Vec2 p = map.cell_center(c, r);
            const double d = std::hypot(p.x - apex.x, p.y - apex.y);
            if (d < r_min || d > r_max) {
                continue;
            }
            double a = std::atan2(p.y - apex.y, p.x - apex.x) - axis_heading;
            a = std::remainder(a, 2.0 * kPi);
            lo = std::min(lo, a);
            hi = std::max(hi, a);
            any = true;
        }
    }
    return any ? hi - lo : 0.0;
}

void write_coverage_csv(const CoverageMap& map, std::ostream& out)
{
    out << "x,y,rssi_dbm,covered,classification\n";
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.columns; ++c) {
            const CoverageCell& cell = map.at(c, r);
            const Vec2 p = map.cell_center(c, r);
            out << fmt::format("{:.3f},{:.3f},{:.2f},{},{}\n", p.x, p.y,
                               std::max(cell.rssi_dbm, kEdFloorDbm), cell.covered ? 1 : 0,
                               to_string(cell.cls));
        }
    }
}

void write_shadow_csv(const CoverageMap& map, std::ostream& out)
{
    out << "x,y,classification\n";
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.columns; ++c) {
            const Vec2 p = map.cell_center(c, r);
            out << fmt::format("{:.3f},{:.3f},{}\n", p.x, p.y, to_string(map.at(c, r).cls));
        }
    }
}

CoverageSummary summarize(const CoverageMap& map, AntennaMode mode)
{
    return {mode, map.columns, map.rows, map.spacing, map.covered_count(), map.covered_area_m2()};
}

double coverage_improvement(const CoverageSummary& single, const CoverageSummary& dual)
{
    if (single.columns != dual.columns || single.rows != dual.rows || single.spacing != dual.spacing) {
        throw InvalidArgument("coverage_improvement: grid mismatch");
    }
    if (single.covered_cells == 0) {
        throw InvalidArgument("coverage_improvement: single map covers nothing");
    }
    const auto base = static_cast<double>(single.covered_cells);
    return (static_cast<double>(dual.covered_cells) - base) / base;
}

}  // namespace scooterx
