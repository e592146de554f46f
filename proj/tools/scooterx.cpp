// scooterx: command-line front end. Every subcommand parses flags, calls the
// library and writes the result; no model arithmetic lives here.

#include "scooterx/config.hpp"
#include "scooterx/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace scooterx;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

// Outputs are written next to their final path and renamed on success, so a
// failed command never leaves a partial file behind.
class Outputs {
public:
    ~Outputs()
    {
        for (const auto& [final_path, tmp] : pending_) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
        }
    }

    void write(const std::string& path, const std::function<void(std::ostream&)>& body)
    {
        if (path.empty() || path == "-") {
            body(std::cout);
            std::cout.flush();
            return;
        }
        const std::string tmp = path + ".partial";
        pending_[path] = tmp;
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw DataError(fmt::format("cannot write '{}'", path));
        }
        body(out);
        out.close();
        if (!out) {
            throw DataError(fmt::format("failed writing '{}'", path));
        }
    }

    void commit()
    {
        for (const auto& [final_path, tmp] : pending_) {
            std::filesystem::rename(tmp, final_path);
        }
        pending_.clear();
    }

private:
    std::map<std::string, std::string> pending_;
};

unsigned thread_cap()
{
    if (const char* env = std::getenv("SCOOTERX_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (*env != '\0' && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
        throw InvalidArgument("SCOOTERX_THREADS must be a positive integer");
    }
    return 0;
}

Json optional_doc(const std::string& path)
{
    return path.empty() ? Json() : read_json_file(path);
}

void dump(std::ostream& out, const Json& doc)
{
    out << doc.dump(2) << '\n';
}

struct LosArgs {
    double dx = 0.0;
    double dy = 0.0;
    std::string occupancy = "driver";
    std::string rx_occupancy = "empty";
    double rx_heading_deg = 0.0;
    std::string format = "text";
    std::string out;
};

void cmd_los(const LosArgs& a)
{
    const auto tx = std::make_shared<const VehicleProfile>(
        VehicleProfile::scooter(occupancy_from_string(a.occupancy)));
    const auto rx = std::make_shared<const VehicleProfile>(
        VehicleProfile::scooter(occupancy_from_string(a.rx_occupancy)));

    const LocalPoint tx_antenna = tx->antenna_offsets.front();
    const LocalPoint remote{tx_antenna.lateral + a.dx, tx_antenna.longitudinal - a.dy};
    const PlacedVehicle tx_vehicle{0, Pose(0.0, 0.0, 0.0), tx};
    // place the receiver so that its antenna lands on `remote`
    const Pose rx_frame(0.0, 0.0, a.rx_heading_deg * kPi / 180.0);
    const Vec2 rx_offset = to_global_frame(rx_frame, rx->antenna_offsets.front());
    const Vec2 remote_global = to_global_frame(tx_vehicle.pose, remote);
    const PlacedVehicle rx_vehicle{1, Pose(remote_global.x - rx_offset.x, remote_global.y - rx_offset.y,
                                           rx_frame.heading()),
                                   rx};

    const LosClassification cls = classify_link(LinkEnd{tx_vehicle, 0}, LinkEnd{rx_vehicle, 0}, {});
    const BodyLosExplanation e = explain_body_los(tx->body, tx_antenna, remote);

    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) {
        if (a.format == "json") {
            dump(os, Json{{"classification", std::string(to_string(cls.cls))},
                          {"blocking_bodies", cls.blocking_body_count},
                          {"tx_body_case", std::string(to_string(e.body_case))},
                          {"lhs", e.lhs},
                          {"rhs", e.rhs},
                          {"tx_body_blocks", e.blocked}});
            return;
        }
        os << fmt::format("classification: {}\n", to_string(cls.cls));
        os << fmt::format("blocking bodies: {}\n", cls.blocking_body_count);
        os << fmt::format("tx body case: {}\n", to_string(e.body_case));
        if (e.body_case != BodyCase::Unoccupied && e.body_case != BodyCase::NotBehind) {
            os << fmt::format("inequality: h_t*|d_lat| = {:.4f} {} w*|d_long| = {:.4f}\n", e.lhs,
                              e.blocked ? "<" : ">=", e.rhs);
        }
        os << fmt::format("tx body blocks: {}\n", e.blocked ? "yes" : "no");
    });
    outputs.commit();
}

struct CoverageArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string csv;
};

void cmd_shadowmap(const CoverageArgs& a)
{
    CoverageRequest req = load_coverage(optional_doc(a.config), a.sets).request();
    req.threads = thread_cap();
    const CoverageMap map = coverage_map(req);
    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) { write_shadow_csv(map, os); });
    outputs.commit();
}

void cmd_coverage(const CoverageArgs& a)
{
    const CoverageConfig config = load_coverage(optional_doc(a.config), a.sets);
    CoverageRequest req = config.request();
    req.threads = thread_cap();
    const CoverageMap map = coverage_map(req);
    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) { dump(os, to_json(summarize(map, config.mode))); });
    if (!a.csv.empty()) {
        outputs.write(a.csv, [&](std::ostream& os) { write_coverage_csv(map, os); });
    }
    outputs.commit();
}

struct DiffArgs {
    std::string single;
    std::string dual;
    std::string out;
};

void cmd_coverage_diff(const DiffArgs& a)
{
    const CoverageSummary single = coverage_summary_from_json(read_json_file(a.single));
    const CoverageSummary dual = coverage_summary_from_json(read_json_file(a.dual));
    const double improvement = coverage_improvement(single, dual);
    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) {
        dump(os, Json{{"baseline", to_json(single)}, {"candidate", to_json(dual)}, {"improvement", improvement}});
    });
    outputs.commit();
}

struct TraceArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
};

void cmd_trace(const TraceArgs& a)
{
    const ScenarioConfig scenario = load_scenario(optional_doc(a.config), a.sets);
    const TraceSet trace = generate_synthetic(scenario);
    const bool jsonl = a.out.ends_with(".jsonl") || a.out.ends_with(".ndjson");
    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) {
        write_trace(trace, os, jsonl ? TraceFormat::JsonLines : TraceFormat::Csv);
    });
    outputs.commit();
}

struct SimulateArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string trace;
    std::string sweep;
    std::string variants = "1,2,3,4";
    std::size_t seeds = 1;
    std::string json;
    std::string csv;
};

std::vector<ChannelVariant> parse_variants(const std::string& text)
{
    std::vector<ChannelVariant> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const long v = std::strtol(item.c_str(), &end, 10);
        if (item.empty() || *end != '\0') {
            throw InvalidArgument(fmt::format("variant '{}' is not a number", item));
        }
        out.push_back(variant_from_number(static_cast<int>(v)));
    }
    if (out.empty()) {
        throw InvalidArgument("no variants given");
    }
    return out;
}

void cmd_simulate(const SimulateArgs& a)
{
    const ScenarioConfig scenario = load_scenario(optional_doc(a.config), a.sets);
    const std::vector<ChannelVariant> variants = parse_variants(a.variants);
    std::vector<double> fractions{scenario.car_fraction};
    if (!a.sweep.empty()) {
        const Sweep sweep = parse_sweep(a.sweep);
        if (sweep.name != "car_fraction") {
            throw InvalidArgument(fmt::format("cannot sweep '{}'; only car_fraction", sweep.name));
        }
        fractions = sweep.values;
    }
    TraceSet external;
    if (!a.trace.empty()) {
        external = load_trace_file(a.trace);
    }
    const std::vector<SweepResult> results = run_sweep(
        scenario, fractions, a.seeds, variants, a.trace.empty() ? nullptr : &external, thread_cap());

    Outputs outputs;
    if (!a.json.empty()) {
        outputs.write(a.json, [&](std::ostream& os) {
            Json runs = Json::array();
            for (const SweepResult& r : results) {
                for (const SimStats& s : r.runs) {
                    runs.push_back(to_json(s));
                }
            }
            dump(os, Json{{"scenario", to_json(scenario)}, {"runs", runs}});
        });
    }
    if (!a.csv.empty() || a.json.empty()) {
        outputs.write(a.csv, [&](std::ostream& os) { write_sweep_csv(results, os); });
    }
    outputs.commit();
}

struct FitArgs {
    std::string input;
    bool bin = false;
    std::string out;
    std::string table;
};

void cmd_fit(const FitArgs& a)
{
    std::ifstream in(a.input);
    if (!in) {
        throw DataError(fmt::format("cannot open '{}'", a.input));
    }
    const std::vector<RssiSample> samples = read_samples_csv(in);
    std::map<std::string, std::vector<RssiSample>> groups;
    for (const RssiSample& s : samples) {
        groups[s.label].push_back(s);
    }
    auto fit = [&](const std::vector<RssiSample>& group) {
        return a.bin ? fit_log_distance(bin_means(group)) : fit_log_distance(group);
    };
    const LogDistanceFit all = fit(samples);
    std::vector<std::pair<std::string, LogDistanceFit>> per_label;
    if (groups.size() > 1) {
        for (const auto& [label, group] : groups) {
            per_label.emplace_back(label, fit(group));
        }
    }

    Outputs outputs;
    outputs.write(a.out, [&](std::ostream& os) {
        Json j = to_json(all);
        if (!per_label.empty()) {
            Json labels = Json::object();
            for (const auto& [label, f] : per_label) {
                labels[label] = to_json(f);
            }
            j["labels"] = labels;
        }
        dump(os, j);
    });
    if (!a.table.empty()) {
        outputs.write(a.table, [&](std::ostream& os) {
            os << "label,gamma,intercept_db,residual_std_db,sample_count\n";
            auto row = [&](const std::string& label, const LogDistanceFit& f) {
                os << fmt::format("{},{:.4f},{:.4f},{:.4f},{}\n", label, f.gamma, f.intercept_db,
                                  f.residual_std_db, f.sample_count);
            };
            row("all", all);
            for (const auto& [label, f] : per_label) {
                row(label, f);
            }
        });
    }
    outputs.commit();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Scooter-to-X link geometry, coverage and beaconing simulation"};
    app.require_subcommand(1);

    LosArgs los;
    auto* los_cmd = app.add_subcommand("los", "Line-of-sight check for a receiver behind a scooter");
    los_cmd->add_option("--dx", los.dx, "Receiver lateral offset from the TX antenna (m, +left)")->required();
    los_cmd->add_option("--dy", los.dy, "Receiver distance behind the TX antenna (m)")->required();
    los_cmd->add_option("--occupancy", los.occupancy, "TX rider: empty|driver|driver_and_passenger");
    los_cmd->add_option("--rx-occupancy", los.rx_occupancy, "RX rider occupancy");
    los_cmd->add_option("--rx-heading-deg", los.rx_heading_deg, "RX heading relative to TX (deg)");
    los_cmd->add_option("--format", los.format, "text|json")->check(CLI::IsMember({"text", "json"}));
    los_cmd->add_option("--out", los.out, "Output file (default stdout)");

    CoverageArgs shadow;
    auto* shadow_cmd = app.add_subcommand("shadowmap", "Per-cell LOS classification around a scooter");
    shadow_cmd->add_option("--config", shadow.config, "Coverage config JSON");
    shadow_cmd->add_option("--set", shadow.sets, "Override key=value")->take_all();
    shadow_cmd->add_option("--out", shadow.out, "CSV output (default stdout)");

    CoverageArgs cov;
    auto* cov_cmd = app.add_subcommand("coverage", "Coverage map and covered area");
    cov_cmd->add_option("--config", cov.config, "Coverage config JSON");
    cov_cmd->add_option("--set", cov.sets, "Override key=value")->take_all();
    cov_cmd->add_option("--out", cov.out, "Summary JSON output (default stdout)");
    cov_cmd->add_option("--csv", cov.csv, "Per-cell CSV output");

    DiffArgs diff;
    auto* diff_cmd = app.add_subcommand("coverage-diff", "Relative coverage improvement of two summaries");
    diff_cmd->add_option("--single", diff.single, "Baseline summary JSON")->required();
    diff_cmd->add_option("--dual", diff.dual, "Candidate summary JSON")->required();
    diff_cmd->add_option("--out", diff.out, "JSON output (default stdout)");

    TraceArgs trace;
    auto* trace_cmd = app.add_subcommand("trace", "Generate a synthetic mobility trace");
    trace_cmd->add_option("--config", trace.config, "Scenario config JSON");
    trace_cmd->add_option("--set", trace.sets, "Override key=value")->take_all();
    trace_cmd->add_option("--out", trace.out, "Trace output (.csv or .jsonl; default stdout CSV)");

    SimulateArgs sim;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Beaconing simulation over channel-model variants");
    sim_cmd->add_option("--config", sim.config, "Scenario config JSON");
    sim_cmd->add_option("--set", sim.sets, "Override key=value")->take_all();
    auto* seed_opt = sim_cmd->add_option("--seed", sim_seed, "First seed");
    sim_cmd->add_option("--seeds", sim.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--trace", sim.trace, "External trace (CSV or JSON lines)");
    sim_cmd->add_option("--sweep", sim.sweep, "car_fraction=start:stop:step");
    sim_cmd->add_option("--variants", sim.variants, "Comma-separated variants 1..4");
    sim_cmd->add_option("--json", sim.json, "Full statistics JSON output");
    sim_cmd->add_option("--csv", sim.csv, "Sweep CSV output (default stdout)");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the log-distance model to RSSI samples");
    fit_cmd->add_option("--input", fit.input, "CSV distance_m,rssi_dbm,label")->required();
    fit_cmd->add_flag("--bin-means", fit.bin, "Fit per-distance means instead of raw samples");
    fit_cmd->add_option("--out", fit.out, "JSON output (default stdout)");
    fit_cmd->add_option("--table", fit.table, "Per-label CSV table output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*los_cmd) {
            cmd_los(los);
        } else if (*shadow_cmd) {
            cmd_shadowmap(shadow);
        } else if (*cov_cmd) {
            cmd_coverage(cov);
        } else if (*diff_cmd) {
            cmd_coverage_diff(diff);
        } else if (*trace_cmd) {
            cmd_trace(trace);
        } else if (*sim_cmd) {
            if (*seed_opt) {
                sim.sets.push_back(fmt::format("seed={}", sim_seed));
            }
            cmd_simulate(sim);
        } else if (*fit_cmd) {
            cmd_fit(fit);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const Json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const InvariantViolation& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
