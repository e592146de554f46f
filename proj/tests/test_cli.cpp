#include "scooterx/config.hpp"
#include "scooterx/fitting.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace scooterx;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result sh(const std::string& args)
{
    const std::string cmd = std::string(SCOOTERX_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) {
        r.out.append(buf, n);
    }
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("scooterx_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool has_partials(const fs::path& dir)
{
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".partial") {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("los reports the blocking inequality")
{
    const Result behind = sh("los --dx 0 --dy 100");
    CHECK(behind.code == 0);
    CHECK(behind.out.find("classification: body_shadowed") != std::string::npos);
    CHECK(behind.out.find("tx body blocks: yes") != std::string::npos);

    const Result side = sh("los --dx 100 --dy 0 --format json");
    REQUIRE(side.code == 0);
    const Json j = Json::parse(side.out);
    CHECK(j["tx_body_case"] == "not_behind_body_axis");
    CHECK(j["tx_body_blocks"] == false);

    const Result empty = sh("los --dx 0 --dy 100 --occupancy empty --rx-occupancy empty");
    CHECK(empty.out.find("classification: los") != std::string::npos);
}

TEST_CASE("fit matches the library")
{
    const fs::path dir = scratch("fit");
    {
        std::ofstream f(dir / "s.csv");
        f << "distance_m,rssi_dbm,label\n";
        for (double d : {2.0, 5.0, 9.0, 20.0, 40.0}) {
            f << d << "," << -40.0 - 19.0 * std::log10(d) + (d > 8 ? 0.7 : -0.4) << ",lm\n";
        }
    }
    const Result r = sh("fit --input " + (dir / "s.csv").string() + " --out " + (dir / "fit.json").string());
    REQUIRE(r.code == 0);
    const Json j = Json::parse(slurp(dir / "fit.json"));
    std::ifstream in(dir / "s.csv");
    const LogDistanceFit lib = fit_log_distance(read_samples_csv(in));
    CHECK(j["gamma"].get<double>() == doctest::Approx(lib.gamma).epsilon(1e-12));
    CHECK(j["intercept_db"].get<double>() == doctest::Approx(lib.intercept_db).epsilon(1e-12));
    CHECK(j["sample_count"] == lib.sample_count);
    CHECK_FALSE(has_partials(dir));
}

TEST_CASE("simulate is byte-for-byte reproducible")
{
    const fs::path dir = scratch("sim");
    const std::string args = "simulate --set duration=5 --set vehicle_count=12 --seed 3 --json ";
    REQUIRE(sh(args + (dir / "a.json").string() + " --csv " + (dir / "a.csv").string()).code == 0);
    REQUIRE(sh(args + (dir / "b.json").string() + " --csv " + (dir / "b.csv").string()).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK_FALSE(slurp(dir / "a.csv").empty());
    CHECK_FALSE(has_partials(dir));
}

TEST_CASE("exit codes")
{
    CHECK(sh("los --bogus").code == 2);
    CHECK(sh("simulate --set not_a_key=1").code == 2);
    CHECK(sh("fit --input /nonexistent/samples.csv").code == 3);

    const fs::path dir = scratch("codes");
    {
        std::ofstream f(dir / "bad.csv");
        f << "distance_m,rssi_dbm,label\n1,-30,x\n2,oops,x\n";
    }
    CHECK(sh("fit --input " + (dir / "bad.csv").string() + " --out " + (dir / "out.json").string()).code == 3);
    CHECK_FALSE(fs::exists(dir / "out.json"));
    CHECK_FALSE(has_partials(dir));
}
