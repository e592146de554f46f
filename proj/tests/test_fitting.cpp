#include "scooterx/channel.hpp"
#include "scooterx/error.hpp"
#include "scooterx/fitting.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace scooterx;

namespace {

std::vector<RssiSample> synthetic(double gamma, double intercept, double sigma, std::size_t n,
                                  std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logd(0.0, 2.0);  // 1 m .. 100 m
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<RssiSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::pow(10.0, logd(rng));
        out.push_back({d, intercept - 10 * gamma * std::log10(d) + (sigma > 0 ? noise(rng) : 0.0), "s"});
    }
    return out;
}

double rss(const std::vector<RssiSample>& s, double gamma, double intercept)
{
    double acc = 0;
    for (const auto& x : s) {
        const double r = x.rssi_dbm - (intercept - 10 * gamma * std::log10(x.distance_m));
        acc += r * r;
    }
    return acc;
}

}  // namespace

TEST_CASE("noiseless data is recovered exactly")
{
    std::vector<RssiSample> s;
    for (double d : {5.0, 10.0, 20.0, 50.0, 100.0}) {
        s.push_back({d, -43.4 - 20.0 * std::log10(d), ""});
    }
    const LogDistanceFit f = fit_log_distance(s);
    CHECK(std::abs(f.gamma - 2.0) < 1e-9);
    CHECK(std::abs(f.intercept_db + 43.4) < 1e-9);
    CHECK(f.residual_std_db < 1e-9);
    CHECK(f.sample_count == 5);
}

TEST_CASE("two-point fit")
{
    const std::vector<RssiSample> s{{1.0, -34.2, ""}, {10.0, -51.2, ""}};
    const LogDistanceFit f = fit_log_distance(s);
    CHECK(f.gamma == doctest::Approx(1.7));
    CHECK(f.intercept_db == doctest::Approx(-34.2));
    CHECK(f.residual_std_db == 0.0);
}

TEST_CASE("noisy fit stays within tolerance across seeds")
{
    const LogDistanceFit fixed = fit_log_distance(synthetic(2.0, -43.4, 2.0, 500, 7));
    CHECK(std::abs(fixed.gamma - 2.0) < 0.1);
    CHECK(fixed.residual_std_db == doctest::Approx(2.0).epsilon(0.1));

    int inside = 0;
    double mean = 0;
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
        const LogDistanceFit f = fit_log_distance(synthetic(2.0, -43.4, 2.0, 500, seed));
        inside += std::abs(f.gamma - 2.0) < 0.1;
        mean += f.gamma / 100.0;
    }
    CHECK(inside >= 99);
    CHECK(mean == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("fit is a local minimum of the squared residuals")
{
    const auto s = synthetic(1.7, -34.2, 3.0, 300, 21);
    const LogDistanceFit f = fit_log_distance(s);
    const double best = rss(s, f.gamma, f.intercept_db);
    const double d = 1e-3;
    for (double dg : {-d, 0.0, d}) {
        for (double dx : {-d, 0.0, d}) {
            CHECK(best <= rss(s, f.gamma + dg, f.intercept_db + dx));
        }
    }
    CHECK(f.residual_std_db == doctest::Approx(std::sqrt(best / (s.size() - 2))));
}

TEST_CASE("scale and shift properties")
{
    const auto s = synthetic(2.4, -34.6, 2.0, 200, 3);
    const LogDistanceFit f = fit_log_distance(s);

    auto scaled = s;
    const double k = 3.0;
    for (auto& x : scaled) {
        x.distance_m *= k;
    }
    const LogDistanceFit fs = fit_log_distance(scaled);
    CHECK(fs.gamma == doctest::Approx(f.gamma).epsilon(1e-10));
    // same readings at k-times the distance: the 1 m intercept rises
    CHECK(fs.intercept_db == doctest::Approx(f.intercept_db + 10 * f.gamma * std::log10(k)).epsilon(1e-10));

    auto shifted = s;
    for (auto& x : shifted) {
        x.rssi_dbm += 4.5;
    }
    const LogDistanceFit fh = fit_log_distance(shifted);
    CHECK(fh.gamma == doctest::Approx(f.gamma).epsilon(1e-10));
    CHECK(fh.intercept_db == doctest::Approx(f.intercept_db + 4.5).epsilon(1e-10));
}

TEST_CASE("degenerate input")
{
    const std::vector<RssiSample> same{{10, -50, ""}, {10, -52, ""}, {10, -51, ""}};
    CHECK_THROWS_WITH_AS(fit_log_distance(same), doctest::Contains("rank deficient"), InvalidArgument);
    const std::vector<RssiSample> one{{10, -50, ""}};
    CHECK_THROWS(fit_log_distance(one));
}

TEST_CASE("attenuation delta")
{
    const LogDistanceFit alone{1.7, -34.2, 0, 0};
    const LogDistanceFit driver{1.7, -44.3, 0, 0};
    CHECK(attenuation_delta(alone, driver) == doctest::Approx(10.1));
    CHECK(attenuation_delta(alone, alone) == 0.0);
    CHECK(attenuation_delta({2.0, -43.4, 0, 0}, {2.0, -53.9, 0, 0}) == doctest::Approx(10.5));
}

TEST_CASE("bin means")
{
    const std::vector<RssiSample> s{{10, -50, "a"}, {5, -40, "a"}, {10, -52, "a"}};
    const auto b = bin_means(s);
    REQUIRE(b.size() == 2);
    CHECK(b[0].distance_m == 5);
    CHECK(b[1].rssi_dbm == doctest::Approx(-51));
}

TEST_CASE("sample CSV")
{
    std::istringstream good("distance_m,rssi_dbm,label\n1,-34.2,lm\n\n10,-51.2,lm\n");
    const auto s = read_samples_csv(good);
    REQUIRE(s.size() == 2);
    CHECK(s[1].label == "lm");

    std::istringstream header("d,rssi,label\n1,-30,x\n");
    CHECK_THROWS_AS(read_samples_csv(header), DataError);
    std::istringstream bad("distance_m,rssi_dbm,label\n1,-30,x\n2,abc,x\n");
    CHECK_THROWS_WITH_AS(read_samples_csv(bad), doctest::Contains("line 3"), DataError);
    std::istringstream neg("distance_m,rssi_dbm,label\n-1,-30,x\n");
    CHECK_THROWS_AS(read_samples_csv(neg), DataError);
    std::istringstream empty("distance_m,rssi_dbm,label\n");
    CHECK_THROWS_AS(read_samples_csv(empty), DataError);
}

TEST_CASE("measured intercept pairs reproduce the driver loss")
{
    for (AntennaLocation loc : kScooterAntennaLocations) {
        const MeasuredIntercepts m = measured_intercepts(loc);
        const double delta = attenuation_delta({1.0, m.scooter_only_db, 0, 0}, {1.0, m.with_driver_db, 0, 0});
        CHECK(delta == doctest::Approx(default_params(loc).driver_loss_db).epsilon(1e-12));
    }
}
