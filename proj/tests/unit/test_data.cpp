#include "doctest.h"

#include "demand_frontier/data.hpp"
#include "demand_frontier/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace demand_frontier;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SyntheticPopulationConfig small_population(std::size_t n = 5, std::size_t t = 24 * 7 * 3) {
    SyntheticPopulationConfig c;
    c.n_households = n;
    c.n_hours = t;
    return c;
}

}  // namespace

TEST_CASE("timestamps round-trip through the ISO-8601 formatter") {
    CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601_utc("2012-01-02T00:00:00Z") == 368184LL * 3600);
    CHECK(format_iso8601_utc(368184LL * 3600) == "2012-01-02T00:00:00Z");
    for (std::int64_t s : {0LL, 86399LL, 1330560000LL, 951782400LL})
        CHECK(parse_iso8601_utc(format_iso8601_utc(s)) == s);
    CHECK_THROWS_AS((void)parse_iso8601_utc("2012-02-30T00:00:00Z"), InvalidInput);
    CHECK_THROWS_AS((void)parse_iso8601_utc("2012-01-02"), InvalidInput);
    CHECK_THROWS_AS((void)parse_iso8601_utc("2012-01-02T00:00:00+01:00"), InvalidInput);
}

TEST_CASE("hourly ingest builds a dense grid with NaN for gaps") {
    const std::int64_t h0 = 1000 * 3600;
    std::vector<MeterReading> r{{h0, "a", 1.0}, {h0 + 3600, "a", 2.0}, {h0 + 3 * 3600, "a", 4.0},
                                {h0, "b", 0.5},  {h0 + 3600, "b", std::nullopt}};
    const Panel p = ingest(r, Resolution::hourly);
    REQUIRE(p.households() == 2);
    REQUIRE(p.hours() == 4);
    CHECK(p.first_hour() == 1000);
    CHECK(p.at(0, 0) == 1.0);
    CHECK(std::isnan(p.at(2, 0)));
    CHECK(p.at(3, 0) == 4.0);
    CHECK(std::isnan(p.at(1, 1)));
    CHECK(std::isnan(p.at(3, 1)));
    CHECK(p.missing_count() == 4);
}

TEST_CASE("half-hourly readings sum into hours and need both halves") {
    const std::int64_t h0 = 10 * 3600;
    std::vector<MeterReading> r{{h0, "x", 0.25}, {h0 + 1800, "x", 0.5}, {h0 + 3600, "x", 1.0}};
    const Panel p = ingest(r, Resolution::half_hourly);
    REQUIRE(p.hours() == 2);
    CHECK(p.at(0, 0) == doctest::Approx(0.75));
    CHECK(std::isnan(p.at(1, 0)));
}

TEST_CASE("ingest rejects malformed streams") {
    const std::int64_t h0 = 3600;
    CHECK_THROWS_AS((void)ingest(std::vector<MeterReading>{{h0, "a", 1.0}, {h0, "a", 2.0}}, Resolution::hourly),
                    InvalidInput);
    CHECK_THROWS_AS((void)ingest(std::vector<MeterReading>{{h0 + 3600, "a", 1.0}, {h0, "a", 2.0}}, Resolution::hourly),
                    InvalidInput);
    CHECK_THROWS_AS((void)ingest(std::vector<MeterReading>{{h0, "a", -1.0}}, Resolution::hourly), InvalidInput);
    CHECK_THROWS_AS((void)ingest(std::vector<MeterReading>{{h0 + 60, "a", 1.0}}, Resolution::hourly), InvalidInput);
}

TEST_CASE("imputation copies the same hour of the nearest earlier week, then later week") {
    const std::size_t T = 168 * 3;
    std::vector<double> v(T);
    for (std::size_t t = 0; t < T; ++t) v[t] = static_cast<double>(t);
    v[200] = kNaN;  // week 1: earlier week has hour 32
    v[5] = kNaN;    // week 0: only later weeks
    v[5 + 168] = kNaN;
    const Panel p(0, {"h"}, T, v);
    const Panel filled = impute_missing(p);
    CHECK(filled.missing_count() == 0);
    CHECK(filled.at(200, 0) == 32.0);
    CHECK(filled.at(5, 0) == 5.0 + 336.0);
    CHECK(filled.at(5 + 168, 0) == 5.0 + 336.0);
    CHECK(filled.at(10, 0) == 10.0);
}

TEST_CASE("imputation of an all-missing household fails") {
    const Panel p(0, {"h"}, 3, {kNaN, kNaN, kNaN});
    CHECK_THROWS_AS((void)impute_missing(p), InvalidInput);
}

TEST_CASE("window plans step by a prime stride and stay inside the series") {
    const auto plan = make_windows(1000, 200, 50, 97);
    REQUIRE(!plan.windows.empty());
    for (std::size_t i = 0; i < plan.windows.size(); ++i) {
        const auto& w = plan.windows[i];
        CHECK(w.train_start == 97 * i);
        CHECK(w.train_end - w.train_start == 200);
        CHECK(w.test_end - w.train_end == 50);
        CHECK(w.test_end <= 1000);
    }
    CHECK(plan.windows.back().train_start + 97 + 250 > 1000);
    CHECK_THROWS_AS((void)make_windows(1000, 200, 50, 96), InvalidInput);
    CHECK_THROWS_AS((void)make_windows(100, 200, 50, 97), InvalidInput);
    const auto shifted = make_windows(1000, 200, 50, 97, 300);
    CHECK(shifted.windows.front().train_start == 300);
}

TEST_CASE("aggregation sums or averages the weighted columns") {
    const Panel p(0, {"a", "b", "c"}, 2, {1, 2, 10, 20, 100, 200});
    const std::vector<double> w{1, 0, 1};
    const auto sum = aggregate(p, w, AggregateMode::sum);
    CHECK(sum == std::vector<double>{101, 202});
    const auto avg = aggregate(p, w, AggregateMode::average);
    CHECK(avg[0] == doctest::Approx(50.5));
    const std::vector<double> half{0.5, 0.5, 0};
    CHECK(aggregate(p, half, AggregateMode::sum)[1] == doctest::Approx(11.0));
    CHECK_THROWS_AS((void)aggregate(p, std::vector<double>{0, 0, 0}, AggregateMode::sum), InvalidInput);
    CHECK_THROWS_AS((void)aggregate(p, std::vector<double>{1, 1}, AggregateMode::sum), InvalidInput);
}

TEST_CASE("synthetic population is deterministic, non-negative and seed dependent") {
    auto c = small_population();
    const Panel a = synthesize_population(c);
    const Panel b = synthesize_population(c);
    CHECK(a == b);
    CHECK(a.households() == 5);
    CHECK(a.hours() == 504);
    for (double v : a.raw()) CHECK(v >= 0.0);
    c.seed = 43;
    CHECK(!(synthesize_population(c) == a));
}

TEST_CASE("synthetic missing markers appear at roughly the configured rate") {
    auto c = small_population(20, 168 * 4);
    c.missing_rate = 0.05;
    const Panel p = synthesize_population(c);
    CHECK(p.missing_fraction() == doctest::Approx(0.05).epsilon(0.3));
    CHECK(impute_missing(p).missing_count() == 0);
}

TEST_CASE("synthetic households carry a daily cycle") {
    auto c = small_population(1, 168 * 8);
    c.noise_scale = {0.01, 0.01};
    c.daily_amplitude = {0.8, 0.8};
    const Panel p = synthesize_population(c);
    auto x = p.household(0);
    // autocorrelation at lag 24 well above lag 12
    auto acf = [&](std::size_t lag) {
        double m = 0, num = 0, den = 0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        for (std::size_t t = 0; t < x.size(); ++t) den += (x[t] - m) * (x[t] - m);
        for (std::size_t t = lag; t < x.size(); ++t) num += (x[t] - m) * (x[t - lag] - m);
        return num / den;
    };
    CHECK(acf(24) > 0.8);
    CHECK(acf(12) < acf(24));
}

TEST_CASE("panel CSV round-trips through the reader and ingest") {
    auto c = small_population(3, 48);
    c.missing_rate = 0.1;
    const Panel p = synthesize_population(c);
    std::stringstream s;
    write_panel_csv(p, s);
    const std::string text = s.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 48);
    const Panel q = ingest(read_readings_csv(s), Resolution::hourly);
    REQUIRE(q.households() == 3);
    REQUIRE(q.hours() == 48);
    CHECK(q.first_hour() == p.first_hour());
    CHECK(q.missing_count() == p.missing_count());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 48; ++t)
            if (!std::isnan(p.at(t, i))) CHECK(q.at(t, i) == doctest::Approx(p.at(t, i)).epsilon(1e-6));
}

TEST_CASE("readings CSV reader rejects bad headers and fields") {
    std::istringstream bad_header("time,id,kwh\n");
    CHECK_THROWS_AS((void)read_readings_csv(bad_header), InvalidInput);
    std::istringstream bad_value("timestamp,household_id,kwh\n2012-01-02T00:00:00Z,a,abc\n");
    CHECK_THROWS_AS((void)read_readings_csv(bad_value), InvalidInput);
    std::istringstream extra("timestamp,household_id,kwh\n2012-01-02T00:00:00Z,a,1,2\n");
    CHECK_THROWS_AS((void)read_readings_csv(extra), InvalidInput);
    std::istringstream ok("timestamp,household_id,kwh\n2012-01-02T00:00:00Z,a,\n");
    const auto r = read_readings_csv(ok);
    REQUIRE(r.size() == 1);
    CHECK(!r[0].demand);
}

TEST_CASE("panel slicing and selection keep ids and values aligned") {
    const Panel p(5, {"a", "b", "c"}, 4, {0, 1, 2, 3, 10, 11, 12, 13, 20, 21, 22, 23});
    const Panel s = p.slice_hours(1, 3);
    CHECK(s.first_hour() == 6);
    CHECK(s.at(0, 2) == 21);
    const std::vector<std::size_t> cols{2, 0};
    const Panel q = p.select_households(cols);
    CHECK(q.household_ids() == std::vector<std::string>{"c", "a"});
    CHECK(q.at(3, 1) == 3);
    CHECK(p.scaled(2.0).at(1, 1) == 22);
}
