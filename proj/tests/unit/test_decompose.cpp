#include "doctest.h"

#include "demand_frontier/decompose.hpp"
#include "demand_frontier/error.hpp"
#include "demand_frontier/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace demand_frontier;

namespace {

double tone_amplitude(std::span<const double> x, double period) {
    double c = 0.0, s = 0.0;
    const double w = 2.0 * std::numbers::pi / period;
    for (std::size_t t = 0; t < x.size(); ++t) {
        c += x[t] * std::cos(w * static_cast<double>(t));
        s += x[t] * std::sin(w * static_cast<double>(t));
    }
    return 2.0 * std::hypot(c, s) / static_cast<double>(x.size());
}

std::vector<double> two_tone(std::size_t n, double daily, double weekly, double noise, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> z(0.0, noise);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double tt = static_cast<double>(t);
        y[t] = 5.0 + 0.001 * tt + daily * std::sin(2.0 * std::numbers::pi * tt / 24.0) +
               weekly * std::cos(2.0 * std::numbers::pi * tt / 168.0 + 0.3) + z(rng);
    }
    return y;
}

}  // namespace

TEST_CASE("degree-1 loess reproduces a straight line") {
    std::vector<double> xs(40), ys(40);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = static_cast<double>(i);
        ys[i] = 3.0 - 0.5 * xs[i];
    }
    const auto fit = loess(xs, ys, 0.3, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(fit[i] == doctest::Approx(ys[i]).epsilon(1e-10));
}

TEST_CASE("degree-0 loess is a tricube-weighted local mean") {
    const std::vector<double> xs{0, 1, 2, 3, 4};
    const std::vector<double> ys{1, 2, 3, 4, 5};
    // span covering 3 points around x=2: neighbours 1,2,3 at distances 1,0,1;
    // max distance is widened so the end points keep positive weight
    const auto fit = loess(xs, ys, 0.6, 0);
    CHECK(fit[2] == doctest::Approx(3.0));
    CHECK(fit[0] < 2.0);
    CHECK(fit[0] > 1.0);
}

TEST_CASE("loess rejects neighbourhoods too small for the degree") {
    const std::vector<double> xs{0, 1, 2};
    const std::vector<double> ys{0, 1, 2};
    const std::vector<double> zero{0, 0, 0};
    CHECK_THROWS_AS((void)loess(xs, ys, 1.0, 1, zero), InvalidInput);
}

TEST_CASE("STL window defaults follow the period") {
    const auto c = StlConfig::for_period(24);
    CHECK(c.seasonal_span == 25);
    CHECK(c.seasonal_span % 2 == 1);
    CHECK(c.trend_span % 2 == 1);
    CHECK(c.trend_span >= 36);
    CHECK(c.lowpass_span == 25);
    StlConfig bad = c;
    bad.seasonal_span = 24;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("components add back to the series exactly") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto y = two_tone(168 * 3, 1.0, 0.5, 0.3, seed);
        const auto d = multi_stl(y);
        REQUIRE(d.size() == y.size());
        CHECK(d.cycle == 168);
        for (std::size_t t = 0; t < y.size(); ++t)
            CHECK(std::abs(d.seasonal[t] + d.trend[t] + d.remainder[t] - y[t]) < 1e-9);
    }
}

TEST_CASE("daily and weekly tones are recovered in the seasonal component") {
    const auto y = two_tone(168 * 6, 2.0, 1.0, 0.05, 11);
    const auto d = multi_stl(y);
    CHECK(tone_amplitude(d.seasonal, 24.0) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(tone_amplitude(d.seasonal, 168.0) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(tone_amplitude(d.remainder, 24.0) < 0.1);
}

TEST_CASE("single-period STL separates a sinusoid from a linear trend") {
    std::vector<double> y(24 * 20);
    for (std::size_t t = 0; t < y.size(); ++t)
        y[t] = 0.01 * static_cast<double>(t) + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0);
    const auto d = stl(y, StlConfig::for_period(24));
    for (std::size_t t = 48; t + 48 < y.size(); ++t) {
        CHECK(d.trend[t] == doctest::Approx(0.01 * static_cast<double>(t)).epsilon(0.02));
        CHECK(std::abs(d.remainder[t]) < 0.05);
    }
}

TEST_CASE("robust passes down-weight an outlier") {
    auto y = two_tone(168 * 2, 1.0, 0.0, 0.01, 3);
    y[100] += 50.0;
    auto c = StlConfig::for_period(24);
    c.outer_iterations = 2;
    c.inner_iterations = 1;
    const auto d = stl(y, c);
    CHECK(d.robustness_weights[100] < 0.01);
    CHECK(d.robustness_weights[50] > 0.5);
    CHECK(d.remainder[100] > 45.0);
}

TEST_CASE("projection repeats the last seasonal cycle and holds the trend") {
    const auto y = two_tone(168 * 3, 1.0, 0.5, 0.1, 5);
    const auto d = multi_stl(y);
    const auto p = project_components(d, 200);
    REQUIRE(p.seasonal.size() == 200);
    const std::size_t n = y.size();
    for (std::size_t h = 0; h < 200; ++h) {
        CHECK(p.seasonal[h] == d.seasonal[n - 168 + (h % 168)]);
        CHECK(p.trend[h] == d.trend.back());
    }
}

TEST_CASE("multi-period decomposition needs two full cycles of the longest period") {
    const std::vector<double> y(168 + 10, 1.0);
    CHECK_THROWS_AS((void)multi_stl(y), InvalidInput);
}
