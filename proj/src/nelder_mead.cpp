#include "demand_frontier/nelder_mead.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace demand_frontier {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    detail::require(n > 0, "nelder_mead: empty parameter vector");
    const double dim = static_cast<double>(n);
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / dim;
    const double gamma = 0.75 - 1.0 / (2.0 * dim);
    const double delta = 1.0 - 1.0 / dim;

    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = start[i] != 0.0 ? options.initial_step * std::max(1.0, std::abs(start[i])) : options.initial_step;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            auto sv = simplex;
            auto vv = values;
            for (std::size_t i = 0; i <= n; ++i) {
                simplex[i] = std::move(sv[order[i]]);
                values[i] = vv[order[i]];
            }
        }
        res.trace.push_back(values[0]);

        const double fbest = values[0];
        const double fworst = values[n];
        double extent = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) extent = std::max(extent, std::abs(simplex[i][j] - simplex[0][j]));
        if (std::isfinite(fworst) &&
            (fworst - fbest <= options.f_tolerance * (std::abs(fbest) + options.f_tolerance) ||
             extent <= options.x_tolerance)) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / dim;

        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - simplex[n][j]);
        const double fr = eval(xr);
        if (fr < values[0]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + beta * (xr[j] - centroid[j]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if (fr < values[n - 1]) {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        const bool outside = fr < values[n];
        for (std::size_t j = 0; j < n; ++j)
            xc[j] = outside ? centroid[j] + gamma * (xr[j] - centroid[j]) : centroid[j] + gamma * (simplex[n][j] - centroid[j]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : values[n])) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + delta * (simplex[i][j] - simplex[0][j]);
            values[i] = eval(simplex[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    res.x = simplex[best];
    res.value = values[best];
    return res;
}

}  // namespace demand_frontier
