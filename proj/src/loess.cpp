#include "demand_frontier/decompose.hpp"

#include "demand_frontier/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace demand_frontier {

namespace {

// Solves the (d+1)x(d+1) system in place by Gaussian elimination with partial
// pivoting. Returns false when the system is numerically singular.
bool solve_small(std::array<std::array<double, 4>, 3>& m, int dim) {
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < 1e-12) return false;
        std::swap(m[col], m[pivot]);
        for (int r = 0; r < dim; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c <= dim; ++c) m[r][c] -= f * m[col][c];
        }
    }
    for (int r = 0; r < dim; ++r) m[r][dim] /= m[r][r];
    return true;
}

}  // namespace

std::vector<double> loess(std::span<const double> xs, std::span<const double> ys, double span_fraction, int degree,
                          std::span<const double> robustness_weights) {
    const std::size_t n = xs.size();
    detail::require(ys.size() == n, "loess: xs and ys differ in length");
    detail::require(robustness_weights.empty() || robustness_weights.size() == n,
                    "loess: robustness weights differ in length");
    detail::require(span_fraction > 0.0 && span_fraction <= 1.0, "loess: span fraction must lie in (0, 1]");
    detail::require(degree >= 0 && degree <= 2, "loess: degree must be 0, 1 or 2");
    detail::require(n > 0, "loess: empty input");
    for (std::size_t i = 1; i < n; ++i)
        detail::require(xs[i] > xs[i - 1], "loess: xs must be strictly increasing");

    const auto q = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span_fraction * static_cast<double>(n) - 1e-9)));
    const int dim = degree + 1;
    std::vector<double> fitted(n);

    std::size_t left = 0;  // window [left, left + q)
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        while (left + q < n && x - xs[left] > xs[left + q] - x) ++left;
        const std::size_t right = left + q - 1;
        const double h = std::max(x - xs[left], xs[right] - x);

        std::array<std::array<double, 4>, 3> m{};
        std::size_t positive = 0;
        for (std::size_t j = left; j <= right; ++j) {
            double w = 1.0;
            if (h > 0.0) {
                const double r = std::abs(xs[j] - x) / h;
                w = r < 1.0 ? std::pow(1.0 - r * r * r, 3) : 0.0;
            }
            if (!robustness_weights.empty()) w *= robustness_weights[j];
            if (w <= 0.0) continue;
            ++positive;
            const double u = h > 0.0 ? (xs[j] - x) / h : 0.0;
            const double basis[3] = {1.0, u, u * u};
            for (int a = 0; a < dim; ++a) {
                for (int b = 0; b < dim; ++b) m[a][b] += w * basis[a] * basis[b];
                m[a][dim] += w * basis[a] * ys[j];
            }
        }
        if (positive < static_cast<std::size_t>(dim))
            throw InvalidInput("loess: neighbourhood of x=" + std::to_string(x) + " has " + std::to_string(positive) +
                               " weighted points, need at least " + std::to_string(dim));
        if (!solve_small(m, dim))
            throw InvalidInput("loess: singular local fit at x=" + std::to_string(x));
        fitted[i] = m[0][dim];
    }
    return fitted;
}

}  // namespace demand_frontier
