#include "demand_frontier/decompose.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

// Seasonal-trend decomposition by Loess, following the inner/outer loop
// structure of Cleveland, Cleveland, McRae & Terpenning (1990). Positions
// inside the smoothers are 1-based like the reference implementation.

namespace demand_frontier {

namespace {

std::size_t next_odd(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x - 1e-9));
    if (v % 2 == 0) ++v;
    return std::max<std::size_t>(v, 3);
}

std::size_t jump_for(std::size_t span) { return std::max<std::size_t>(1, (span + 9) / 10); }

// Local fit at position xs using points nleft..nright (1-based) of y.
// Returns false when all weights vanish.
bool est(const double* y, std::size_t n, std::size_t len, int ideg, double xs, double& ys, std::size_t nleft,
         std::size_t nright, double* w, bool userw, const double* rw) {
    const double range = static_cast<double>(n) - 1.0;
    double h = std::max(xs - static_cast<double>(nleft), static_cast<double>(nright) - xs);
    if (len > n) h += static_cast<double>((len - n) / 2);
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;
    double a = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) {
        w[j - 1] = 0.0;
        const double r = std::abs(static_cast<double>(j) - xs);
        if (r <= h9) {
            if (r <= h1) {
                w[j - 1] = 1.0;
            } else {
                const double t = r / h;
                const double u = 1.0 - t * t * t;
                w[j - 1] = u * u * u;
            }
            if (userw) w[j - 1] *= rw[j - 1];
            a += w[j - 1];
        }
    }
    if (a <= 0.0) return false;
    for (std::size_t j = nleft; j <= nright; ++j) w[j - 1] /= a;
    if (h > 0.0 && ideg > 0) {
        a = 0.0;
        for (std::size_t j = nleft; j <= nright; ++j) a += w[j - 1] * static_cast<double>(j);
        double b = xs - a;
        double c = 0.0;
        for (std::size_t j = nleft; j <= nright; ++j) {
            const double d = static_cast<double>(j) - a;
            c += w[j - 1] * d * d;
        }
        if (std::sqrt(c) > 0.001 * range) {
            b /= c;
            for (std::size_t j = nleft; j <= nright; ++j) w[j - 1] *= b * (static_cast<double>(j) - a) + 1.0;
        }
    }
    double s = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) s += w[j - 1] * y[j - 1];
    ys = s;
    return true;
}

// Loess smoothing of y (length n) evaluated every `njump` points with linear
// interpolation in between.
void ess(const double* y, std::size_t n, std::size_t len, int ideg, std::size_t njump, bool userw, const double* rw,
         double* ys, double* res) {
    if (n < 2) {
        ys[0] = y[0];
        return;
    }
    const std::size_t newnj = std::min(njump, n - 1);
    std::size_t nleft = 1;
    std::size_t nright = n;
    if (len >= n) {
        for (std::size_t i = 1; i <= n; i += newnj)
            if (!est(y, n, len, ideg, static_cast<double>(i), ys[i - 1], nleft, nright, res, userw, rw))
                ys[i - 1] = y[i - 1];
    } else if (newnj == 1) {
        const std::size_t nsh = (len + 1) / 2;
        nleft = 1;
        nright = len;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i > nsh && nright != n) {
                ++nleft;
                ++nright;
            }
            if (!est(y, n, len, ideg, static_cast<double>(i), ys[i - 1], nleft, nright, res, userw, rw))
                ys[i - 1] = y[i - 1];
        }
    } else {
        const std::size_t nsh = (len + 1) / 2;
        for (std::size_t i = 1; i <= n; i += newnj) {
            if (i < nsh) {
                nleft = 1;
                nright = len;
            } else if (i >= n - nsh + 1) {
                nleft = n - len + 1;
                nright = n;
            } else {
                nleft = i - nsh + 1;
                nright = len + i - nsh;
            }
            if (!est(y, n, len, ideg, static_cast<double>(i), ys[i - 1], nleft, nright, res, userw, rw))
                ys[i - 1] = y[i - 1];
        }
    }
    if (newnj == 1) return;
    for (std::size_t i = 1; i + newnj <= n; i += newnj) {
        const double delta = (ys[i + newnj - 1] - ys[i - 1]) / static_cast<double>(newnj);
        for (std::size_t j = i + 1; j < i + newnj; ++j) ys[j - 1] = ys[i - 1] + delta * static_cast<double>(j - i);
    }
    const std::size_t k = ((n - 1) / newnj) * newnj + 1;
    if (k != n) {
        if (!est(y, n, len, ideg, static_cast<double>(n), ys[n - 1], nleft, nright, res, userw, rw))
            ys[n - 1] = y[n - 1];
        if (k != n - 1) {
            const double delta = (ys[n - 1] - ys[k - 1]) / static_cast<double>(n - k);
            for (std::size_t j = k + 1; j < n; ++j) ys[j - 1] = ys[k - 1] + delta * static_cast<double>(j - k);
        }
    }
}

void moving_average(const double* x, std::size_t n, std::size_t len, double* out) {
    const std::size_t newn = n - len + 1;
    double v = 0.0;
    for (std::size_t i = 0; i < len; ++i) v += x[i];
    const double flen = static_cast<double>(len);
    out[0] = v / flen;
    for (std::size_t j = 1; j < newn; ++j) {
        v = v - x[j - 1] + x[j + len - 1];
        out[j] = v / flen;
    }
}

struct Work {
    explicit Work(std::size_t n, std::size_t np)
        : w1(n + 2 * np), w2(n + 2 * np), w3(n + 2 * np), w4(n + 2 * np), w5(n + 2 * np) {}
    std::vector<double> w1, w2, w3, w4, w5;
};

// Cycle-subseries smoothing: output has n + 2*np values (one extra period at each end).
void cycle_subseries(const double* y, std::size_t n, std::size_t np, std::size_t ns, int isdeg, std::size_t nsjump,
                     bool userw, const double* rw, double* season, Work& wk) {
    std::vector<double> sub(n / np + 3), subw(n / np + 3), smooth(n / np + 3), res(n / np + 3);
    for (std::size_t j = 1; j <= np; ++j) {
        if (j > n) break;
        const std::size_t k = (n - j) / np + 1;
        for (std::size_t i = 1; i <= k; ++i) sub[i - 1] = y[(i - 1) * np + j - 1];
        if (userw)
            for (std::size_t i = 1; i <= k; ++i) subw[i - 1] = rw[(i - 1) * np + j - 1];
        // smooth[0] and smooth[k+1] hold the extrapolated ends
        ess(sub.data(), k, ns, isdeg, nsjump, userw, subw.data(), smooth.data() + 1, res.data());
        std::size_t nright = std::min(ns, k);
        if (!est(sub.data(), k, ns, isdeg, 0.0, smooth[0], 1, nright, res.data(), userw, subw.data()))
            smooth[0] = smooth[1];
        const std::size_t nleft = k >= ns ? k - ns + 1 : 1;
        if (!est(sub.data(), k, ns, isdeg, static_cast<double>(k + 1), smooth[k + 1], nleft, k, res.data(), userw,
                 subw.data()))
            smooth[k + 1] = smooth[k];
        for (std::size_t m = 1; m <= k + 2; ++m) season[(m - 1) * np + j - 1] = smooth[m - 1];
    }
    (void)wk;
}

void inner_loop(const double* y, std::size_t n, const StlConfig& c, bool userw, const double* rw, double* season,
                double* trend, Work& wk) {
    const std::size_t np = c.period;
    const std::size_t nsjump = jump_for(c.seasonal_span);
    const std::size_t ntjump = jump_for(c.trend_span);
    const std::size_t nljump = jump_for(c.lowpass_span);
    for (int it = 0; it < c.inner_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) wk.w1[i] = y[i] - trend[i];
        cycle_subseries(wk.w1.data(), n, np, c.seasonal_span, c.seasonal_degree, nsjump, userw, rw, wk.w2.data(), wk);
        // low-pass: moving averages of length np, np, 3 then loess
        moving_average(wk.w2.data(), n + 2 * np, np, wk.w3.data());
        moving_average(wk.w3.data(), n + np + 1, np, wk.w1.data());
        moving_average(wk.w1.data(), n + 2, 3, wk.w3.data());
        ess(wk.w3.data(), n, c.lowpass_span, c.lowpass_degree, nljump, false, wk.w4.data(), wk.w1.data(),
            wk.w5.data());
        for (std::size_t i = 0; i < n; ++i) season[i] = wk.w2[np + i] - wk.w1[i];
        for (std::size_t i = 0; i < n; ++i) wk.w1[i] = y[i] - season[i];
        ess(wk.w1.data(), n, c.trend_span, c.trend_degree, ntjump, userw, rw, trend, wk.w3.data());
    }
}

void robustness(const double* y, const double* fit, std::size_t n, double* rw) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(y[i] - fit[i]);
    std::vector<double> sorted = r;
    const std::size_t mid0 = (n - 1) / 2;
    const std::size_t mid1 = n / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid1), sorted.end());
    double med = sorted[mid1];
    if (mid0 != mid1) {
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid0), sorted.end());
        med = 0.5 * (med + sorted[mid0]);
    }
    const double cmad = 6.0 * med;
    const double c9 = 0.999 * cmad;
    const double c1 = 0.001 * cmad;
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] <= c1) {
            rw[i] = 1.0;
        } else if (r[i] <= c9) {
            const double u = r[i] / cmad;
            rw[i] = (1.0 - u * u) * (1.0 - u * u);
        } else {
            rw[i] = 0.0;
        }
    }
}

std::size_t lcm_of(std::span<const std::size_t> periods) {
    std::size_t l = 1;
    for (std::size_t p : periods) l = std::lcm(l, p);
    return l;
}

}  // namespace

StlConfig StlConfig::for_period(std::size_t period) {
    return for_period(period, period % 2 == 0 ? period + 1 : period + 2);
}

StlConfig StlConfig::for_period(std::size_t period, std::size_t seasonal_span) {
    StlConfig c;
    c.period = period;
    c.seasonal_span = seasonal_span;
    c.trend_span = next_odd(1.5 * static_cast<double>(period) / (1.0 - 1.5 / static_cast<double>(seasonal_span)));
    c.lowpass_span = next_odd(static_cast<double>(period));
    return c;
}

void StlConfig::validate() const {
    detail::require(period >= 2, "stl: period must be at least 2");
    for (std::size_t span : {seasonal_span, trend_span, lowpass_span})
        detail::require(span >= 3 && span % 2 == 1, "stl: spans must be odd and >= 3");
    for (int d : {seasonal_degree, trend_degree, lowpass_degree})
        detail::require(d == 0 || d == 1, "stl: loess degrees must be 0 or 1");
    detail::require(inner_iterations >= 1, "stl: at least one inner iteration is required");
    detail::require(outer_iterations >= 0, "stl: outer iterations must be non-negative");
}

DecomposedSeries stl(std::span<const double> series, const StlConfig& config) {
    config.validate();
    const std::size_t n = series.size();
    if (n < 2 * config.period)
        throw InvalidInput("stl: series of length " + std::to_string(n) + " is shorter than two periods (" +
                           std::to_string(2 * config.period) + ")");
    for (double v : series)
        if (!std::isfinite(v)) throw InvalidInput("stl: series contains non-finite values");

    DecomposedSeries out;
    out.seasonal.assign(n, 0.0);
    out.trend.assign(n, 0.0);
    out.robustness_weights.assign(n, 1.0);
    out.periods = {config.period};
    out.cycle = config.period;

    Work wk(n, config.period);
    std::vector<double> fit(n);
    bool userw = false;
    for (int k = 0;; ++k) {
        inner_loop(series.data(), n, config, userw, out.robustness_weights.data(), out.seasonal.data(),
                   out.trend.data(), wk);
        if (k >= config.outer_iterations) break;
        for (std::size_t i = 0; i < n; ++i) fit[i] = out.trend[i] + out.seasonal[i];
        robustness(series.data(), fit.data(), n, out.robustness_weights.data());
        userw = true;
    }
    if (config.outer_iterations <= 0) std::fill(out.robustness_weights.begin(), out.robustness_weights.end(), 1.0);

    out.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.remainder[i] = series[i] - out.seasonal[i] - out.trend[i];
    return out;
}

DecomposedSeries multi_stl(std::span<const double> series, std::span<const std::size_t> periods) {
    detail::require(!periods.empty(), "multi_stl: no periods given");
    std::vector<std::size_t> sorted(periods.begin(), periods.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t longest = sorted.back();
    if (series.size() < 2 * longest)
        throw InvalidInput("multi_stl: series of length " + std::to_string(series.size()) +
                           " is shorter than two of its longest period (" + std::to_string(2 * longest) + ")");

    const std::size_t n = series.size();
    std::vector<double> work(series.begin(), series.end());
    DecomposedSeries out;
    out.seasonal.assign(n, 0.0);
    for (std::size_t p : sorted) {
        DecomposedSeries pass = stl(work, StlConfig::for_period(p));
        for (std::size_t i = 0; i < n; ++i) {
            out.seasonal[i] += pass.seasonal[i];
            work[i] -= pass.seasonal[i];
        }
        out.trend = std::move(pass.trend);
        out.robustness_weights = std::move(pass.robustness_weights);
    }
    out.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.remainder[i] = series[i] - out.seasonal[i] - out.trend[i];
    out.periods = sorted;
    out.cycle = lcm_of(sorted);
    return out;
}

ComponentProjection project_components(const DecomposedSeries& d, std::size_t horizon) {
    detail::require(horizon >= 1, "project_components: horizon must be at least 1");
    const std::size_t n = d.size();
    detail::require(n > 0, "project_components: empty decomposition");
    const std::size_t cycle = std::min(std::max<std::size_t>(d.cycle, 1), n);
    ComponentProjection p;
    p.seasonal.resize(horizon);
    p.trend.assign(horizon, d.trend.back());
    for (std::size_t h = 0; h < horizon; ++h) p.seasonal[h] = d.seasonal[n - cycle + h % cycle];
    return p;
}

}  // namespace demand_frontier
