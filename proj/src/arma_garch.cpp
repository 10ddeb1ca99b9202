#include "demand_frontier/forecast.hpp"

#include "demand_frontier/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace demand_frontier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr double kShapeLo = 0.5, kShapeHi = 20.0;
constexpr double kSkewLo = 0.2, kSkewHi = 5.0;

// Partial autocorrelations in (-1, 1) -> stationary AR coefficients.
std::vector<double> pacf_to_ar(std::span<const double> pacf) {
    std::vector<double> phi(pacf.size()), prev;
    for (std::size_t k = 0; k < pacf.size(); ++k) {
        prev.assign(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k));
        for (std::size_t j = 0; j < k; ++j) phi[j] = prev[j] - pacf[k] * prev[k - 1 - j];
        phi[k] = pacf[k];
    }
    return phi;
}

// Inverse of pacf_to_ar; returns nullopt when phi is not stationary.
std::optional<std::vector<double>> ar_to_pacf(std::vector<double> phi) {
    const std::size_t p = phi.size();
    std::vector<double> pacf(p);
    for (std::size_t k = p; k-- > 0;) {
        const double a = phi[k];
        if (!(std::abs(a) < 0.999)) return std::nullopt;
        pacf[k] = a;
        std::vector<double> prev(k);
        for (std::size_t j = 0; j < k; ++j) prev[j] = (phi[j] + a * phi[k - 1 - j]) / (1.0 - a * a);
        std::copy(prev.begin(), prev.end(), phi.begin());
    }
    return pacf;
}

struct Layout {
    std::size_t p, q, r, s;
    [[nodiscard]] std::size_t size() const { return 1 + p + q + 1 + r + s + 2; }
};

ArmaGarchParams unpack(std::span<const double> th, const Layout& L) {
    ArmaGarchParams out;
    std::size_t i = 0;
    out.mean_const = th[i++];
    std::vector<double> pacf(L.p);
    for (auto& v : pacf) v = std::tanh(th[i++]);
    out.ar = pacf_to_ar(pacf);
    pacf.assign(L.q, 0.0);
    for (auto& v : pacf) v = std::tanh(th[i++]);
    out.ma = pacf_to_ar(pacf);
    for (auto& v : out.ma) v = -v;  // invertible 1 + sum ma_k B^k
    out.omega = std::exp(th[i++]);
    double denom = 1.0;
    std::vector<double> e(L.r + L.s);
    for (auto& v : e) {
        v = std::exp(std::clamp(th[i++], -30.0, 30.0));
        denom += v;
    }
    out.garch.assign(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(L.r));
    out.arch.assign(e.begin() + static_cast<std::ptrdiff_t>(L.r), e.end());
    for (auto& v : out.garch) v /= denom;
    for (auto& v : out.arch) v /= denom;
    out.shape = kShapeLo + (kShapeHi - kShapeLo) * logistic(th[i++]);
    out.skew = kSkewLo + (kSkewHi - kSkewLo) * logistic(th[i++]);
    return out;
}

std::vector<double> pack(const ArmaGarchParams& prm, const Layout& L) {
    std::vector<double> th;
    th.reserve(L.size());
    th.push_back(prm.mean_const);
    auto ar_pacf = ar_to_pacf(prm.ar).value_or(std::vector<double>(L.p, 0.0));
    for (double v : ar_pacf) th.push_back(std::atanh(std::clamp(v, -0.99, 0.99)));
    std::vector<double> neg(prm.ma);
    for (auto& v : neg) v = -v;
    auto ma_pacf = ar_to_pacf(neg).value_or(std::vector<double>(L.q, 0.0));
    for (double v : ma_pacf) th.push_back(std::atanh(std::clamp(v, -0.99, 0.99)));
    th.push_back(std::log(prm.omega));
    double used = 0.0;
    for (double v : prm.garch) used += v;
    for (double v : prm.arch) used += v;
    const double slack = std::max(1.0 - used, 1e-6);
    for (double v : prm.garch) th.push_back(std::log(std::max(v, 1e-8) / slack));
    for (double v : prm.arch) th.push_back(std::log(std::max(v, 1e-8) / slack));
    th.push_back(logit((std::clamp(prm.shape, kShapeLo + 1e-6, kShapeHi - 1e-6) - kShapeLo) / (kShapeHi - kShapeLo)));
    th.push_back(logit((std::clamp(prm.skew, kSkewLo + 1e-6, kSkewHi - 1e-6) - kSkewLo) / (kSkewHi - kSkewLo)));
    return th;
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

// Conditional-mean residuals; entries before index p are zero.
void mean_residuals(const ArmaGarchParams& prm, std::span<const double> y, std::vector<double>& eps) {
    const std::size_t n = y.size(), p = prm.p(), q = prm.q();
    eps.assign(n, 0.0);
    for (std::size_t t = p; t < n; ++t) {
        double mu = prm.mean_const;
        for (std::size_t j = 1; j <= p; ++j) mu += prm.ar[j - 1] * y[t - j];
        for (std::size_t k = 1; k <= q && k <= t; ++k) mu += prm.ma[k - 1] * eps[t - k];
        eps[t] = y[t] - mu;
    }
}

// Negative log-likelihood with scratch buffers reused across calls.
struct Likelihood {
    std::span<const double> y;
    std::vector<double> eps, var;

    double operator()(const ArmaGarchParams& prm) {
        const std::size_t n = y.size(), p = prm.p(), r = prm.r(), s = prm.s();
        mean_residuals(prm, y, eps);
        double var0 = 0.0;
        for (std::size_t t = p; t < n; ++t) var0 += eps[t] * eps[t];
        var0 /= static_cast<double>(n - p);
        if (!(var0 > 0.0) || !std::isfinite(var0)) return kInf;
        var.assign(n, var0);
        const Sged dist({0.0, 1.0, prm.shape, prm.skew});
        double ll = 0.0;
        for (std::size_t t = p; t < n; ++t) {
            double v = prm.omega;
            for (std::size_t l = 1; l <= r; ++l) v += prm.garch[l - 1] * (t >= p + l ? var[t - l] : var0);
            for (std::size_t m = 1; m <= s; ++m) {
                const double e = t >= p + m ? eps[t - m] : 0.0;
                v += prm.arch[m - 1] * (t >= p + m ? e * e : var0);
            }
            if (!(v > 0.0)) return kInf;
            var[t] = v;
            ll += dist.standard_log_density(eps[t] / std::sqrt(v)) - 0.5 * std::log(v);
        }
        return std::isfinite(ll) ? -ll : kInf;
    }
};

struct HannanRissanen {
    std::vector<double> y;
    std::vector<double> innovations;  // long-AR residuals, NaN before `long_order`
    std::size_t long_order = 0;
};

HannanRissanen long_ar_innovations(std::span<const double> y, std::size_t long_order) {
    HannanRissanen hr;
    hr.y.assign(y.begin(), y.end());
    hr.long_order = long_order;
    const std::size_t n = y.size();
    hr.innovations.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (long_order == 0) {
        const double m = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) hr.innovations[t] = y[t] - m;
        return hr;
    }
    const std::size_t rows = n - long_order;
    Eigen::MatrixXd X(rows, long_order + 1);
    Eigen::VectorXd b(rows);
    for (std::size_t t = long_order; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - long_order);
        X(row, 0) = 1.0;
        for (std::size_t j = 1; j <= long_order; ++j) X(row, static_cast<Eigen::Index>(j)) = y[t - j];
        b(row) = y[t];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd res = b - X * beta;
    for (std::size_t t = long_order; t < n; ++t) hr.innovations[t] = res(static_cast<Eigen::Index>(t - long_order));
    return hr;
}

struct ArmaRegression {
    double c = 0.0;
    std::vector<double> ar, ma;
    double sigma2 = 0.0;
    double log_likelihood = 0.0;
    std::size_t n_eff = 0;
};

ArmaRegression regress_arma(const HannanRissanen& hr, std::size_t p, std::size_t q, std::size_t start) {
    const std::size_t n = hr.y.size();
    if (start >= n || n - start < p + q + 3) throw FitError("too few observations for ARMA regression");
    const std::size_t rows = n - start;
    const std::size_t cols = 1 + p + q;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd b(rows);
    for (std::size_t t = start; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - start);
        X(row, 0) = 1.0;
        for (std::size_t j = 1; j <= p; ++j) X(row, static_cast<Eigen::Index>(j)) = hr.y[t - j];
        for (std::size_t k = 1; k <= q; ++k) X(row, static_cast<Eigen::Index>(p + k)) = hr.innovations[t - k];
        b(row) = hr.y[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) throw FitError("rank-deficient ARMA regression");
    const Eigen::VectorXd beta = qr.solve(b);
    const double rss = (b - X * beta).squaredNorm();
    ArmaRegression out;
    out.c = beta(0);
    for (std::size_t j = 0; j < p; ++j) out.ar.push_back(beta(static_cast<Eigen::Index>(1 + j)));
    for (std::size_t k = 0; k < q; ++k) out.ma.push_back(beta(static_cast<Eigen::Index>(1 + p + k)));
    out.n_eff = rows;
    out.sigma2 = rss / static_cast<double>(rows);
    if (!(out.sigma2 > 0.0)) throw FitError("zero residual variance in ARMA regression");
    out.log_likelihood =
        -0.5 * static_cast<double>(rows) * (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0);
    return out;
}

std::size_t long_order_for(std::size_t n, std::size_t max_order) {
    if (max_order == 0) return 0;
    const auto base = static_cast<std::size_t>(std::ceil(10.0 * std::log10(static_cast<double>(n))));
    return std::clamp<std::size_t>(base, max_order + 1, std::max<std::size_t>(max_order + 1, n / 8));
}

}  // namespace

double ArmaGarchParams::persistence() const noexcept {
    return std::accumulate(garch.begin(), garch.end(), 0.0) + std::accumulate(arch.begin(), arch.end(), 0.0);
}

void ArmaGarchParams::validate() const {
    if (!(omega > 0.0)) throw FitError("arma-garch: omega must be positive");
    for (double v : garch)
        if (!(v >= 0.0)) throw FitError("arma-garch: negative GARCH coefficient");
    for (double v : arch)
        if (!(v >= 0.0)) throw FitError("arma-garch: negative ARCH coefficient");
    if (!(persistence() < 1.0)) throw FitError("arma-garch: variance recursion is not covariance stationary");
    if (!(shape > 0.0) || !(skew > 0.0)) throw FitError("arma-garch: invalid SGED parameters");
}

double bic(double log_likelihood, std::size_t free_parameters, std::size_t n_obs) {
    return static_cast<double>(free_parameters) * std::log(static_cast<double>(n_obs)) - 2.0 * log_likelihood;
}

FilterResult filter(const ArmaGarchParams& prm, std::span<const double> y) {
    const std::size_t n = y.size(), p = prm.p(), q = prm.q(), r = prm.r(), s = prm.s();
    detail::require(n > p, "filter: series shorter than the AR order");
    FilterResult out;
    mean_residuals(prm, y, out.residuals);
    double var0 = 0.0;
    for (std::size_t t = p; t < n; ++t) var0 += out.residuals[t] * out.residuals[t];
    var0 /= static_cast<double>(n - p);
    if (!(var0 > 0.0)) throw FitError("filter: residual variance is zero");
    out.variances.assign(n, var0);
    const Sged dist({0.0, 1.0, prm.shape, prm.skew});
    for (std::size_t t = p; t < n; ++t) {
        double v = prm.omega;
        for (std::size_t l = 1; l <= r; ++l) v += prm.garch[l - 1] * (t >= p + l ? out.variances[t - l] : var0);
        for (std::size_t m = 1; m <= s; ++m) {
            const double e = t >= p + m ? out.residuals[t - m] : 0.0;
            v += prm.arch[m - 1] * (t >= p + m ? e * e : var0);
        }
        out.variances[t] = v;
        const double z = out.residuals[t] / std::sqrt(v);
        out.standardized.push_back(z);
        out.log_likelihood += dist.standard_log_density(z) - 0.5 * std::log(v);
    }
    out.n_terms = n - p;

    auto& st = out.final_state;
    for (std::size_t j = 1; j <= p; ++j) st.y_lags.push_back(y[n - j]);
    for (std::size_t k = 1; k <= std::max(q, s); ++k) st.eps_lags.push_back(n >= p + k ? out.residuals[n - k] : 0.0);
    for (std::size_t l = 1; l <= r; ++l) st.var_lags.push_back(n >= p + l ? out.variances[n - l] : var0);
    return out;
}

ArmaGarchState advance(const ArmaGarchParams& prm, ArmaGarchState st, std::span<const double> obs) {
    const std::size_t p = prm.p(), q = prm.q(), r = prm.r(), s = prm.s();
    for (double y : obs) {
        double mu = prm.mean_const;
        for (std::size_t j = 0; j < p; ++j) mu += prm.ar[j] * st.y_lags[j];
        for (std::size_t k = 0; k < q; ++k) mu += prm.ma[k] * st.eps_lags[k];
        double v = prm.omega;
        for (std::size_t l = 0; l < r; ++l) v += prm.garch[l] * st.var_lags[l];
        for (std::size_t m = 0; m < s; ++m) v += prm.arch[m] * st.eps_lags[m] * st.eps_lags[m];
        const double e = y - mu;
        if (p > 0) {
            std::rotate(st.y_lags.rbegin(), st.y_lags.rbegin() + 1, st.y_lags.rend());
            st.y_lags[0] = y;
        }
        if (!st.eps_lags.empty()) {
            std::rotate(st.eps_lags.rbegin(), st.eps_lags.rbegin() + 1, st.eps_lags.rend());
            st.eps_lags[0] = e;
        }
        if (r > 0) {
            std::rotate(st.var_lags.rbegin(), st.var_lags.rbegin() + 1, st.var_lags.rend());
            st.var_lags[0] = v;
        }
    }
    return st;
}

OrderSelection select_arma_order(std::span<const double> series, int max_p, int max_q) {
    detail::require(max_p >= 0 && max_q >= 0, "select_arma_order: maximum orders must be non-negative");
    OrderSelection sel;
    if (max_p == 0 && max_q == 0) {
        sel.candidates.push_back({0, 0, 0.0, true, {}});
        return sel;
    }
    const std::size_t n = series.size();
    const auto max_order = static_cast<std::size_t>(std::max(max_p, max_q));
    const std::size_t long_order = max_q > 0 ? long_order_for(n, max_order) : 0;
    const std::size_t start = long_order + max_order;
    if (n < start + 10) throw InvalidInput("select_arma_order: series too short for the order grid");

    const HannanRissanen hr = long_ar_innovations(series, long_order);
    bool found = false;
    double best_bic = kInf;
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) {
            OrderCandidate cand{p, q, kInf, false, {}};
            try {
                const ArmaRegression fit = regress_arma(hr, static_cast<std::size_t>(p), static_cast<std::size_t>(q), start);
                cand.bic = bic(fit.log_likelihood, static_cast<std::size_t>(p + q + 2), fit.n_eff);
                cand.ok = std::isfinite(cand.bic);
            } catch (const Error& e) {
                cand.error = e.what();
            }
            sel.candidates.push_back(cand);
            if (!cand.ok) continue;
            const bool better = !found || cand.bic < best_bic - 1e-12 ||
                                (std::abs(cand.bic - best_bic) <= 1e-12 &&
                                 (p + q < sel.p + sel.q || (p + q == sel.p + sel.q && p < sel.p)));
            if (better) {
                found = true;
                best_bic = cand.bic;
                sel.p = p;
                sel.q = q;
            }
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "select_arma_order: every candidate failed:";
        for (const auto& c : sel.candidates) msg << " (" << c.p << "," << c.q << "): " << c.error << ';';
        throw FitError(msg.str());
    }
    return sel;
}

ArmaGarchModel fit_arma_garch(std::span<const double> series, int p_order, int q_order,
                              const ArmaGarchFitOptions& options) {
    detail::require(p_order >= 0 && q_order >= 0, "fit_arma_garch: orders must be non-negative");
    detail::require(options.garch_order >= 0 && options.arch_order >= 0, "fit_arma_garch: invalid GARCH orders");
    const auto p = static_cast<std::size_t>(p_order), q = static_cast<std::size_t>(q_order);
    const std::size_t n = series.size();
    const std::size_t need = 10 * (p + q + 4);
    if (n < need)
        throw InvalidInput("fit_arma_garch: need at least " + std::to_string(need) + " observations, got " +
                           std::to_string(n));
    for (double v : series)
        if (!std::isfinite(v)) throw InvalidInput("fit_arma_garch: series contains non-finite values");

    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    const double var = sample_variance(series);
    if (!(var > 1e-14 * std::max(1.0, mean * mean))) throw FitError("fit_arma_garch: series has degenerate variance");
    const double sd = std::sqrt(var);
    std::vector<double> z(n);
    for (std::size_t t = 0; t < n; ++t) z[t] = (series[t] - mean) / sd;

    const Layout L{p, q, static_cast<std::size_t>(options.garch_order), static_cast<std::size_t>(options.arch_order)};

    // starting point: Hannan-Rissanen ARMA coefficients, persistent GARCH
    ArmaGarchParams init;
    init.ar.assign(p, 0.0);
    init.ma.assign(q, 0.0);
    double resid_var = 1.0;
    try {
        const std::size_t long_order = q > 0 ? long_order_for(n, std::max(p, q)) : 0;
        const HannanRissanen hr = long_ar_innovations(z, long_order);
        const ArmaRegression reg = regress_arma(hr, p, q, long_order + std::max(p, q));
        init.mean_const = reg.c;
        init.ar = reg.ar;
        init.ma = reg.ma;
        resid_var = reg.sigma2;
        if (!ar_to_pacf(init.ar)) init.ar.assign(p, 0.0);
        std::vector<double> neg(init.ma);
        for (auto& v : neg) v = -v;
        if (!ar_to_pacf(neg)) init.ma.assign(q, 0.0);
    } catch (const Error&) {
    }
    const double garch_total = L.r > 0 ? 0.85 : 0.0;
    const double arch_total = L.s > 0 ? 0.10 : 0.0;
    init.garch.assign(L.r, garch_total / static_cast<double>(std::max<std::size_t>(L.r, 1)));
    init.arch.assign(L.s, arch_total / static_cast<double>(std::max<std::size_t>(L.s, 1)));
    init.omega = resid_var * (1.0 - garch_total - arch_total);
    init.shape = 2.0;
    init.skew = 1.0;

    Likelihood nll{z, {}, {}};
    auto objective = [&](std::span<const double> th) { return nll(unpack(th, L)); };
    std::vector<double> theta0 = pack(init, L);
    const double f0 = objective(theta0);
    if (!std::isfinite(f0)) throw FitError("fit_arma_garch: likelihood is not finite at the starting point");

    if (const auto& w = options.warm_start; w && w->p() == p && w->q() == q && w->r() == L.r && w->s() == L.s) {
        ArmaGarchParams scaled = *w;
        const double ar_sum = std::accumulate(scaled.ar.begin(), scaled.ar.end(), 0.0);
        scaled.mean_const = (w->mean_const - mean * (1.0 - ar_sum)) / sd;
        scaled.omega = w->omega / var;
        std::vector<double> theta = pack(scaled, L);
        if (std::isfinite(objective(theta))) theta0 = std::move(theta);
    }
    NelderMeadResult best = nelder_mead(objective, theta0, options.optimizer);
    std::vector<double> trace = best.trace;
    int iterations = best.iterations;
    Rng rng = make_rng(options.restart_seed, p * 16 + q);
    std::normal_distribution<double> jitter(0.0, 0.2);
    for (int attempt = 0; attempt < options.restarts && !best.converged; ++attempt) {
        std::vector<double> start = best.x;
        for (auto& v : start) v += jitter(rng);
        if (!std::isfinite(objective(start))) start = best.x;
        NelderMeadResult again = nelder_mead(objective, start, options.optimizer);
        trace.insert(trace.end(), again.trace.begin(), again.trace.end());
        iterations += again.iterations;
        if (again.value <= best.value || again.converged) {
            const bool conv = again.converged;
            if (again.value <= best.value) best = std::move(again);
            best.converged = conv;
        }
    }
    if (!best.converged || !std::isfinite(best.value)) {
        std::ostringstream msg;
        msg << "fit_arma_garch(" << p << "," << q << "): optimizer did not converge after " << iterations
            << " iterations; best negative log-likelihood trace:";
        const std::size_t stride = std::max<std::size_t>(1, trace.size() / 8);
        for (std::size_t i = 0; i < trace.size(); i += stride) msg << ' ' << trace[i];
        throw FitError(msg.str());
    }

    ArmaGarchParams fitted = unpack(best.x, L);
    const double ar_sum = std::accumulate(fitted.ar.begin(), fitted.ar.end(), 0.0);
    fitted.mean_const = mean * (1.0 - ar_sum) + sd * fitted.mean_const;
    fitted.omega *= var;
    fitted.validate();

    ArmaGarchModel model;
    model.params = fitted;
    FilterResult fr = filter(fitted, series);
    for (double v : fr.variances)
        if (!(v > 0.0)) throw FitError("fit_arma_garch: non-positive conditional variance");
    model.state = std::move(fr.final_state);
    model.log_likelihood = fr.log_likelihood;
    model.n_obs = fr.n_terms;
    model.bic = bic(model.log_likelihood, fitted.free_parameters(), model.n_obs);
    model.initial_log_likelihood = -f0 - static_cast<double>(fr.n_terms) * std::log(sd);
    model.optimizer_iterations = iterations;
    model.trace = std::move(trace);
    return model;
}

std::vector<DensityForecast> forecast_density(const ArmaGarchParams& prm, const ArmaGarchState& state,
                                              std::size_t horizon, std::size_t paths, std::uint64_t seed) {
    if (horizon < 1) throw InvalidInput("forecast_density: horizon must be at least 1");
    detail::require(paths >= 1, "forecast_density: need at least one path");
    const std::size_t p = prm.p(), q = prm.q(), r = prm.r(), s = prm.s();
    detail::require(state.y_lags.size() >= p && state.eps_lags.size() >= std::max(q, s) && state.var_lags.size() >= r,
                    "forecast_density: state does not match the model orders");

    std::vector<DensityForecast> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        out[h].lead_time = h + 1;
        out[h].ensemble.resize(paths);
    }
    const Sged dist({0.0, 1.0, prm.shape, prm.skew});
    Rng rng = make_rng(seed, 0x5eedULL);
    const std::size_t ylen = p + horizon, elen = std::max(q, s) + horizon, vlen = r + horizon;
    std::vector<double> ys(ylen), es(elen), vs(vlen);
    for (std::size_t m = 0; m < paths; ++m) {
        // histories stored oldest first; index offset by the lag count
        for (std::size_t j = 0; j < p; ++j) ys[p - 1 - j] = state.y_lags[j];
        for (std::size_t k = 0; k < std::max(q, s); ++k) es[std::max(q, s) - 1 - k] = state.eps_lags[k];
        for (std::size_t l = 0; l < r; ++l) vs[r - 1 - l] = state.var_lags[l];
        for (std::size_t h = 0; h < horizon; ++h) {
            const std::size_t yt = p + h, et = std::max(q, s) + h, vt = r + h;
            double v = prm.omega;
            for (std::size_t l = 1; l <= r; ++l) v += prm.garch[l - 1] * vs[vt - l];
            for (std::size_t k = 1; k <= s; ++k) v += prm.arch[k - 1] * es[et - k] * es[et - k];
            const double e = std::sqrt(v) * dist.standard_sample(rng);
            double mu = prm.mean_const;
            for (std::size_t j = 1; j <= p; ++j) mu += prm.ar[j - 1] * ys[yt - j];
            for (std::size_t k = 1; k <= q; ++k) mu += prm.ma[k - 1] * es[et - k];
            ys[yt] = mu + e;
            es[et] = e;
            vs[vt] = v;
            out[h].ensemble[m] = ys[yt];
        }
    }
    return out;
}

std::vector<DensityForecast> forecast_density(const ArmaGarchModel& model, std::size_t horizon, std::size_t paths,
                                              std::uint64_t seed) {
    return forecast_density(model.params, model.state, horizon, paths, seed);
}

}  // namespace demand_frontier
