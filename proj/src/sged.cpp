#include "demand_frontier/sged.hpp"

#include "demand_frontier/error.hpp"

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

namespace demand_frontier {

Sged::Sged(const SgedParams& params) : p_(params) {
    if (!(p_.scale > 0.0) || !(p_.shape > 0.0) || !(p_.skew > 0.0) || !std::isfinite(p_.location) ||
        !std::isfinite(p_.scale) || !std::isfinite(p_.shape) || !std::isfinite(p_.skew))
        throw InvalidInput("sged: scale, shape and skew must be positive and finite");
    const double nu = p_.shape;
    const double xi = p_.skew;
    lambda_ = std::sqrt(std::pow(2.0, -2.0 / nu) * std::exp(std::lgamma(1.0 / nu) - std::lgamma(3.0 / nu)));
    log_norm_ = std::log(nu) - std::log(lambda_) - (1.0 + 1.0 / nu) * std::log(2.0) - std::lgamma(1.0 / nu);
    const double m1 = lambda_ * std::pow(2.0, 1.0 / nu) * std::exp(std::lgamma(2.0 / nu) - std::lgamma(1.0 / nu));
    mu_ = m1 * (xi - 1.0 / xi);
    sigma_ = std::sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0);
    log_skew_norm_ = std::log(2.0 / (xi + 1.0 / xi)) + std::log(sigma_);
}

double Sged::base_log_density(double u) const noexcept {
    return log_norm_ - 0.5 * std::pow(std::abs(u) / lambda_, p_.shape);
}

double Sged::base_cdf(double u) const {
    const double a = 1.0 / p_.shape;
    const double half = 0.5 * boost::math::gamma_p(a, 0.5 * std::pow(std::abs(u) / lambda_, p_.shape));
    return u >= 0.0 ? 0.5 + half : 0.5 - half;
}

double Sged::base_quantile(double p) const {
    if (p == 0.5) return 0.0;
    const double a = 1.0 / p_.shape;
    const double tail = std::abs(2.0 * p - 1.0);
    const double mag = lambda_ * std::pow(2.0 * boost::math::gamma_p_inv(a, tail), 1.0 / p_.shape);
    return p > 0.5 ? mag : -mag;
}

double Sged::standard_log_density(double z) const noexcept {
    const double w = z * sigma_ + mu_;
    const double u = w >= 0.0 ? w / p_.skew : w * p_.skew;
    return log_skew_norm_ + base_log_density(u);
}

double Sged::standard_cdf(double z) const {
    const double xi = p_.skew;
    const double w = z * sigma_ + mu_;
    const double xi2 = xi * xi;
    if (w < 0.0) return 2.0 / (xi2 + 1.0) * base_cdf(w * xi);
    return 1.0 / (1.0 + xi2) + 2.0 * xi2 / (1.0 + xi2) * (base_cdf(w / xi) - 0.5);
}

double Sged::standard_sample(Rng& rng) const {
    std::gamma_distribution<double> gamma(1.0 / p_.shape, 1.0);
    const double mag = lambda_ * std::pow(2.0 * gamma(rng), 1.0 / p_.shape);
    const double xi = p_.skew;
    const double w = uniform01(rng) < xi * xi / (1.0 + xi * xi) ? xi * mag : -mag / xi;
    return (w - mu_) / sigma_;
}

double Sged::log_density(double x) const {
    const double z = (x - p_.location) / p_.scale;
    return standard_log_density(z) - std::log(p_.scale);
}

double Sged::density(double x) const { return std::exp(log_density(x)); }

double Sged::cdf(double x) const { return standard_cdf((x - p_.location) / p_.scale); }

double Sged::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InvalidInput("sged: quantile level must lie strictly inside (0, 1)");
    const double xi = p_.skew;
    const double xi2 = xi * xi;
    const double split = 1.0 / (1.0 + xi2);
    double w = 0.0;
    if (u < split)
        w = base_quantile(u * (1.0 + xi2) / 2.0) / xi;
    else
        w = xi * base_quantile(0.5 + (u - split) * (1.0 + xi2) / (2.0 * xi2));
    const double z = (w - mu_) / sigma_;
    return p_.location + p_.scale * z;
}

double Sged::sample(Rng& rng) const { return p_.location + p_.scale * standard_sample(rng); }

}  // namespace demand_frontier
