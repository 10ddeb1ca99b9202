#pragma once

#include "demand_frontier/rng.hpp"

namespace demand_frontier {

struct SgedParams {
    double location = 0.0;
    double scale = 1.0;  ///< standard deviation of the distribution
    double shape = 2.0;  ///< tail exponent nu; 2 is Gaussian, 1 is Laplace
    double skew = 1.0;   ///< Fernandez-Steel skew xi; 1 is symmetric
};

/**
 * Skew generalized error distribution.
 *
 * A unit-variance GED is skewed by Fernandez-Steel inverse scale factors and
 * then re-standardised to zero mean and unit variance, so `location` and
 * `scale` are the mean and standard deviation. With skew = 1 this is the
 * symmetric GED; with shape = 2 and skew = 1 it is the normal distribution.
 */
class Sged {
public:
    explicit Sged(const SgedParams& params);

    [[nodiscard]] const SgedParams& params() const noexcept { return p_; }

    [[nodiscard]] double density(double x) const;
    [[nodiscard]] double log_density(double x) const;
    [[nodiscard]] double cdf(double x) const;
    /// Throws InvalidInput for u outside (0, 1).
    [[nodiscard]] double quantile(double u) const;
    [[nodiscard]] double sample(Rng& rng) const;

    /// Log-density of the standardised variable (location 0, scale 1).
    [[nodiscard]] double standard_log_density(double z) const noexcept;
    [[nodiscard]] double standard_cdf(double z) const;
    [[nodiscard]] double standard_sample(Rng& rng) const;

private:
    double base_log_density(double u) const noexcept;
    double base_cdf(double u) const;
    double base_quantile(double p) const;

    SgedParams p_;
    double lambda_ = 1.0;     // GED scale giving unit variance
    double log_norm_ = 0.0;   // log of the GED normalising constant
    double mu_ = 0.0;         // mean of the skewed, unstandardised variable
    double sigma_ = 1.0;      // its standard deviation
    double log_skew_norm_ = 0.0;
};

}  // namespace demand_frontier
