#pragma once

#include "demand_frontier/nelder_mead.hpp"
#include "demand_frontier/sged.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace demand_frontier {

/// Predictive distribution at one lead time, represented by samples.
struct DensityForecast {
    std::size_t lead_time = 1;
    std::vector<double> ensemble;

    [[nodiscard]] double mean() const;
    [[nodiscard]] double median() const;
    /// Type-7 (linear interpolation) sample quantile.
    [[nodiscard]] double quantile(double level) const;
    [[nodiscard]] std::vector<double> quantiles(std::span<const double> levels) const;
};

// ---- ARMA(p, q) - GARCH(r, s) with SGED innovations -------------------------
//
//   y_t       = c + sum_j ar_j y_{t-j} + sum_k ma_k e_{t-k} + e_t
//   sigma^2_t = omega + sum_l garch_l sigma^2_{t-l} + sum_m arch_m e^2_{t-m}
//   e_t       = sigma_t eta_t,   eta_t ~ SGED(0, 1, shape, skew)

struct ArmaGarchParams {
    double mean_const = 0.0;
    std::vector<double> ar;
    std::vector<double> ma;
    double omega = 0.1;
    std::vector<double> garch;  ///< lagged conditional variances
    std::vector<double> arch;   ///< lagged squared errors
    double shape = 2.0;
    double skew = 1.0;

    [[nodiscard]] std::size_t p() const noexcept { return ar.size(); }
    [[nodiscard]] std::size_t q() const noexcept { return ma.size(); }
    [[nodiscard]] std::size_t r() const noexcept { return garch.size(); }
    [[nodiscard]] std::size_t s() const noexcept { return arch.size(); }
    [[nodiscard]] std::size_t free_parameters() const noexcept { return 1 + p() + q() + 1 + r() + s() + 2; }
    [[nodiscard]] double persistence() const noexcept;
    /// Throws FitError when omega <= 0, a coefficient is negative or the
    /// variance recursion is not covariance stationary.
    void validate() const;
};

/// Recursion state at the end of a filtered sample. Lags are most recent first.
struct ArmaGarchState {
    std::vector<double> y_lags;
    std::vector<double> eps_lags;
    std::vector<double> var_lags;
};

struct ArmaGarchModel {
    ArmaGarchParams params;
    ArmaGarchState state;
    double log_likelihood = 0.0;
    double initial_log_likelihood = 0.0;
    double bic = 0.0;
    std::size_t n_obs = 0;
    int optimizer_iterations = 0;
    std::vector<double> trace;
};

struct FilterResult {
    std::vector<double> residuals;
    std::vector<double> variances;
    std::vector<double> standardized;  ///< residual / sigma, from the first likelihood term on
    double log_likelihood = 0.0;
    std::size_t n_terms = 0;
    ArmaGarchState final_state;
};

/// Runs the recursions over `series` from scratch (pre-sample errors zero,
/// pre-sample variance the sample variance).
[[nodiscard]] FilterResult filter(const ArmaGarchParams& params, std::span<const double> series);

/// Extends a state with further observations without refitting.
[[nodiscard]] ArmaGarchState advance(const ArmaGarchParams& params, ArmaGarchState state,
                                     std::span<const double> observations);

[[nodiscard]] double bic(double log_likelihood, std::size_t free_parameters, std::size_t n_obs);

struct OrderCandidate {
    int p = 0;
    int q = 0;
    double bic = 0.0;
    bool ok = false;
    std::string error;
};

struct OrderSelection {
    int p = 0;
    int q = 0;
    std::vector<OrderCandidate> candidates;
};

/// Grid search over ARMA orders by Gaussian BIC. Candidates are fitted by
/// Hannan-Rissanen regression on a common sample; ties go to the smaller
/// p + q, then the smaller p.
[[nodiscard]] OrderSelection select_arma_order(std::span<const double> series, int max_p, int max_q);

struct ArmaGarchFitOptions {
    int garch_order = 1;
    int arch_order = 1;
    NelderMeadOptions optimizer{500, 1e-7, 1e-5, 0.1};
    int restarts = 1;
    std::uint64_t restart_seed = 7;
    /// Starting values from an earlier fit of the same orders; ignored when
    /// the orders differ or the likelihood is not finite there.
    std::optional<ArmaGarchParams> warm_start;
};

/// Maximum-likelihood fit. Throws FitError on degenerate input or when the
/// optimizer does not converge within its budget and restarts.
[[nodiscard]] ArmaGarchModel fit_arma_garch(std::span<const double> series, int p, int q,
                                            const ArmaGarchFitOptions& options = {});

/// Monte-Carlo density forecasts for leads 1..horizon from `state`.
[[nodiscard]] std::vector<DensityForecast> forecast_density(const ArmaGarchParams& params, const ArmaGarchState& state,
                                                            std::size_t horizon, std::size_t paths,
                                                            std::uint64_t seed);
[[nodiscard]] std::vector<DensityForecast> forecast_density(const ArmaGarchModel& model, std::size_t horizon,
                                                            std::size_t paths = 1000, std::uint64_t seed = 1);

/// Pearson chi-squared goodness of fit of the PIT of standardised residuals
/// over `bins` equiprobable bins.
[[nodiscard]] double gof_pvalue(const ArmaGarchParams& params, std::span<const double> series, int bins = 20);
[[nodiscard]] double gof_pvalue_from_pit(std::span<const double> pit, int bins = 20);

// ---- Unconditional kernel density -------------------------------------------

struct KdeModel {
    std::vector<double> observations;
    double bandwidth = 0.0;

    [[nodiscard]] double density(double y) const;
    [[nodiscard]] double mean() const;
};

[[nodiscard]] double silverman_bandwidth(std::span<const double> window);
/// Gaussian-kernel KDE with Silverman's rule-of-thumb bandwidth.
[[nodiscard]] KdeModel fit_kde(std::span<const double> window);
/// The same unconditional ensemble for every lead 1..horizon.
[[nodiscard]] std::vector<DensityForecast> kde_forecast(const KdeModel& model, std::size_t horizon,
                                                        std::size_t samples = 1000, std::uint64_t seed = 1);

// ---- Model selection ----------------------------------------------------------

enum class ModelKind { arma_garch, kde };

[[nodiscard]] const char* to_string(ModelKind kind) noexcept;

/// ARMA-GARCH is kept when its goodness-of-fit p-value is at least the
/// lead time's threshold.
[[nodiscard]] constexpr ModelKind decide_model(double p_value, double threshold) noexcept {
    return p_value >= threshold ? ModelKind::arma_garch : ModelKind::kde;
}

struct ModelSelector {
    std::map<std::size_t, double> thresholds;  ///< lead time -> delta
    double default_threshold = 0.0;
    int gof_bins = 20;

    [[nodiscard]] double threshold(std::size_t lead_time) const;
    void validate() const;
};

using PValueFn = std::function<double(const ArmaGarchModel&, std::span<const double>)>;

struct ForecastOptions {
    int max_p = 3;
    int max_q = 3;
    ArmaGarchFitOptions fit{};
    std::size_t ensemble_size = 1000;
    std::size_t kde_window = 0;  ///< 0 uses the whole training remainder
    /// Replaces the goodness-of-fit test; used to inject p-values.
    PValueFn p_value_override;
};

/// Both candidate models for one series. The ARMA-GARCH slot is empty when
/// its fit failed; `p_value` is NaN in that case.
struct CandidateModels {
    std::optional<ArmaGarchModel> arma_garch;
    std::optional<KdeModel> kde;
    double p_value = 0.0;
    OrderSelection orders;
    std::string arma_garch_error;
    std::string kde_error;

    /// Throws FitError when neither model is available.
    [[nodiscard]] ModelKind choose(double threshold) const;
};

[[nodiscard]] CandidateModels fit_candidates(std::span<const double> series, const ForecastOptions& options,
                                             int gof_bins = 20);

struct SelectedModel {
    ModelKind kind = ModelKind::kde;
    std::optional<ArmaGarchModel> arma_garch;
    std::optional<KdeModel> kde;
    double p_value = 0.0;
};

[[nodiscard]] SelectedModel select_model(std::span<const double> series, const ModelSelector& selector,
                                         std::size_t lead_time, const ForecastOptions& options = {});

/// Shifts each remainder ensemble by the projected seasonal and trend at its lead.
[[nodiscard]] DensityForecast compose_forecast(const DensityForecast& remainder, double seasonal, double trend);
[[nodiscard]] std::vector<DensityForecast> compose_forecast(std::span<const DensityForecast> remainder,
                                                            std::span<const double> seasonal,
                                                            std::span<const double> trend);

}  // namespace demand_frontier
