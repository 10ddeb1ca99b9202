#pragma once

#include <functional>
#include <span>
#include <vector>

namespace demand_frontier {

struct NelderMeadOptions {
    int max_iterations = 500;
    double f_tolerance = 1e-9;  ///< relative spread of simplex values at convergence
    double x_tolerance = 1e-7;  ///< absolute simplex extent at convergence
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> trace;  ///< best value after each iteration
};

/// Derivative-free minimisation with dimension-adaptive coefficients
/// (Gao & Han, 2012). Non-finite objective values are treated as +inf.
[[nodiscard]] NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                                           std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace demand_frontier
