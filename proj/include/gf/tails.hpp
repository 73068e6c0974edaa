#pragma once

#include "gf/lyapunov.hpp"
#include "gf/pdmp.hpp"
#include "gf/rates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gf {

struct LeftTailFit {
    double alpha0 = 0.0;     // fitted left power-law exponent of the density
    double std_error = 0.0;
    double x_lo = 0.0;       // fit window
    double x_hi = 0.0;
    double r_squared = 0.0;
    std::size_t sample_count = 0;
};

struct RightTailFit {
    double theta = 0.0;      // stretch exponent of exp(-eta x^theta)
    double theta_se = 0.0;
    double eta = 0.0;        // fitted with theta held fixed
    double eta_se = 0.0;
    std::optional<double> alpha_inf;  // polynomial correction, low confidence
    double x_lo = 0.0;
    double x_hi = 0.0;
    double r_squared = 0.0;
    std::size_t sample_count = 0;
};

struct TailPrediction {
    double alpha0 = 0.0;       // mu0 + 1 - nu0
    bool left_valid = false;   // requires a density kernel and mu0 + 2 - nu0 > 0
    std::string left_invalid_reason;
    double theta = 0.0;        // gamma_inf + 1 - nu_inf
    double eta = 0.0;          // C beta_inf / (theta tau_inf)
};

TailPrediction predict_tails(const RateModel& model, const FragmentationKernel& kernel, double C);

// Least-squares slope of log histogram density vs log x over the lowest
// decade holding >= 200 samples; the window widens until R^2 >= 0.95.
LeftTailFit fit_left_tail(const EmpiricalDistribution& dist);

// Two-stage fit on the empirical survival S: log(-log S) on log x gives
// theta; then -log S on x^theta gives eta.
RightTailFit fit_right_tail(const EmpiricalDistribution& dist);

struct StationarityResidual {
    std::string name;
    double residual = 0.0;    // sample average of L f over the empirical law
    double std_error = 0.0;   // bootstrap, 200 resamples
    bool skipped = false;
    std::string skip_reason;
};

struct NamedGenFunction {
    std::string name;
    GenFunction fn;
};

// Sample average of L f over the empirical distribution for each f; zero at
// stationarity. Functions with divergent kernel integrals are skipped.
std::vector<StationarityResidual> stationarity_residual(const RateModel& model,
                                                        const FragmentationKernel& kernel,
                                                        const EmpiricalDistribution& dist,
                                                        const std::vector<NamedGenFunction>& fns,
                                                        std::uint64_t bootstrap_seed = 7);

// Default battery: x, x^2, log x, x^{-1/2} (when M(-1/2) is finite), bump.
std::vector<NamedGenFunction> default_test_functions(const FragmentationKernel& kernel);

double empirical_moment(const EmpiricalDistribution& dist,
                        const std::function<double(double)>& g);

}  // namespace gf
