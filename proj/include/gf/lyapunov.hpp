#pragma once

#include "gf/rates.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gf {

// A test function for the generator. When df is absent the derivative is
// taken by 5-point finite differences with step x*1e-5. small_x_power
// declares f(u) ~ u^p as u -> 0 and feeds the kernel-integrability guard.
struct GenFunction {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::optional<double> small_x_power;
};

// L f(x) = tau(x) f'(x) + beta(x) int_0^1 [f(xy) - f(x)] Q(dy).
// Throws InfinityResult when the kernel integral diverges.
double apply_generator(const RateModel& model, const FragmentationKernel& kernel,
                       const GenFunction& f, double x);

// Smooth norm-like function: x^{-b} on (0,1], x^a on [2,inf), spliced on
// [1,2] by the quintic matching value and two derivatives at both ends.
class LyapunovSpec {
public:
    LyapunovSpec(double a, double b);

    double a() const { return a_; }
    double b() const { return b_; }
    double value(double x) const;
    double derivative(double x) const;
    // Convexity of the splice is not enforced, only checked a posteriori.
    bool splice_convex(int probe_points = 65) const;
    GenFunction as_gen_function() const;

    // Default exponent selection: largest a on {0.5,...,8} with
    // M(a) < 1 - 1e-3, largest b on a 0.25-step grid with M(-b) < 1e3
    // (capped below mu0+1 for density kernels).
    static std::pair<double, double> select_exponents(const FragmentationKernel& kernel);

private:
    double a_;
    double b_;
    std::array<double, 6> coef_{};  // quintic in s = x-1 on [1,2]
};

// Exponential-tail variant x^{-eps} e^{eta x^theta} for x >= 1, extended
// smoothly and boundedly below 1 (the extension only matters inside the
// kernel integral).
struct ExpLyapunov {
    double eps;
    double eta;
    double theta;

    double value(double x) const;
    double derivative(double x) const;
    GenFunction as_gen_function() const;

    // theta = gamma_inf + 1 - nu_inf and eta = C beta_inf / (theta tau_inf).
    static ExpLyapunov from_model(const RateModel& model, double eps, double C);
};

struct DriftValue {
    double exact;                      // L V(x) via apply_generator
    std::optional<double> reference;   // closed form (x<=1) or upper bound (x>=2)
    bool reference_is_bound = false;   // true on the x>=2 branch
};
DriftValue drift_V(const RateModel& model, const FragmentationKernel& kernel,
                   const LyapunovSpec& spec, double x);

struct ConditionCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double margin = 0.0;  // rhs - lhs for "lhs < rhs" style conditions
};

struct BalanceClassification {
    bool harris_recurrent = false;
    bool positive_recurrent = false;
    bool exp_ergodic = false;
    bool critical_at_zero = false;
    bool critical_at_infinity = false;
    std::vector<ConditionCheck> checks;

    // First failing condition, empty when harris_recurrent.
    std::string failing_condition() const;
};

BalanceClassification classify_balance(const RateModel& model, const FragmentationKernel& kernel,
                                       double a, double b);

struct BoundVResult {
    double sup = 0.0;
    double x_at_sup = 0.0;
    bool pass = false;
};
// sup over x >= x0 of int y^{-eps} exp(eta x^theta (y^theta - 1)) Q(dy),
// evaluated on a log grid of x in [x0, 1000 x0]; pass iff sup < 1 - C.
BoundVResult check_bound_v(const FragmentationKernel& kernel, double theta, double eta, double eps,
                           double x0, double C);

struct VtildeDrift {
    double exact = 0.0;
    double bound = 0.0;  // -(eps tau_inf / 4) x^{nu_inf - 1} V~(x)
    bool satisfies_bound = false;
};
VtildeDrift drift_Vtilde(const RateModel& model, const FragmentationKernel& kernel,
                         const ExpLyapunov& spec, double x);

struct DriftReport {
    std::vector<double> grid;
    std::vector<double> drift;          // L V on the grid
    double slope_at_zero = 0.0;         // log-log slope of |L V| near 0
    double slope_at_infinity = 0.0;
    bool compact_found = false;
    double A = 1.0;                     // drift negative outside [1/A, A]
    double alpha = 0.0;                 // L V <= -alpha V + alpha' 1_{[1/A,A]}
    double alpha_prime = 0.0;
};
DriftReport drift_report(const RateModel& model, const FragmentationKernel& kernel,
                         const LyapunovSpec& spec, double x_lo = 1e-4, double x_hi = 1e4,
                         int points = 81);

}  // namespace gf
