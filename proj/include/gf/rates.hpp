#pragma once

#include "gf/rng.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gf {

// One-sided power-law asymptote c * x^p.
struct PowerAsymptote {
    double coeff = 1.0;
    double exponent = 0.0;
};

struct RateAsymptotics {
    PowerAsymptote at_zero;
    PowerAsymptote at_infinity;
};

// Built-in rate families. Tables are piecewise linear in log-log coordinates
// and extrapolate the end segments, so their asymptotic exponents are exact
// by construction.
struct PowerLawForm {
    double c = 1.0;
    double p = 0.0;
};
struct TwoTermPowerForm {
    double c1 = 0.0, p1 = 0.0;
    double c2 = 0.0, p2 = 0.0;
};
struct LogLogTableForm {
    std::vector<double> log_x;
    std::vector<double> log_y;
};

class RateFunction {
public:
    static RateFunction constant(double c);
    static RateFunction power(double c, double p);
    static RateFunction two_term(double c1, double p1, double c2, double p2);
    // Knots must be strictly increasing and positive; values positive.
    // Declared asymptotics, when given, override the least-squares fit on the
    // 5 extreme knots; the discrepancy between the two is recorded.
    static RateFunction tabulated(const std::vector<double>& x, const std::vector<double>& y,
                                  std::optional<RateAsymptotics> declared = std::nullopt);

    double operator()(double x) const;

    const RateAsymptotics& asymptotics() const { return asym_; }
    bool is_power() const { return std::holds_alternative<PowerLawForm>(form_); }
    bool is_constant() const;
    const PowerLawForm& power_form() const { return std::get<PowerLawForm>(form_); }

    // Rate multiplied by a positive scalar (used by the phantom-jump thinning).
    RateFunction scaled(double s) const;

    // |declared - fitted| exponent discrepancies for tabulated rates, 0 otherwise.
    double declared_exponent_discrepancy() const { return exponent_discrepancy_; }

    std::string describe() const;

private:
    using Form = std::variant<PowerLawForm, TwoTermPowerForm, LogLogTableForm>;
    RateFunction(Form form, RateAsymptotics asym, double disc = 0.0)
        : form_(std::move(form)), asym_(asym), exponent_discrepancy_(disc) {}

    Form form_;
    RateAsymptotics asym_;
    double exponent_discrepancy_ = 0.0;
};

struct RateModel {
    RateFunction tau;
    RateFunction beta;

    // Positivity on a log-spaced probe grid, and for tabulated rates agreement
    // of the declared asymptotes with the table's extreme points.
    void validate(double tol = 0.05) const;
};

inline double eval_tau(const RateModel& m, double x);
inline double eval_beta(const RateModel& m, double x);

// ---------------------------------------------------------------------------
// Fragmentation kernels: the law of the relative daughter size on (0,1).

struct KernelBoundary {
    double q0 = 0.0;  // density ~ q0 * y^mu0 as y -> 0
    double mu0 = 0.0;
    double q1 = 0.0;  // density ~ q1 * (1-y)^mu1 as y -> 1
    double mu1 = 0.0;
};

class FragmentationKernel {
public:
    enum class Variant { PointMass, Uniform, BetaShape, Tabulated };

    static FragmentationKernel point_mass(double r);
    static FragmentationKernel uniform();
    // Density proportional to y^mu0 (1-y)^mu1, mu0, mu1 > -1.
    static FragmentationKernel beta_shape(double mu0, double mu1);
    // Piecewise-linear density on knots in (0,1); renormalized to mass 1 at
    // load time. A raw mass deviating from 1 by more than 1e-3 is recorded.
    static FragmentationKernel tabulated(const std::vector<double>& knots,
                                         const std::vector<double>& values,
                                         std::optional<KernelBoundary> declared = std::nullopt);

    Variant variant() const { return variant_; }
    bool has_density() const { return variant_ != Variant::PointMass; }
    double point_mass_location() const;

    // Density value; only valid for density kernels and y in (0,1).
    double density(double y) const;
    // Q((0, y]); exact per variant (incomplete beta for BetaShape).
    double cdf(double y) const;

    std::optional<KernelBoundary> boundary() const { return boundary_; }

    // M(a) = integral of y^a Q(dy). Divergent moments (a <= -(mu0+1) for
    // density kernels) return +infinity; divergence is a result, not an error.
    double moment(double a) const;

    double sample(Rng& rng) const;

    // Raw mass of a tabulated density before renormalization, 1 otherwise.
    double raw_mass() const { return raw_mass_; }
    bool renormalization_warning() const { return std::abs(raw_mass_ - 1.0) > 1e-3; }

    std::string describe() const;

private:
    FragmentationKernel() = default;

    Variant variant_ = Variant::Uniform;
    double r_ = 0.5;          // PointMass
    double mu0_ = 0.0;        // BetaShape
    double mu1_ = 0.0;
    double beta_norm_ = 1.0;  // BetaShape normalization, computed by quadrature
    std::vector<double> knots_;   // Tabulated
    std::vector<double> values_;  // renormalized density at knots
    std::vector<double> cdf_;     // CDF at knots
    double raw_mass_ = 1.0;
    std::optional<KernelBoundary> boundary_;
};

inline double kernel_moment(const FragmentationKernel& k, double a) { return k.moment(a); }
inline double sample_kernel(const FragmentationKernel& k, Rng& rng) { return k.sample(rng); }

// Phantom-jump thinning: a kernel with an atom p1 at y=1 and remainder Q' is
// replaced by ((1-p1) beta, Q'); the generator is unchanged.
struct ThinningResult {
    RateFunction beta;
    FragmentationKernel kernel;
};
ThinningResult strip_phantom_jumps(const RateFunction& beta, double atom_at_one,
                                   const FragmentationKernel& remainder);

inline double eval_tau(const RateModel& m, double x) { return m.tau(x); }
inline double eval_beta(const RateModel& m, double x) { return m.beta(x); }

}  // namespace gf
