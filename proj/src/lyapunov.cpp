#include "gf/lyapunov.hpp"

#include "gf/errors.hpp"
#include "gf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrictMargin = 1e-9;   // margin for strict asymptotic inequalities
constexpr double kExponentRelTol = 1e-6;  // exact-equality detection on exponents

double finite_difference(const std::function<double(double)>& f, double x) {
    const double h = x * 1e-5;
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

// Kernel expectation of y -> g(y) against a density kernel.
double kernel_integral(const FragmentationKernel& kernel, const std::function<double(double)>& g) {
    return quad::integrate_unit_singular([&](double y) { return g(y) * kernel.density(y); });
}

}  // namespace

double apply_generator(const RateModel& model, const FragmentationKernel& kernel,
                       const GenFunction& fn, double x) {
    if (!(x > 0.0)) throw DomainError("apply_generator: x must be positive");
    const double fx = fn.f(x);
    const double dfx = fn.df ? fn.df(x) : finite_difference(fn.f, x);

    double jump;
    if (kernel.variant() == FragmentationKernel::Variant::PointMass) {
        jump = fn.f(x * kernel.point_mass_location()) - fx;
    } else {
        if (fn.small_x_power) {
            const auto bd = kernel.boundary();
            const double mu0 = bd ? bd->mu0 : 0.0;
            if (*fn.small_x_power + mu0 <= -1.0)
                throw InfinityResult("apply_generator: kernel moment M(" +
                                     std::to_string(*fn.small_x_power) + ") diverges");
        }
        jump = kernel_integral(kernel, [&](double y) { return fn.f(x * y) - fx; });
    }
    return model.tau(x) * dfx + model.beta(x) * jump;
}

// ---------------------------------------------------------------------------
// Polynomial Lyapunov function

LyapunovSpec::LyapunovSpec(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("LyapunovSpec: a and b must be positive");
    // Quintic h(s) on s = x-1 in [0,1] matching x^{-b} at x=1 and x^a at x=2
    // with two continuous derivatives.
    const double c0 = 1.0, c1 = -b, c2 = 0.5 * b * (b + 1.0);
    const double v1 = std::pow(2.0, a);
    const double d1 = a * std::pow(2.0, a - 1.0);
    const double s1 = a * (a - 1.0) * std::pow(2.0, a - 2.0);
    const double r0 = v1 - c0 - c1 - c2;
    const double r1 = d1 - c1 - 2.0 * c2;
    const double r2 = s1 - 2.0 * c2;
    coef_ = {c0,
             c1,
             c2,
             10.0 * r0 - 4.0 * r1 + 0.5 * r2,
             -15.0 * r0 + 7.0 * r1 - r2,
             6.0 * r0 - 3.0 * r1 + 0.5 * r2};
}

double LyapunovSpec::value(double x) const {
    if (!(x > 0.0)) throw DomainError("LyapunovSpec::value: x must be positive");
    if (x <= 1.0) return std::pow(x, -b_);
    if (x >= 2.0) return std::pow(x, a_);
    const double s = x - 1.0;
    double v = 0.0;
    for (int k = 5; k >= 0; --k) v = v * s + coef_[k];
    return v;
}

double LyapunovSpec::derivative(double x) const {
    if (!(x > 0.0)) throw DomainError("LyapunovSpec::derivative: x must be positive");
    if (x <= 1.0) return -b_ * std::pow(x, -b_ - 1.0);
    if (x >= 2.0) return a_ * std::pow(x, a_ - 1.0);
    const double s = x - 1.0;
    double v = 0.0;
    for (int k = 5; k >= 1; --k) v = v * s + k * coef_[k];
    return v;
}

bool LyapunovSpec::splice_convex(int probe_points) const {
    for (int i = 0; i < probe_points; ++i) {
        const double s = static_cast<double>(i) / (probe_points - 1);
        double dd = 0.0;
        for (int k = 5; k >= 2; --k) dd = dd * s + k * (k - 1) * coef_[k];
        if (dd < -1e-9) return false;
    }
    return true;
}

GenFunction LyapunovSpec::as_gen_function() const {
    return GenFunction{[*this](double x) { return value(x); },
                       [*this](double x) { return derivative(x); }, -b_};
}

std::pair<double, double> LyapunovSpec::select_exponents(const FragmentationKernel& kernel) {
    double a = 0.0;
    for (double cand = 0.5; cand <= 8.0 + 1e-12; cand += 0.5)
        if (kernel.moment(cand) < 1.0 - 1e-3) a = cand;
    double b_cap = 8.0;
    if (kernel.has_density() && kernel.boundary()) b_cap = kernel.boundary()->mu0 + 1.0 - 1e-3;
    double b = 0.0;
    for (double cand = 0.25; cand <= b_cap + 1e-12; cand += 0.25)
        if (kernel.moment(-cand) < 1e3) b = cand;
    if (a == 0.0 || b == 0.0)
        throw DomainError("select_exponents: no admissible (a,b) on the default grids");
    return {a, b};
}

// ---------------------------------------------------------------------------
// Exponential Lyapunov function

double ExpLyapunov::value(double x) const {
    if (!(x > 0.0)) throw DomainError("ExpLyapunov::value: x must be positive");
    if (x >= 1.0) return std::pow(x, -eps) * std::exp(eta * std::pow(x, theta));
    // Bounded C^2 extension below 1: quadratic continuation of the exponent
    // w(x) = eta x^theta - eps log x around x = 1.
    const double u = x - 1.0;
    const double w1 = eta * theta - eps;
    const double w2 = eta * theta * (theta - 1.0) + eps;
    return std::exp(eta + w1 * u + 0.5 * w2 * u * u);
}

double ExpLyapunov::derivative(double x) const {
    if (!(x > 0.0)) throw DomainError("ExpLyapunov::derivative: x must be positive");
    if (x >= 1.0)
        return value(x) * (eta * theta * std::pow(x, theta - 1.0) - eps / x);
    const double u = x - 1.0;
    const double w1 = eta * theta - eps;
    const double w2 = eta * theta * (theta - 1.0) + eps;
    return value(x) * (w1 + w2 * u);
}

GenFunction ExpLyapunov::as_gen_function() const {
    return GenFunction{[*this](double x) { return value(x); },
                       [*this](double x) { return derivative(x); }, 0.0};
}

ExpLyapunov ExpLyapunov::from_model(const RateModel& model, double eps, double C) {
    if (!(C > 0.0 && C < 1.0)) throw DomainError("ExpLyapunov: C must lie in (0,1)");
    const auto& tau_inf = model.tau.asymptotics().at_infinity;
    const auto& beta_inf = model.beta.asymptotics().at_infinity;
    const double theta = beta_inf.exponent + 1.0 - tau_inf.exponent;
    if (!(theta > 0.0))
        throw DomainError("ExpLyapunov: theta = gamma_inf + 1 - nu_inf must be positive");
    const double eta = C * beta_inf.coeff / (theta * tau_inf.coeff);
    return ExpLyapunov{eps, eta, theta};
}

// ---------------------------------------------------------------------------

DriftValue drift_V(const RateModel& model, const FragmentationKernel& kernel,
                   const LyapunovSpec& spec, double x) {
    const double m_negb = kernel.moment(-spec.b());
    if (!std::isfinite(m_negb))
        throw InfinityResult("drift_V: M(-b) diverges for b=" + std::to_string(spec.b()));
    DriftValue out;
    out.exact = apply_generator(model, kernel, spec.as_gen_function(), x);
    if (x <= 1.0) {
        const double v = spec.value(x);
        out.reference =
            (-spec.b() * model.tau(x) / x + model.beta(x) * (m_negb - 1.0)) * v;
        out.reference_is_bound = false;
    } else if (x >= 2.0) {
        const double a = spec.a(), b = spec.b();
        const double v = spec.value(x);
        const double m_a = kernel.moment(a);
        out.reference = (a * model.tau(x) / x - model.beta(x)) * v +
                        model.beta(x) * (std::pow(x, -b) * m_negb + std::pow(2.0, a) +
                                         std::pow(x, a) * m_a);
        out.reference_is_bound = true;
    }
    return out;
}

namespace {

ConditionCheck make_check(std::string name, double lhs, double rhs, bool strict) {
    ConditionCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = rhs - lhs;
    c.satisfied = strict ? (lhs < rhs - kStrictMargin) : (lhs <= rhs + kStrictMargin);
    return c;
}

bool exponents_equal(double u, double v) {
    return std::abs(u - v) <= kExponentRelTol * std::max({1.0, std::abs(u), std::abs(v)});
}

}  // namespace

std::string BalanceClassification::failing_condition() const {
    for (const auto& c : checks)
        if (!c.satisfied) return c.name;
    return {};
}

BalanceClassification classify_balance(const RateModel& model, const FragmentationKernel& kernel,
                                       double a, double b) {
    const auto& t0 = model.tau.asymptotics().at_zero;
    const auto& ti = model.tau.asymptotics().at_infinity;
    const auto& b0 = model.beta.asymptotics().at_zero;
    const auto& bi = model.beta.asymptotics().at_infinity;
    const double nu0 = t0.exponent, nu_inf = ti.exponent;
    const double g0 = b0.exponent, g_inf = bi.exponent;

    BalanceClassification r;
    const double m_a = kernel.moment(a);
    const double m_negb = kernel.moment(-b);
    r.checks.push_back(make_check("moment M(a) < 1", m_a, 1.0, true));
    const bool m_negb_finite = std::isfinite(m_negb);
    {
        ConditionCheck c;
        c.name = "moment M(-b) finite";
        c.lhs = m_negb;
        c.rhs = kInf;
        c.satisfied = m_negb_finite;
        c.margin = m_negb_finite ? kInf : 0.0;
        r.checks.push_back(c);
    }
    const bool moments_ok = r.checks[0].satisfied && m_negb_finite;

    // Balance at 0: gamma_0 > nu_0 - 1 strictly, or equality together with
    // b / (M(-b) - 1) < beta_0 / tau_0.
    bool zero_ok;
    if (exponents_equal(g0, nu0 - 1.0)) {
        r.critical_at_zero = true;
        const double lhs = m_negb_finite && m_negb > 1.0 ? b / (m_negb - 1.0) : kInf;
        auto c = make_check("critical balance at 0: b/(M(-b)-1) < beta0/tau0", lhs,
                            b0.coeff / t0.coeff, true);
        r.checks.push_back(c);
        zero_ok = c.satisfied;
    } else {
        auto c = make_check("balance at 0: gamma0 > nu0 - 1", nu0 - 1.0, g0, true);
        r.checks.push_back(c);
        zero_ok = c.satisfied;
    }

    // Balance at infinity: gamma_inf > nu_inf - 1 strictly, or equality with
    // a / (1 - M(a)) < tau_inf / beta_inf.
    bool inf_ok;
    if (exponents_equal(g_inf, nu_inf - 1.0)) {
        r.critical_at_infinity = true;
        const double lhs = m_a < 1.0 ? a / (1.0 - m_a) : kInf;
        auto c = make_check("critical balance at infinity: a/(1-M(a)) < tauInf/betaInf", lhs,
                            ti.coeff / bi.coeff, true);
        r.checks.push_back(c);
        inf_ok = c.satisfied;
    } else {
        auto c = make_check("balance at infinity: gammaInf > nuInf - 1", nu_inf - 1.0, g_inf, true);
        r.checks.push_back(c);
        inf_ok = c.satisfied;
    }

    r.harris_recurrent = moments_ok && zero_ok && inf_ok;

    auto cb = make_check("positive recurrence: b >= nu0 - 1", nu0 - 1.0, b, false);
    auto ca = make_check("positive recurrence: a >= -gammaInf", -g_inf, a, false);
    r.checks.push_back(cb);
    r.checks.push_back(ca);
    r.positive_recurrent = r.harris_recurrent && cb.satisfied && ca.satisfied;

    auto cn = make_check("exponential ergodicity: nu0 <= 1", nu0, 1.0, false);
    auto cg = make_check("exponential ergodicity: gammaInf >= 0", 0.0, g_inf, false);
    r.checks.push_back(cn);
    r.checks.push_back(cg);
    r.exp_ergodic = r.positive_recurrent && cn.satisfied && cg.satisfied;
    return r;
}

BoundVResult check_bound_v(const FragmentationKernel& kernel, double theta, double eta, double eps,
                           double x0, double C) {
    if (!(theta > 0.0) || !(eta >= 0.0) || !(eps >= 0.0))
        throw DomainError("check_bound_v: need theta > 0, eta >= 0, eps >= 0");
    if (kernel.has_density() && kernel.boundary() && eps >= kernel.boundary()->mu0 + 1.0)
        throw InfinityResult("check_bound_v: y^{-eps} not integrable against the kernel near 0");

    auto integrand_value = [&](double x) {
        const double xt = eta * std::pow(x, theta);
        if (kernel.variant() == FragmentationKernel::Variant::PointMass) {
            const double rr = kernel.point_mass_location();
            return std::pow(rr, -eps) * std::exp(xt * (std::pow(rr, theta) - 1.0));
        }
        return quad::integrate_unit_singular([&](double y) {
            return std::pow(y, -eps) * std::exp(xt * (std::pow(y, theta) - 1.0)) *
                   kernel.density(y);
        });
    };

    BoundVResult res;
    const int n = 25;
    for (int i = 0; i < n; ++i) {
        const double x = x0 * std::pow(1000.0, static_cast<double>(i) / (n - 1));
        const double v = integrand_value(x);
        if (v > res.sup) {
            res.sup = v;
            res.x_at_sup = x;
        }
    }
    // x -> infinity limit is 0 for every supported kernel (the exponential
    // tilt dominates); the grid maximum is the reported sup.
    res.pass = res.sup < 1.0 - C;
    return res;
}

VtildeDrift drift_Vtilde(const RateModel& model, const FragmentationKernel& kernel,
                         const ExpLyapunov& spec, double x) {
    if (x < 1.0) throw DomainError("drift_Vtilde: V~ is defined for x >= 1");
    VtildeDrift out;
    out.exact = apply_generator(model, kernel, spec.as_gen_function(), x);
    const auto& ti = model.tau.asymptotics().at_infinity;
    out.bound = -(spec.eps * ti.coeff / 4.0) * std::pow(x, ti.exponent - 1.0) * spec.value(x);
    out.satisfies_bound = out.exact <= out.bound;
    return out;
}

DriftReport drift_report(const RateModel& model, const FragmentationKernel& kernel,
                         const LyapunovSpec& spec, double x_lo, double x_hi, int points) {
    DriftReport rep;
    rep.grid.reserve(points);
    rep.drift.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (points - 1));
        rep.grid.push_back(x);
        rep.drift.push_back(drift_V(model, kernel, spec, x).exact);
    }
    auto end_slope = [&](bool at_zero) {
        const int m = 5;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < m; ++i) {
            const int j = at_zero ? i : points - m + i;
            const double lx = std::log(rep.grid[j]);
            const double ly = std::log(std::abs(rep.drift[j]) + 1e-300);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    rep.slope_at_zero = end_slope(true);
    rep.slope_at_infinity = end_slope(false);

    // Contiguous negative-drift regions at both ends of the grid.
    int lo_end = 0;
    while (lo_end < points && rep.drift[lo_end] < 0.0) ++lo_end;
    int hi_start = points - 1;
    while (hi_start >= 0 && rep.drift[hi_start] < 0.0) --hi_start;
    if (lo_end == 0 || hi_start == points - 1 || lo_end > hi_start) {
        rep.compact_found = false;
        return rep;
    }
    rep.compact_found = true;
    rep.A = std::max({1.0, 1.0 / rep.grid[lo_end - 1], rep.grid[hi_start + 1]});
    // Fitted Foster-Lyapunov constants on the probe grid.
    double alpha = kInf;
    for (int i = 0; i < points; ++i) {
        const double x = rep.grid[i];
        if (x < 1.0 / rep.A || x > rep.A)
            alpha = std::min(alpha, -rep.drift[i] / spec.value(x));
    }
    if (!std::isfinite(alpha) || alpha < 0.0) alpha = 0.0;
    rep.alpha = alpha;
    double ap = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = rep.grid[i];
        if (x >= 1.0 / rep.A && x <= rep.A)
            ap = std::max(ap, rep.drift[i] + alpha * spec.value(x));
    }
    rep.alpha_prime = ap;
    return rep;
}

}  // namespace gf
