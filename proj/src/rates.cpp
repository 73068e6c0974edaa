#include "gf/rates.hpp"

#include "gf/errors.hpp"
#include "gf/quadrature.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Least-squares slope/intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

PowerAsymptote fit_table_end(const LogLogTableForm& t, bool at_zero) {
    const size_t n = t.log_x.size();
    const size_t m = std::min<size_t>(5, n);
    std::vector<double> lx, ly;
    for (size_t i = 0; i < m; ++i) {
        const size_t j = at_zero ? i : n - m + i;
        lx.push_back(t.log_x[j]);
        ly.push_back(t.log_y[j]);
    }
    auto [slope, intercept] = linear_fit(lx, ly);
    return {std::exp(intercept), slope};
}

}  // namespace

RateFunction RateFunction::constant(double c) { return power(c, 0.0); }

RateFunction RateFunction::power(double c, double p) {
    if (c <= 0.0) throw DomainError("power rate: coefficient must be positive");
    PowerAsymptote a{c, p};
    return RateFunction(PowerLawForm{c, p}, RateAsymptotics{a, a});
}

RateFunction RateFunction::two_term(double c1, double p1, double c2, double p2) {
    if (c1 < 0.0 || c2 < 0.0 || (c1 == 0.0 && c2 == 0.0))
        throw DomainError("two-term rate: coefficients must be >= 0 and not both 0");
    if (c1 == 0.0) return power(c2, p2);
    if (c2 == 0.0) return power(c1, p1);
    if (p1 == p2) return power(c1 + c2, p1);
    // The smaller exponent dominates at 0, the larger at infinity.
    const bool first_smaller = p1 < p2;
    PowerAsymptote zero = first_smaller ? PowerAsymptote{c1, p1} : PowerAsymptote{c2, p2};
    PowerAsymptote inf = first_smaller ? PowerAsymptote{c2, p2} : PowerAsymptote{c1, p1};
    return RateFunction(TwoTermPowerForm{c1, p1, c2, p2}, RateAsymptotics{zero, inf});
}

RateFunction RateFunction::tabulated(const std::vector<double>& x, const std::vector<double>& y,
                                     std::optional<RateAsymptotics> declared) {
    if (x.size() < 2 || x.size() != y.size())
        throw DomainError("tabulated rate: need >= 2 matching knots");
    LogLogTableForm t;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw DomainError("tabulated rate: knots must be positive");
        if (i > 0 && x[i] <= x[i - 1]) throw DomainError("tabulated rate: knots must be increasing");
        t.log_x.push_back(std::log(x[i]));
        t.log_y.push_back(std::log(y[i]));
    }
    RateAsymptotics fitted{fit_table_end(t, true), fit_table_end(t, false)};
    double disc = 0.0;
    RateAsymptotics asym = fitted;
    if (declared) {
        disc = std::max(std::abs(declared->at_zero.exponent - fitted.at_zero.exponent),
                        std::abs(declared->at_infinity.exponent - fitted.at_infinity.exponent));
        asym = *declared;
    }
    return RateFunction(std::move(t), asym, disc);
}

double RateFunction::operator()(double x) const {
    if (!(x > 0.0)) throw DomainError("rate function: x must be positive");
    if (const auto* p = std::get_if<PowerLawForm>(&form_)) {
        if (p->p == 0.0) return p->c;
        if (p->p == 1.0) return p->c * x;
        return p->c * std::pow(x, p->p);
    }
    if (const auto* tt = std::get_if<TwoTermPowerForm>(&form_)) {
        return tt->c1 * std::pow(x, tt->p1) + tt->c2 * std::pow(x, tt->p2);
    }
    const auto& t = std::get<LogLogTableForm>(form_);
    const double lx = std::log(x);
    // Log-linear interpolation; end segments extrapolate.
    size_t hi = std::upper_bound(t.log_x.begin(), t.log_x.end(), lx) - t.log_x.begin();
    hi = std::clamp<size_t>(hi, 1, t.log_x.size() - 1);
    const size_t lo = hi - 1;
    const double w = (lx - t.log_x[lo]) / (t.log_x[hi] - t.log_x[lo]);
    return std::exp(t.log_y[lo] + w * (t.log_y[hi] - t.log_y[lo]));
}

bool RateFunction::is_constant() const {
    const auto* p = std::get_if<PowerLawForm>(&form_);
    return p && p->p == 0.0;
}

RateFunction RateFunction::scaled(double s) const {
    if (s <= 0.0) throw DomainError("rate scaling: factor must be positive");
    RateFunction out = *this;
    if (auto* p = std::get_if<PowerLawForm>(&out.form_)) {
        p->c *= s;
    } else if (auto* tt = std::get_if<TwoTermPowerForm>(&out.form_)) {
        tt->c1 *= s;
        tt->c2 *= s;
    } else {
        auto& t = std::get<LogLogTableForm>(out.form_);
        const double ls = std::log(s);
        for (double& ly : t.log_y) ly += ls;
    }
    out.asym_.at_zero.coeff *= s;
    out.asym_.at_infinity.coeff *= s;
    return out;
}

std::string RateFunction::describe() const {
    std::ostringstream os;
    if (const auto* p = std::get_if<PowerLawForm>(&form_)) {
        os << p->c << "*x^" << p->p;
    } else if (const auto* tt = std::get_if<TwoTermPowerForm>(&form_)) {
        os << tt->c1 << "*x^" << tt->p1 << " + " << tt->c2 << "*x^" << tt->p2;
    } else {
        os << "table[" << std::get<LogLogTableForm>(form_).log_x.size() << " knots]";
    }
    return os.str();
}

void RateModel::validate(double tol) const {
    for (int i = -30; i <= 30; ++i) {
        const double x = std::pow(10.0, i / 5.0);
        if (!(tau(x) > 0.0)) throw DomainError("rate model: tau not positive at x=" + std::to_string(x));
        if (!(beta(x) > 0.0)) throw DomainError("rate model: beta not positive at x=" + std::to_string(x));
    }
    // For rates with declared asymptotes (tables), check the asymptote against
    // the extreme probe points of the table itself.
    auto check = [&](const RateFunction& r, const char* name) {
        if (r.declared_exponent_discrepancy() > tol)
            throw DomainError(std::string("rate model: declared asymptotic exponent of ") + name +
                              " deviates from the table fit by " +
                              std::to_string(r.declared_exponent_discrepancy()));
    };
    check(tau, "tau");
    check(beta, "beta");
}

// ---------------------------------------------------------------------------
// Kernels

FragmentationKernel FragmentationKernel::point_mass(double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("point-mass kernel: r must lie in (0,1)");
    FragmentationKernel k;
    k.variant_ = Variant::PointMass;
    k.r_ = r;
    return k;
}

FragmentationKernel FragmentationKernel::uniform() {
    FragmentationKernel k;
    k.variant_ = Variant::Uniform;
    k.boundary_ = KernelBoundary{1.0, 0.0, 1.0, 0.0};
    return k;
}

FragmentationKernel FragmentationKernel::beta_shape(double mu0, double mu1) {
    if (!(mu0 > -1.0 && mu1 > -1.0))
        throw DomainError("beta-shape kernel: mu0, mu1 must exceed -1 for integrability");
    FragmentationKernel k;
    k.variant_ = Variant::BetaShape;
    k.mu0_ = mu0;
    k.mu1_ = mu1;
    k.beta_norm_ = quad::integrate_unit_singular(
        [&](double y) { return std::pow(y, mu0) * std::pow(1.0 - y, mu1); });
    k.boundary_ = KernelBoundary{1.0 / k.beta_norm_, mu0, 1.0 / k.beta_norm_, mu1};
    return k;
}

FragmentationKernel FragmentationKernel::tabulated(const std::vector<double>& knots,
                                                   const std::vector<double>& values,
                                                   std::optional<KernelBoundary> declared) {
    if (knots.size() < 2 || knots.size() != values.size())
        throw DomainError("tabulated kernel: need >= 2 matching knots");
    for (size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i] > 0.0 && knots[i] < 1.0))
            throw DomainError("tabulated kernel: knots must lie in (0,1)");
        if (values[i] < 0.0) throw DomainError("tabulated kernel: density values must be >= 0");
        if (i > 0 && knots[i] <= knots[i - 1])
            throw DomainError("tabulated kernel: knots must be increasing");
    }
    FragmentationKernel k;
    k.variant_ = Variant::Tabulated;
    k.knots_ = knots;
    k.values_ = values;
    // Trapezoid rule is exact for a piecewise-linear density.
    double mass = 0.0;
    for (size_t i = 1; i < knots.size(); ++i)
        mass += 0.5 * (values[i] + values[i - 1]) * (knots[i] - knots[i - 1]);
    if (mass <= 0.0) throw DomainError("tabulated kernel: zero total mass");
    k.raw_mass_ = mass;
    for (double& v : k.values_) v /= mass;
    k.cdf_.assign(knots.size(), 0.0);
    for (size_t i = 1; i < knots.size(); ++i)
        k.cdf_[i] = k.cdf_[i - 1] +
                    0.5 * (k.values_[i] + k.values_[i - 1]) * (knots[i] - knots[i - 1]);
    k.cdf_.back() = 1.0;
    if (declared) {
        k.boundary_ = declared;
    } else {
        // The density vanishes outside the knot range; report the first/last
        // segment behavior as the boundary data.
        k.boundary_ = KernelBoundary{k.values_.front(), 0.0, k.values_.back(), 0.0};
    }
    return k;
}

double FragmentationKernel::point_mass_location() const {
    if (variant_ != Variant::PointMass)
        throw DomainError("point_mass_location: kernel is not a point mass");
    return r_;
}

double FragmentationKernel::density(double y) const {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("kernel density: y must lie in (0,1)");
    switch (variant_) {
        case Variant::PointMass:
            throw DomainError("kernel density: point mass has no density");
        case Variant::Uniform:
            return 1.0;
        case Variant::BetaShape:
            return std::pow(y, mu0_) * std::pow(1.0 - y, mu1_) / beta_norm_;
        case Variant::Tabulated: {
            if (y <= knots_.front() || y >= knots_.back()) return 0.0;
            size_t hi = std::upper_bound(knots_.begin(), knots_.end(), y) - knots_.begin();
            const size_t lo = hi - 1;
            const double w = (y - knots_[lo]) / (knots_[hi] - knots_[lo]);
            return values_[lo] + w * (values_[hi] - values_[lo]);
        }
    }
    return 0.0;
}

double FragmentationKernel::cdf(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    switch (variant_) {
        case Variant::PointMass:
            return y >= r_ ? 1.0 : 0.0;
        case Variant::Uniform:
            return y;
        case Variant::BetaShape:
            return boost::math::ibeta(mu0_ + 1.0, mu1_ + 1.0, y);
        case Variant::Tabulated: {
            if (y <= knots_.front()) return 0.0;
            if (y >= knots_.back()) return 1.0;
            size_t hi = std::upper_bound(knots_.begin(), knots_.end(), y) - knots_.begin();
            const size_t lo = hi - 1;
            const double h = knots_[hi] - knots_[lo];
            const double d = y - knots_[lo];
            const double slope = (values_[hi] - values_[lo]) / h;
            return cdf_[lo] + values_[lo] * d + 0.5 * slope * d * d;
        }
    }
    return 0.0;
}

double FragmentationKernel::moment(double a) const {
    switch (variant_) {
        case Variant::PointMass:
            return std::pow(r_, a);
        case Variant::Uniform:
            return a > -1.0 ? 1.0 / (a + 1.0) : kInf;
        case Variant::BetaShape:
            if (a <= -(mu0_ + 1.0)) return kInf;
            return quad::integrate_unit_singular([&](double y) {
                       return std::pow(y, mu0_ + a) * std::pow(1.0 - y, mu1_);
                   }) /
                   beta_norm_;
        case Variant::Tabulated: {
            // Density is supported on [knots_.front(), knots_.back()] away from
            // 0 and 1, so every moment is finite.
            double m = 0.0;
            for (size_t i = 1; i < knots_.size(); ++i) {
                const double y0 = knots_[i - 1], y1 = knots_[i];
                const double v0 = values_[i - 1], v1 = values_[i];
                m += quad::integrate(
                    [&](double y) {
                        const double w = (y - y0) / (y1 - y0);
                        return std::pow(y, a) * (v0 + w * (v1 - v0));
                    },
                    y0, y1, 1e-11);
            }
            return m;
        }
    }
    return kInf;
}

double FragmentationKernel::sample(Rng& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (variant_) {
        case Variant::PointMass:
            return r_;
        case Variant::Uniform: {
            double y;
            do { y = unif(rng); } while (y <= 0.0);
            return y;
        }
        case Variant::BetaShape: {
            // Beta(mu0+1, mu1+1) via two gamma draws.
            std::gamma_distribution<double> g0(mu0_ + 1.0, 1.0), g1(mu1_ + 1.0, 1.0);
            double y;
            do {
                const double u = g0(rng), v = g1(rng);
                y = u / (u + v);
            } while (!(y > 0.0 && y < 1.0));
            return y;
        }
        case Variant::Tabulated: {
            const double u = unif(rng);
            size_t hi = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
            hi = std::clamp<size_t>(hi, 1, knots_.size() - 1);
            const size_t lo = hi - 1;
            const double h = knots_[hi] - knots_[lo];
            const double v0 = values_[lo];
            const double slope = (values_[hi] - v0) / h;
            const double du = u - cdf_[lo];
            // Invert cdf_[lo] + v0*d + slope*d^2/2 = u on the segment.
            double d;
            if (std::abs(slope) < 1e-14 * std::max(v0, 1.0)) {
                d = v0 > 0.0 ? du / v0 : h;
            } else {
                const double disc = v0 * v0 + 2.0 * slope * du;
                d = (-v0 + std::sqrt(std::max(disc, 0.0))) / slope;
            }
            return std::clamp(knots_[lo] + d, knots_[lo], knots_[hi]);
        }
    }
    return 0.5;
}

std::string FragmentationKernel::describe() const {
    std::ostringstream os;
    switch (variant_) {
        case Variant::PointMass: os << "point_mass(" << r_ << ")"; break;
        case Variant::Uniform: os << "uniform"; break;
        case Variant::BetaShape: os << "beta_shape(" << mu0_ << "," << mu1_ << ")"; break;
        case Variant::Tabulated: os << "tabulated[" << knots_.size() << " knots]"; break;
    }
    return os.str();
}

ThinningResult strip_phantom_jumps(const RateFunction& beta, double atom_at_one,
                                   const FragmentationKernel& remainder) {
    if (atom_at_one < 0.0 || atom_at_one > 1.0)
        throw DomainError("strip_phantom_jumps: atom must lie in [0,1]");
    if (atom_at_one == 1.0)
        throw DegenerateKernel("strip_phantom_jumps: all mass at y=1, process never fragments");
    if (atom_at_one == 0.0) return {beta, remainder};
    return {beta.scaled(1.0 - atom_at_one), remainder};
}

}  // namespace gf
