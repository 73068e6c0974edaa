#include "gf/tails.hpp"

#include "gf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gf {

namespace {

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3) throw DomainError("ols: need at least 3 points");
    const double nn = static_cast<double>(n);
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / nn, my = sy / nn;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    OlsFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.slope_se = std::sqrt(ss_res / (nn - 2.0) / sxx);
    return f;
}

std::size_t count_in(const std::vector<double>& sorted, double lo, double hi) {
    const auto a = std::lower_bound(sorted.begin(), sorted.end(), lo);
    const auto b = std::upper_bound(sorted.begin(), sorted.end(), hi);
    return static_cast<std::size_t>(b - a);
}

}  // namespace

TailPrediction predict_tails(const RateModel& model, const FragmentationKernel& kernel, double C) {
    if (!(C > 0.0 && C < 1.0)) throw DomainError("predict_tails: C must lie in (0,1)");
    const auto& t0 = model.tau.asymptotics().at_zero;
    const auto& ti = model.tau.asymptotics().at_infinity;
    const auto& bi = model.beta.asymptotics().at_infinity;

    TailPrediction p;
    p.theta = bi.exponent + 1.0 - ti.exponent;
    if (!(p.theta > 0.0))
        throw DomainError("predict_tails: theta <= 0; balance assumption at infinity violated");
    p.eta = C * bi.coeff / (p.theta * ti.coeff);

    if (!kernel.has_density()) {
        p.left_valid = false;
        p.left_invalid_reason = "kernel has no density near 0";
    } else {
        const auto bd = kernel.boundary();
        const double mu0 = bd ? bd->mu0 : 0.0;
        p.alpha0 = mu0 + 1.0 - t0.exponent;
        if (mu0 + 2.0 - t0.exponent > 0.0) {
            p.left_valid = true;
        } else {
            p.left_valid = false;
            p.left_invalid_reason = "mu0 + 2 - nu0 <= 0";
        }
    }
    return p;
}

LeftTailFit fit_left_tail(const EmpiricalDistribution& dist) {
    const auto& sorted = dist.sorted();
    const double p10 = dist.quantile(0.10);
    if (count_in(sorted, 0.0, p10) < 200)
        throw DomainError("fit_left_tail: fewer than 200 samples below the 10th percentile");

    const double x_min = sorted.front();
    // Lowest decade holding at least 200 samples.
    double x_hi = std::max(sorted[199], x_min * 10.0);
    const double x_cap = dist.quantile(0.5);

    LeftTailFit best;
    bool have_fit = false;
    while (true) {
        // Log-spaced bins; regress log density on log midpoint.
        const int bins = 12;
        const double llo = std::log(x_min), lhi = std::log(x_hi * (1.0 + 1e-12));
        std::vector<double> lx, ly;
        std::size_t used = 0;
        for (int i = 0; i < bins; ++i) {
            const double a = std::exp(llo + (lhi - llo) * i / bins);
            const double b = std::exp(llo + (lhi - llo) * (i + 1) / bins);
            const std::size_t c = count_in(sorted, a, b);
            if (c == 0) continue;
            used += c;
            const double density =
                static_cast<double>(c) / static_cast<double>(sorted.size()) / (b - a);
            lx.push_back(0.5 * (std::log(a) + std::log(b)));
            ly.push_back(std::log(density));
        }
        if (lx.size() >= 4) {
            const auto f = ols(lx, ly);
            best.alpha0 = f.slope;
            best.std_error = f.slope_se;
            best.x_lo = x_min;
            best.x_hi = x_hi;
            best.r_squared = f.r_squared;
            best.sample_count = used;
            have_fit = true;
            // R^2 is uninformative for a near-flat density; there, keep
            // widening until the slope estimate itself is tight.
            if (f.r_squared >= 0.95 ||
                (std::abs(f.slope) < 0.25 && f.slope_se < 0.04))
                return best;
        }
        if (x_hi >= x_cap) break;
        x_hi = std::min(x_hi * 1.5, x_cap);
    }
    if (!have_fit) throw DomainError("fit_left_tail: no usable window");
    return best;
}

RightTailFit fit_right_tail(const EmpiricalDistribution& dist) {
    const auto& sorted = dist.sorted();
    const std::size_t n = sorted.size();
    const double p90 = dist.quantile(0.90);
    if (count_in(sorted, p90, sorted.back()) < 200)
        throw DomainError("fit_right_tail: fewer than 200 samples above the 90th percentile");

    // Keep >= 30 exceedances beyond the last survival evaluation point.
    const double frac_hi = std::max(1.0 - 30.0 / static_cast<double>(n), 0.95);
    const double x_hi = dist.quantile(frac_hi);
    const double x_lo = std::max(p90, x_hi / 10.0);
    if (!(x_hi > x_lo))
        throw DomainError("fit_right_tail: degenerate window");

    const int points = 25;
    std::vector<double> xs, lx, lls, nls;
    for (int i = 0; i < points; ++i) {
        const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (points - 1));
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        const double s = static_cast<double>(above) / static_cast<double>(n);
        if (s <= 0.0 || s >= 1.0) continue;
        xs.push_back(x);
        lx.push_back(std::log(x));
        nls.push_back(-std::log(s));
        lls.push_back(std::log(-std::log(s)));
    }
    if (xs.size() < 5) throw DomainError("fit_right_tail: too few usable survival points");

    RightTailFit out;
    const auto stage1 = ols(lx, lls);
    out.theta = stage1.slope;
    out.theta_se = stage1.slope_se;
    out.r_squared = stage1.r_squared;
    out.x_lo = x_lo;
    out.x_hi = x_hi;
    out.sample_count = count_in(sorted, x_lo, sorted.back());

    // Stage 2: with theta fixed, -log S regressed on x^theta.
    std::vector<double> xt(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xt[i] = std::pow(xs[i], out.theta);
    const auto stage2 = ols(xt, nls);
    out.eta = stage2.slope;
    out.eta_se = stage2.slope_se;

    // Optional polynomial correction from the residuals; low confidence.
    std::vector<double> resid(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) resid[i] = nls[i] - out.eta * xt[i];
    const auto stage3 = ols(lx, resid);
    out.alpha_inf = -stage3.slope;
    return out;
}

std::vector<NamedGenFunction> default_test_functions(const FragmentationKernel& kernel) {
    std::vector<NamedGenFunction> fns;
    fns.push_back({"x", {[](double x) { return x; }, [](double) { return 1.0; }, 1.0}});
    fns.push_back({"x^2", {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, 2.0}});
    fns.push_back({"log x", {[](double x) { return std::log(x); },
                             [](double x) { return 1.0 / x; }, 0.0}});
    if (std::isfinite(kernel.moment(-0.5))) {
        fns.push_back({"x^-1/2", {[](double x) { return 1.0 / std::sqrt(x); },
                                  [](double x) { return -0.5 * std::pow(x, -1.5); }, -0.5}});
    }
    fns.push_back({"bump", {[](double x) {
                                const double u = std::log(x);
                                return std::exp(-u * u);
                            },
                            [](double x) {
                                const double u = std::log(x);
                                return std::exp(-u * u) * (-2.0 * u / x);
                            },
                            0.0}});
    return fns;
}

std::vector<StationarityResidual> stationarity_residual(const RateModel& model,
                                                        const FragmentationKernel& kernel,
                                                        const EmpiricalDistribution& dist,
                                                        const std::vector<NamedGenFunction>& fns,
                                                        std::uint64_t bootstrap_seed) {
    std::vector<StationarityResidual> out;
    const auto& samples = dist.samples();
    for (const auto& nf : fns) {
        StationarityResidual r;
        r.name = nf.name;
        // Integrability guard against the kernel's left boundary.
        if (kernel.has_density() && nf.fn.small_x_power && kernel.boundary() &&
            *nf.fn.small_x_power + kernel.boundary()->mu0 <= -1.0) {
            r.skipped = true;
            r.skip_reason = "kernel integral diverges for this f";
            out.push_back(std::move(r));
            continue;
        }

        std::vector<double> lf(samples.size());
        if (kernel.variant() == FragmentationKernel::Variant::PointMass) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                lf[i] = apply_generator(model, kernel, nf.fn, samples[i]);
        } else {
            // Quadrature per sample is too slow; evaluate L f on a dense log
            // grid and interpolate linearly in log x.
            const double lo = dist.sorted().front() * 0.999;
            const double hi = dist.sorted().back() * 1.001;
            const int grid_n = 2000;
            std::vector<double> gx(grid_n), gv(grid_n);
            for (int i = 0; i < grid_n; ++i) {
                gx[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (grid_n - 1));
                gv[i] = apply_generator(model, kernel, nf.fn, gx[i]);
            }
            const double llo = std::log(lo), step = (std::log(hi) - llo) / (grid_n - 1);
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double pos = (std::log(samples[i]) - llo) / step;
                const int j = std::clamp(static_cast<int>(pos), 0, grid_n - 2);
                const double w = std::clamp(pos - j, 0.0, 1.0);
                lf[i] = gv[j] * (1.0 - w) + gv[j + 1] * w;
            }
        }

        const double mean = std::accumulate(lf.begin(), lf.end(), 0.0) /
                            static_cast<double>(lf.size());
        // Bootstrap standard error, 200 resamples.
        Rng rng(splitmix64(bootstrap_seed));
        std::uniform_int_distribution<std::size_t> pick(0, lf.size() - 1);
        const int resamples = 200;
        double bs_sum = 0.0, bs_sq = 0.0;
        // Resample means over a subsample cap to keep the bootstrap cheap on
        // very large pools; the se scaling is corrected back.
        const std::size_t m = std::min<std::size_t>(lf.size(), 200000);
        const double scale = std::sqrt(static_cast<double>(m) / static_cast<double>(lf.size()));
        for (int b = 0; b < resamples; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += lf[pick(rng)];
            const double bm = s / static_cast<double>(m);
            bs_sum += bm;
            bs_sq += bm * bm;
        }
        const double bmean = bs_sum / resamples;
        const double bvar = std::max(0.0, bs_sq / resamples - bmean * bmean);
        r.residual = mean;
        r.std_error = std::sqrt(bvar) * scale;
        out.push_back(std::move(r));
    }
    return out;
}

double empirical_moment(const EmpiricalDistribution& dist,
                        const std::function<double(double)>& g) {
    return dist.mean(g);
}

}  // namespace gf
