// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
// its measured values; the exit code is the number of failed criteria. All
// Monte Carlo runs use fixed seeds, so the outcome is deterministic.

#include "gf/flow.hpp"
#include "gf/lyapunov.hpp"
#include "gf/pde.hpp"
#include "gf/pdmp.hpp"
#include "gf/rates.hpp"
#include "gf/tails.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

using namespace gf;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

RateModel model(RateFunction tau, RateFunction beta) { return {std::move(tau), std::move(beta)}; }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

EmpiricalDistribution million_samples(const RateModel& m, const FragmentationKernel& k,
                                      std::uint64_t seed) {
    FlowMap fm(m);
    StationaryConfig cfg;
    cfg.horizon = 312500.0;
    cfg.burn_in = 62500.0;
    cfg.stride = 1.0;
    cfg.n_chains = 4;
    return sample_stationary(fm, k, cfg, seed);
}

}  // namespace

int main() {
    const RateModel tcp = model(RateFunction::constant(1.0), RateFunction::power(1.0, 1.0));
    const auto pm = FragmentationKernel::point_mass(0.5);
    const auto un = FragmentationKernel::uniform();
    const FlowMap fm_tcp(tcp);

    // 1. Generator consistency: (E[f(X_h)] - f(x))/h at h=1e-3, n=1e6 matches
    //    L f(1) = 0.5 within 3 standard errors (f = identity).
    try {
        GenFunction id{[](double x) { return x; }, [](double) { return 1.0; }, 1.0};
        Rng rng(11);
        const auto r = generator_residual(fm_tcp, pm, id, 1.0, 1e-3, 1000000, rng);
        report(1, std::abs(r.estimate) <= 3.0 * r.std_error,
               fmt("|residual| %.3g vs 3*se %.3g (target L f(1) = 0.5)",
                   std::abs(r.estimate), 3.0 * r.std_error));
    } catch (const std::exception& e) {
        report(1, false, e.what());
    }

    // 2. Jump-time law from z=1: inversion sampler KS < 0.01 against
    //    survival exp(-(t + t^2/2)); thinning agrees (two-sample KS < 0.02).
    try {
        Rng rng(12);
        std::vector<double> inv(100000), thin(100000);
        for (auto& t : inv) t = fm_tcp.sample_jump_time(1.0, rng);
        for (auto& t : thin) t = fm_tcp.sample_jump_time_thinning(1.0, rng);
        const double ks1 = testutil::ks_statistic(
            inv, [](double t) { return 1.0 - std::exp(-(t + 0.5 * t * t)); });
        const double ks2 = testutil::ks_two_sample(inv, thin);
        report(2, ks1 < 0.01 && ks2 < 0.02,
               fmt("one-sample KS %.4f (< 0.01), inversion-vs-thinning KS %.4f (< 0.02)", ks1,
                   ks2));
    } catch (const std::exception& e) {
        report(2, false, e.what());
    }

    // Shared Monte Carlo runs (10^6 pooled samples each).
    const auto dist_tcp = million_samples(tcp, pm, 101);
    const RateModel unif_bx = model(RateFunction::constant(1.0), RateFunction::power(1.0, 1.0));
    const auto dist_unifbx = million_samples(unif_bx, un, 202);
    const RateModel unif_const = model(RateFunction::constant(1.0), RateFunction::constant(1.0));
    const auto dist_unif = million_samples(unif_const, un, 303);

    // 3. Stationarity identity E[X^2] = 2 +- 0.05 (from E_pi[L x] = 0).
    try {
        const double ex2 = empirical_moment(dist_tcp, [](double x) { return x * x; });
        report(3, std::abs(ex2 - 2.0) <= 0.05, fmt("E[X^2] = %.4f (target 2 +- 0.05)", ex2));
    } catch (const std::exception& e) {
        report(3, false, e.what());
    }

    // 4. Right-tail stretch exponent theta = 2 recovered within [1.8, 2.2]
    //    for both the halving model and the uniform-kernel beta(x)=x model.
    try {
        const double pred1 = predict_tails(tcp, pm, 0.5).theta;
        const double pred2 = predict_tails(unif_bx, un, 0.5).theta;
        const auto fit1 = fit_right_tail(dist_tcp);
        const auto fit2 = fit_right_tail(dist_unifbx);
        const bool ok = pred1 == 2.0 && pred2 == 2.0 && fit1.theta >= 1.8 &&
                        fit1.theta <= 2.2 && fit2.theta >= 1.8 && fit2.theta <= 2.2;
        report(4, ok,
               fmt("theta-hat %.3f (halving), %.3f (uniform kernel); predicted 2, window "
                   "[1.8, 2.2]",
                   fit1.theta, fit2.theta));
    } catch (const std::exception& e) {
        report(4, false, e.what());
    }

    // 5. Left-tail exponent for tau=1, beta=1, uniform kernel: predicted
    //    alpha0 = 1 is a lower bound, so alpha0-hat >= 0.85 passes and an
    //    overshoot beyond 1.15 is flagged but not failed.
    try {
        const auto fit = fit_left_tail(dist_unif);
        const bool ok = fit.alpha0 >= 0.85;
        std::string detail = fmt("alpha0-hat = %.3f (se %.3f), lower window edge 0.85",
                                 fit.alpha0, fit.std_error);
        if (fit.alpha0 > 1.15) detail += " [overshoot above 1.15 flagged, not failed]";
        report(5, ok, detail);
    } catch (const std::exception& e) {
        report(5, false, e.what());
    }

    // 6. Drift closed form: exact L V equals the small-x closed form to 1e-7
    //    relative on x in {1e-4..1e-1} for 3 models x 3 kernels, and respects
    //    the large-x upper bound on x in {10, 100, 1000}.
    try {
        const std::vector<RateModel> models = {
            model(RateFunction::constant(1.0), RateFunction::power(1.0, 1.0)),
            model(RateFunction::power(1.0, 0.5), RateFunction::constant(1.0)),
            model(RateFunction::two_term(1.0, 0.0, 1.0, 1.0), RateFunction::power(1.0, 2.0))};
        const std::vector<FragmentationKernel> kernels = {
            FragmentationKernel::point_mass(0.5), FragmentationKernel::uniform(),
            FragmentationKernel::beta_shape(1.0, 1.0)};
        const LyapunovSpec spec(1.0, 0.5);
        double max_rel = 0.0;
        bool bounds_ok = true;
        for (const auto& m : models)
            for (const auto& k : kernels) {
                for (double x : {1e-4, 1e-3, 1e-2, 1e-1}) {
                    const auto d = drift_V(m, k, spec, x);
                    max_rel = std::max(max_rel,
                                       std::abs(d.exact - *d.reference) / std::abs(*d.reference));
                }
                for (double x : {10.0, 100.0, 1000.0}) {
                    const auto d = drift_V(m, k, spec, x);
                    bounds_ok = bounds_ok && d.exact <= *d.reference * (1.0 + 1e-9) + 1e-9;
                }
            }
        report(6, max_rel <= 1e-7 && bounds_ok,
               fmt("max relative error %.2e (<= 1e-7) below 1; upper bound above 2 ", max_rel) +
                   (bounds_ok ? "honored" : "violated"));
    } catch (const std::exception& e) {
        report(6, false, e.what());
    }

    // 7. Classification matrix: 12 models spanning subcritical, critical-pass,
    //    critical-fail, and violated balance at both ends.
    try {
        struct Fixture {
            const char* name;
            RateModel m;
            double a, b;
            bool harris, positive, expergo, crit0, critinf;
        };
        auto cst = [](double c) { return RateFunction::constant(c); };
        auto pw = [](double c, double p) { return RateFunction::power(c, p); };
        auto tt = [](double c1, double p1, double c2, double p2) {
            return RateFunction::two_term(c1, p1, c2, p2);
        };
        const auto un_k = FragmentationKernel::uniform();
        const std::vector<Fixture> fixtures = {
            {"tcp", model(cst(1), pw(1, 1)), 1, 1, true, true, true, false, false},
            {"const rates", model(cst(2), cst(3)), 2, 2, true, true, true, false, false},
            {"crit-inf pass", model(tt(1, 0.5, 1, 1), cst(0.2)), 0.25, 0.25,
             true, true, true, false, true},
            {"crit-inf fail", model(tt(1, 0.5, 1, 1), cst(1)), 0.25, 0.25,
             false, false, false, false, true},
            {"crit-0 pass", model(pw(1, 1), tt(2, 0, 1, 2)), 1, 1, true, true, true, true, false},
            {"crit-0 fail", model(pw(1, 1), tt(0.5, 0, 1, 2)), 1, 1,
             false, false, false, true, false},
            {"violated both", model(pw(1, 2), cst(1)), 1, 1, false, false, false, false, false},
            {"harris only", model(cst(1), pw(1, -0.5)), 0.25, 1,
             true, false, false, false, false},
            {"no exp tier", model(cst(1), pw(1, -0.5)), 1, 1, true, true, false, false, false},
            {"heavy growth", model(pw(1, 2), pw(1, 1.5)), 2, 2, true, true, false, false, false},
            {"crit both fail", model(pw(1, 1), cst(1)), 1, 1, false, false, false, true, true},
            {"uniform const", model(cst(1), cst(1)), 1, 0.5, true, true, true, false, false},
        };
        int bad = 0;
        std::string first_bad;
        for (std::size_t i = 0; i < fixtures.size(); ++i) {
            const auto& f = fixtures[i];
            // The last fixture uses the uniform kernel; the rest the atom.
            const auto& k = i + 1 == fixtures.size() ? un_k : pm;
            const auto c = classify_balance(f.m, k, f.a, f.b);
            const bool match = c.harris_recurrent == f.harris &&
                               c.positive_recurrent == f.positive &&
                               c.exp_ergodic == f.expergo && c.critical_at_zero == f.crit0 &&
                               c.critical_at_infinity == f.critinf;
            if (!match) {
                ++bad;
                if (first_bad.empty()) first_bad = f.name;
            }
        }
        report(7, bad == 0,
               bad == 0 ? "all 12 fixtures match the expected three-tier flags"
                        : std::to_string(bad) + " fixtures mismatched, first: " + first_bad);
    } catch (const std::exception& e) {
        report(7, false, e.what());
    }

    // 8. Exponential-tail bound checker at theta=2, eta=0.25, eps=0.1, x0=10:
    //    atom kernel sup < 1e-3, uniform kernel sup < 0.9.
    try {
        const auto rp = check_bound_v(pm, 2.0, 0.25, 0.1, 10.0, 0.5);
        const auto ru = check_bound_v(un, 2.0, 0.25, 0.1, 10.0, 0.1);
        report(8, rp.sup < 1e-3 && rp.pass && ru.sup < 0.9 && ru.pass,
               fmt("sup %.3e (atom, < 1e-3), sup %.4f (uniform, < 0.9)", rp.sup, ru.sup));
    } catch (const std::exception& e) {
        report(8, false, e.what());
    }

    // 9 & 10. Cross-oracle and mass conservation on the same PDE run.
    try {
        const auto grid = SizeGrid::log_spaced_halving_aligned(1e-2, 30.0, 800);
        ConservativeSolver solver(tcp, pm, grid);

        // Per-step conservation probe on a fresh field.
        auto probe = solver.initial_bump(1.0);
        const double dt = solver.max_stable_dt();
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double before = probe.total_mass() + probe.leakage;
            solver.step(probe, dt);
            worst = std::max(worst,
                             std::abs(probe.total_mass() + probe.leakage - before) / before);
        }

        const auto res = solver.steady_state(1e-6, 300.0);
        const double l1 = compare_distributions(grid, res.field, dist_tcp);
        const double neg = compare_distributions(grid, res.field, dist_unif);
        report(9, res.converged && l1 < 0.05 && neg > 0.2,
               fmt("L1 distance %.4f (< 0.05); mismatched-model control %.4f (> 0.2)", l1, neg));
        report(10, worst <= 1e-10 && res.field.leakage < 1e-3,
               fmt("per-step conservation error %.2e (<= 1e-10); cumulative leakage %.2e "
                   "(< 1e-3)",
                   worst, res.field.leakage));
    } catch (const std::exception& e) {
        report(9, false, e.what());
        report(10, false, e.what());
    }

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures;
}
