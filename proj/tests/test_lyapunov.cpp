#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gf/errors.hpp"
#include "gf/lyapunov.hpp"

#include <cmath>
#include <vector>

using namespace gf;

namespace {

RateModel model(RateFunction tau, RateFunction beta) { return {std::move(tau), std::move(beta)}; }

const RateModel kTcp = model(RateFunction::constant(1.0), RateFunction::power(1.0, 1.0));

}  // namespace

TEST_CASE("generator on simple test functions") {
    const auto pm = FragmentationKernel::point_mass(0.5);
    GenFunction id{[](double x) { return x; }, [](double) { return 1.0; }, 1.0};
    // L x = 1 - x^2/2 for tau=1, beta=x, halving kernel.
    CHECK(apply_generator(kTcp, pm, id, 2.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(apply_generator(kTcp, pm, id, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

    GenFunction constant{[](double) { return 7.0; }, [](double) { return 0.0; }, 0.0};
    CHECK(apply_generator(kTcp, pm, constant, 0.3) == doctest::Approx(0.0));

    // tau = x, beta = x^2, uniform kernel, f = x^2 at x = 1: 2 + (M(2)-1) = 4/3.
    const auto m2 = model(RateFunction::power(1.0, 1.0), RateFunction::power(1.0, 2.0));
    GenFunction sq{[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, 2.0};
    CHECK(apply_generator(m2, FragmentationKernel::uniform(), sq, 1.0) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-9));

    // Finite-difference fallback when no derivative is declared.
    GenFunction nodf{[](double x) { return x * x; }, nullptr, 2.0};
    CHECK(apply_generator(m2, FragmentationKernel::uniform(), nodf, 1.0) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("generator guards divergent kernel integrals") {
    GenFunction inv{[](double x) { return 1.0 / x; },
                    [](double x) { return -1.0 / (x * x); }, -1.0};
    CHECK_THROWS_AS(apply_generator(kTcp, FragmentationKernel::uniform(), inv, 1.0),
                    InfinityResult);
}

TEST_CASE("Lyapunov splice is C^2 and matches the power pieces") {
    const LyapunovSpec spec(1.0, 1.0);
    CHECK(spec.value(0.5) == doctest::Approx(2.0));
    CHECK(spec.value(4.0) == doctest::Approx(4.0));
    // Continuity of value and derivative across the splice ends.
    for (double x : {1.0, 2.0}) {
        CHECK(spec.value(x - 1e-9) == doctest::Approx(spec.value(x + 1e-9)).epsilon(1e-6));
        CHECK(spec.derivative(x - 1e-9) ==
              doctest::Approx(spec.derivative(x + 1e-9)).epsilon(1e-5));
    }
    // Convexity of the splice depends on the exponents: for a=b=1 the quintic
    // second derivative 2 + 54s - 156s^2 + 100s^3 dips negative near s=0.7,
    // while steep growth exponents keep it convex.
    CHECK_FALSE(spec.splice_convex());
    CHECK(LyapunovSpec(4.0, 1.0).splice_convex());
    CHECK(LyapunovSpec(8.0, 8.0).splice_convex());
    CHECK_THROWS_AS(LyapunovSpec(0.0, 1.0), DomainError);
}

TEST_CASE("default exponent selection obeys the moment constraints") {
    const auto pm = LyapunovSpec::select_exponents(FragmentationKernel::point_mass(0.5));
    CHECK(pm.first == doctest::Approx(8.0));
    CHECK(pm.second == doctest::Approx(8.0));

    const auto un = LyapunovSpec::select_exponents(FragmentationKernel::uniform());
    CHECK(un.first == doctest::Approx(8.0));
    CHECK(un.second == doctest::Approx(0.75));  // capped below mu0 + 1 = 1

    const auto bs = LyapunovSpec::select_exponents(FragmentationKernel::beta_shape(1.0, 1.0));
    CHECK(bs.second == doctest::Approx(1.75));
    for (const auto& [a, b] : {pm, un, bs}) {
        CHECK(a > 0.0);
        CHECK(b > 0.0);
    }
}

TEST_CASE("drift of V: exact closed form below 1") {
    // tau=1, beta=x, halving kernel, b=1 at x=1/2: drift is exactly -3.
    const LyapunovSpec spec(1.0, 1.0);
    const auto d = drift_V(kTcp, FragmentationKernel::point_mass(0.5), spec, 0.5);
    REQUIRE(d.reference.has_value());
    CHECK_FALSE(d.reference_is_bound);
    CHECK(*d.reference == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(d.exact == doctest::Approx(-3.0).epsilon(1e-9));

    // tau=1, beta=1, uniform kernel, b=1/2 at x=1/4: (-2 + (M(-1/2)-1)) V = -2.
    const LyapunovSpec spec2(1.0, 0.5);
    const auto m = model(RateFunction::constant(1.0), RateFunction::constant(1.0));
    const auto d2 = drift_V(m, FragmentationKernel::uniform(), spec2, 0.25);
    CHECK(*d2.reference == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(d2.exact == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("drift of V matches the closed form below 1 and the bound above 2") {
    const std::vector<RateModel> models = {
        model(RateFunction::constant(1.0), RateFunction::power(1.0, 1.0)),
        model(RateFunction::power(1.0, 0.5), RateFunction::constant(1.0)),
        model(RateFunction::two_term(1.0, 0.0, 1.0, 1.0), RateFunction::power(1.0, 2.0))};
    const std::vector<FragmentationKernel> kernels = {FragmentationKernel::point_mass(0.5),
                                                      FragmentationKernel::uniform(),
                                                      FragmentationKernel::beta_shape(1.0, 1.0)};
    const LyapunovSpec spec(1.0, 0.5);
    for (const auto& m : models) {
        for (const auto& k : kernels) {
            for (double x : {1e-4, 1e-3, 1e-2, 1e-1}) {
                const auto d = drift_V(m, k, spec, x);
                REQUIRE(d.reference.has_value());
                CHECK(d.exact ==
                      doctest::Approx(*d.reference).epsilon(1e-7));
            }
            for (double x : {10.0, 100.0, 1000.0}) {
                const auto d = drift_V(m, k, spec, x);
                REQUIRE(d.reference.has_value());
                CHECK(d.reference_is_bound);
                CHECK(d.exact <= *d.reference * (1.0 + 1e-9) + 1e-9);
            }
        }
    }
}

TEST_CASE("drift of V rejects divergent negative moments") {
    const LyapunovSpec spec(1.0, 2.0);  // M(-2) diverges for the uniform kernel
    CHECK_THROWS_AS(drift_V(kTcp, FragmentationKernel::uniform(), spec, 0.5), InfinityResult);
}

namespace {

struct Fixture {
    const char* name;
    RateModel m;
    FragmentationKernel k;
    double a, b;
    bool harris, positive, expergo, crit0, critinf;
};

}  // namespace

TEST_CASE("classification matrix over the three-tier criteria") {
    const auto pm = FragmentationKernel::point_mass(0.5);
    const auto un = FragmentationKernel::uniform();
    auto cst = [](double c) { return RateFunction::constant(c); };
    auto pw = [](double c, double p) { return RateFunction::power(c, p); };
    auto tt = [](double c1, double p1, double c2, double p2) {
        return RateFunction::two_term(c1, p1, c2, p2);
    };

    const std::vector<Fixture> fixtures = {
        {"tcp", model(cst(1), pw(1, 1)), pm, 1, 1, true, true, true, false, false},
        {"const rates", model(cst(2), cst(3)), pm, 2, 2, true, true, true, false, false},
        {"uniform const", model(cst(1), cst(1)), un, 1, 0.5, true, true, true, false, false},
        {"crit-inf pass", model(tt(1, 0.5, 1, 1), cst(0.2)), pm, 0.25, 0.25,
         true, true, true, false, true},
        {"crit-inf fail", model(tt(1, 0.5, 1, 1), cst(1)), pm, 0.25, 0.25,
         false, false, false, false, true},
        {"crit-0 pass", model(pw(1, 1), tt(2, 0, 1, 2)), pm, 1, 1, true, true, true, true, false},
        {"crit-0 fail", model(pw(1, 1), tt(0.5, 0, 1, 2)), pm, 1, 1,
         false, false, false, true, false},
        {"violated both", model(pw(1, 2), cst(1)), pm, 1, 1, false, false, false, false, false},
        {"harris only", model(cst(1), pw(1, -0.5)), pm, 0.25, 1,
         true, false, false, false, false},
        {"no exp tier", model(cst(1), pw(1, -0.5)), pm, 1, 1, true, true, false, false, false},
        {"heavy growth", model(pw(1, 2), pw(1, 1.5)), pm, 2, 2, true, true, false, false, false},
        {"crit both fail", model(pw(1, 1), cst(1)), pm, 1, 1, false, false, false, true, true},
    };

    for (const auto& f : fixtures) {
        INFO(f.name);
        const auto c = classify_balance(f.m, f.k, f.a, f.b);
        CHECK(c.harris_recurrent == f.harris);
        CHECK(c.positive_recurrent == f.positive);
        CHECK(c.exp_ergodic == f.expergo);
        CHECK(c.critical_at_zero == f.crit0);
        CHECK(c.critical_at_infinity == f.critinf);
        // Tier implications must hold regardless of the fixture.
        if (c.exp_ergodic) CHECK(c.positive_recurrent);
        if (c.positive_recurrent) CHECK(c.harris_recurrent);
        if (!c.harris_recurrent) CHECK_FALSE(c.failing_condition().empty());

        // Joint time rescaling leaves every flag unchanged.
        const RateModel scaled{f.m.tau.scaled(3.0), f.m.beta.scaled(3.0)};
        const auto cs = classify_balance(scaled, f.k, f.a, f.b);
        CHECK(cs.harris_recurrent == c.harris_recurrent);
        CHECK(cs.positive_recurrent == c.positive_recurrent);
        CHECK(cs.exp_ergodic == c.exp_ergodic);
        CHECK(cs.critical_at_zero == c.critical_at_zero);
        CHECK(cs.critical_at_infinity == c.critical_at_infinity);
    }
}

TEST_CASE("exponential-tail bound checker") {
    const auto pm = FragmentationKernel::point_mass(0.5);
    const auto un = FragmentationKernel::uniform();

    const auto rp = check_bound_v(pm, 2.0, 0.25, 0.1, 10.0, 0.5);
    CHECK(rp.sup < 1e-3);
    CHECK(rp.pass);

    const auto ru = check_bound_v(un, 2.0, 0.25, 0.1, 10.0, 0.1);
    CHECK(ru.sup < 0.9);
    CHECK(ru.pass);

    // No exponential tilt: the integral is M(-eps) >= 1, failing every C.
    const auto r0 = check_bound_v(un, 2.0, 0.0, 0.1, 10.0, 0.1);
    CHECK(r0.sup >= 1.0);
    CHECK_FALSE(r0.pass);

    CHECK_THROWS_AS(check_bound_v(un, 2.0, 0.25, 1.0, 10.0, 0.1), InfinityResult);
}

TEST_CASE("exponential Lyapunov function and its drift") {
    const auto spec = ExpLyapunov::from_model(kTcp, 0.1, 0.5);
    CHECK(spec.theta == doctest::Approx(2.0));
    CHECK(spec.eta == doctest::Approx(0.25));
    // C^2 extension below 1 stays bounded and continuous.
    CHECK(spec.value(1.0 - 1e-9) == doctest::Approx(spec.value(1.0 + 1e-9)).epsilon(1e-6));
    CHECK(spec.derivative(1.0 - 1e-9) ==
          doctest::Approx(spec.derivative(1.0 + 1e-9)).epsilon(1e-5));
    CHECK(spec.value(0.01) < spec.value(1.0) * 2.0);

    const auto pm = FragmentationKernel::point_mass(0.5);
    CHECK_THROWS_AS(drift_Vtilde(kTcp, pm, spec, 0.5), DomainError);

    for (double x : {10.0, 20.0, 50.0}) {
        const auto d = drift_Vtilde(kTcp, pm, spec, x);
        // Single-atom closed form: V~'(x) + x (V~(x/2) - V~(x)).
        const double closed =
            spec.derivative(x) + x * (spec.value(x / 2.0) - spec.value(x));
        CHECK(d.exact == doctest::Approx(closed).epsilon(1e-9));
        CHECK(d.exact < 0.0);
        CHECK(d.satisfies_bound);
    }
}

TEST_CASE("drift report finds the negative-drift compact set") {
    const auto rep =
        drift_report(kTcp, FragmentationKernel::point_mass(0.5), LyapunovSpec(1.0, 1.0));
    CHECK(rep.compact_found);
    CHECK(rep.A >= 1.0);
    CHECK(rep.drift.front() < 0.0);
    CHECK(rep.drift.back() < 0.0);
    // L V ~ -x^2/2 at infinity and ~ -x^{-2} at zero for this model.
    CHECK(rep.slope_at_infinity == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rep.slope_at_zero == doctest::Approx(-2.0).epsilon(0.05));
    CHECK(rep.alpha > 0.0);
    // The fitted inequality holds on the probe grid.
    const LyapunovSpec spec(1.0, 1.0);
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        const double x = rep.grid[i];
        const double rhs = -rep.alpha * spec.value(x) +
                           (x >= 1.0 / rep.A && x <= rep.A ? rep.alpha_prime : 0.0);
        CHECK(rep.drift[i] <= rhs + 1e-9);
    }
}
