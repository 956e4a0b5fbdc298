#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "shelab/analytic.hpp"
#include "shelab/quadrature.hpp"

using namespace shelab;

TEST_CASE("quadrature integrates polynomials exactly") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) == Catch::Approx(1.0 / 3));
    CHECK(integrate([](double x) { return std::pow(x, 7); }, -1.0, 2.0) ==
          Catch::Approx((256.0 - 1.0) / 8.0));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
    CHECK(integrate([](double x) { return x; }, 1.0, 0.0) == Catch::Approx(-0.5));
}

TEST_CASE("quadrature handles oscillatory and peaked integrands") {
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
          Catch::Approx(2.0).margin(1e-10));
    CHECK(integrate([](double x) { return std::exp(-50.0 * x * x); }, -3.0, 3.0) ==
          Catch::Approx(std::sqrt(std::numbers::pi / 50.0)).margin(1e-10));
}

TEST_CASE("heat kernel values and errors") {
    CHECK(heat_kernel(1.0 / (2.0 * std::numbers::pi), 0.0) == Catch::Approx(1.0));
    CHECK(heat_kernel(1.0, 0.0) == Catch::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    CHECK_THROWS_AS(heat_kernel(0.0, 1.0), BadTime);
    CHECK_THROWS_AS(heat_kernel(-1.0, 0.0), BadTime);
}

TEST_CASE("heat kernel normalizes to one") {
    for (double t : {0.1, 0.5, 2.0}) {
        const double mass =
            integrate([&](double x) { return heat_kernel(t, x); }, -12.0 * std::sqrt(t),
                      12.0 * std::sqrt(t), 1e-12);
        CHECK(mass == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("heat kernel semigroup identity") {
    for (double s : {0.2, 1.0})
        for (double t : {0.3, 0.7})
            for (double x : {0.0, 0.5, 1.5}) {
                const double lhs = integrate(
                    [&](double y) { return heat_kernel(s, x - y) * heat_kernel(t, y); }, -14.0,
                    14.0, 1e-10);
                CHECK(lhs == Catch::Approx(heat_kernel(s + t, x)).margin(1e-6));
            }
}

TEST_CASE("cov_exact_half closed form vs quadrature oracle") {
    for (double t : {0.25, 0.5, 1.0, 3.14159265358979}) {
        for (double x : {0.0, 0.3, 1.0, 2.5}) {
            // oracle: int_0^t p_{2(t-s)}(x) ds, substitution s = t - q^2 removes
            // the endpoint singularity
            const double oracle = integrate(
                [&](double q) { return 2.0 * q * heat_kernel(2.0 * q * q, x); }, 0.0,
                std::sqrt(t), 1e-12);
            CHECK(cov_exact_half(t, x) == Catch::Approx(oracle).margin(1e-8));
        }
        CHECK(cov_exact_half(t, 0.0) ==
              Catch::Approx(std::sqrt(t / std::numbers::pi)).margin(1e-12));
    }
    CHECK(cov_exact_half(std::numbers::pi, 0.0) == Catch::Approx(1.0));
    CHECK_THROWS_AS(cov_exact_half(0.0, 1.0), BadTime);
}

TEST_CASE("cov_from_moment_curve reduces to the exact form at unit moments") {
    for (double t : {0.5, 1.0})
        for (double x : {0.0, 0.7, 2.0})
            CHECK(cov_from_moment_curve(t, x, [](double) { return 1.0; }) ==
                  Catch::Approx(cov_exact_half(t, x)).margin(1e-8));
}

TEST_CASE("cov_exact_half shape properties") {
    const double t = 0.8;
    // even and decreasing in |x|
    double prev = cov_exact_half(t, 0.0);
    for (double x = 0.05; x <= 6.0; x += 0.05) {
        const double v = cov_exact_half(t, x);
        CHECK(v == Catch::Approx(cov_exact_half(t, -x)).margin(1e-14));
        CHECK(v < prev);
        prev = v;
    }
    // integrates over x to t (the CLT limit variance)
    const double total =
        integrate([&](double x) { return cov_exact_half(t, x); }, -40.0, 40.0, 1e-10);
    CHECK(total == Catch::Approx(t).margin(1e-6));
    // bounded by the Gaussian envelope with C_T = sqrt(T/pi)
    for (double tt = 0.1; tt <= t; tt += 0.1)
        for (double x = 0.0; x <= 5.0; x += 0.25)
            CHECK(cov_exact_half(tt, x) <=
                  cov_bound(t, x, std::sqrt(t / std::numbers::pi)) + 1e-12);
}

TEST_CASE("cov_bound endpoints") {
    CHECK(cov_bound(1.0, 0.0, 3.0) == 3.0);
    CHECK(cov_bound(1.0, 100.0, 3.0) == Catch::Approx(0.0).margin(1e-300));
    CHECK_THROWS_AS(cov_bound(0.0, 1.0, 1.0), BadTime);
}

TEST_CASE("dual ODE solution") {
    CHECK(dual_ode_w(0.7, 0.0) == Catch::Approx(0.7));
    CHECK(dual_ode_w(2.0, 1.0) == Catch::Approx(1.0));
    // residual |w' + w^2/2| < 1e-9 by central differences at 100 points
    const double h = 1e-5;
    for (double lambda : {0.5, 2.0}) {
        for (int i = 1; i <= 100; ++i) {
            const double t = i * 0.02;
            const double w = dual_ode_w(lambda, t);
            const double wp = (dual_ode_w(lambda, t + h) - dual_ode_w(lambda, t - h)) / (2 * h);
            CHECK(std::abs(wp + 0.5 * w * w) < 1e-9);
        }
    }
    CHECK_THROWS_AS(dual_ode_w(0.0, 1.0), BadRange);
    CHECK_THROWS_AS(dual_ode_w(1.0, -1.0), BadTime);
}

TEST_CASE("mgf rate formula") {
    CHECK(mgf_rate(2.0, 1.0) == Catch::Approx(-1.0));
    CHECK(mgf_rate(1.0, 2.0) == Catch::Approx(-0.5));
    CHECK(std::abs(mgf_rate(1e-12, 1.0)) < 1e-11);
    CHECK_THROWS_AS(mgf_rate(-1.0, 1.0), BadRange);
    CHECK_THROWS_AS(mgf_rate(1.0, 0.0), BadTime);
}

TEST_CASE("lower tail rate formula and envelope identity") {
    CHECK(lower_tail_rate(0.25, 1.0) == Catch::Approx(-0.5));
    CHECK(std::abs(lower_tail_rate(1.0 - 1e-10, 1.0)) < 1e-9);
    CHECK_THROWS_AS(lower_tail_rate(0.0, 1.0), BadRange);
    CHECK_THROWS_AS(lower_tail_rate(1.0, 1.0), BadRange);
    CHECK_THROWS_AS(lower_tail_rate(0.5, 0.0), BadTime);

    // lower_tail_rate(a, t) = min over lambda of [lambda a + mgf_rate(lambda, t)],
    // located by golden-section search on (0, 1e3]
    auto envelope_min = [](double a, double t) {
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 1e-9, hi = 1e3;
        auto f = [&](double l) { return l * a + mgf_rate(l, t); };
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            if (f(x1) < f(x2)) {
                hi = x2;
                x2 = x1;
                x1 = hi - phi * (hi - lo);
            } else {
                lo = x1;
                x1 = x2;
                x2 = lo + phi * (hi - lo);
            }
        }
        return f(0.5 * (lo + hi));
    };
    for (double a : {0.1, 0.25, 0.5, 0.9})
        for (double t : {0.5, 1.0, 2.0})
            CHECK(lower_tail_rate(a, t) == Catch::Approx(envelope_min(a, t)).margin(1e-6));
}

TEST_CASE("rate query validation") {
    CHECK_NOTHROW(RateQuery{1.0, 1.0, 0.5}.validate());
    CHECK_THROWS_AS((RateQuery{0.0, 1.0, 0.5}.validate()), BadRange);
    CHECK_THROWS_AS((RateQuery{1.0, 0.0, 0.5}.validate()), BadTime);
    CHECK_THROWS_AS((RateQuery{1.0, 1.0, 1.5}.validate()), BadRange);
}
