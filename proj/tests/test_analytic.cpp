#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>
#include <algorithm>
#include <cmath>
#include <random>

#include "twolayer/analytic.hpp"
#include "twolayer/verification.hpp"

using namespace twolayer;

namespace {

// Real roots of c0 + c1 x + x^2 from Eigen's companion-matrix solver, ascending.
std::pair<double, double> companion_roots(double c0, double c1) {
    Eigen::PolynomialSolver<double, 2> solver(Eigen::Vector3d(c0, c1, 1.0));
    std::vector<double> roots;
    solver.realRoots(roots);
    REQUIRE(roots.size() == 2);
    std::sort(roots.begin(), roots.end());
    return {roots[0], roots[1]};
}

DimensionlessParams matrix_example() {
    DimensionlessParams p;
    p.alpha0 = 1.0;
    p.phi0 = 1.0;
    p.km = 0.5;
    p.beta0 = 0.2;
    p.delta0 = 0.3;
    return p;
}

}  // namespace

TEST_CASE("matrix rates for the worked example") {
    const DimensionlessParams p = matrix_example();
    MatrixRates r = matrix_rates(p, 0.0, 1.0);
    CHECK(r.A == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.B == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.m1 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.m2 == doctest::Approx(3.0).epsilon(1e-14));

    r = matrix_rates(p, 1.0, 1.0);
    CHECK(r.A == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(r.B == doctest::Approx(-1.2).epsilon(1e-14));
    const auto [lo, hi] = companion_roots(1.2, -4.0);
    CHECK(r.m1 == doctest::Approx(lo).epsilon(1e-12));
    CHECK(r.m2 == doctest::Approx(hi).epsilon(1e-12));
    CHECK(r.m1 == doctest::Approx(0.32668).epsilon(1e-5));
    CHECK(r.m2 == doctest::Approx(3.67332).epsilon(1e-5));
}

TEST_CASE("tissue rates for the worked example") {
    DimensionlessParams p;
    p.ka = 0.4;
    p.kd = 0.25;
    p.ki = 0.15;
    TissueRates r = tissue_rates(p, 0.0);
    CHECK(r.P == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(r.Q == doctest::Approx(0.06).epsilon(1e-14));
    const auto [lo, hi] = companion_roots(0.06, -0.8);
    CHECK(r.n1 == doctest::Approx(lo).epsilon(1e-12));
    CHECK(r.n2 == doctest::Approx(hi).epsilon(1e-12));
    CHECK(r.n1 == doctest::Approx(0.08377).epsilon(1e-4));
    CHECK(r.n2 == doctest::Approx(0.71623).epsilon(1e-5));

    p.ka = 0.0;
    const double b = 1.3;
    r = tissue_rates(p, b);
    CHECK(r.Q == doctest::Approx(b * b * (p.kd + p.ki)).epsilon(1e-14));
    r = tissue_rates(p, 0.0);
    CHECK(r.n1 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.n2 == doctest::Approx(p.kd + p.ki).epsilon(1e-14));
}

TEST_CASE("Vieta identities and discriminants over random draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mode(0.0, 6.0);
    for (int n = 0; n < 500; ++n) {
        const DimensionlessParams p = random_admissible(rng);
        const double a = mode(rng), b = mode(rng);
        const MatrixRates m = matrix_rates(p, a, p.gamma);
        const TissueRates t = tissue_rates(p, b);
        CHECK(std::abs(m.m1 + m.m2 - m.A) <= 1e-12 * std::abs(m.A));
        CHECK(std::abs(m.m1 * m.m2 + m.B) <= 1e-12 * std::max(std::abs(m.B), 1.0));
        CHECK(std::abs(t.n1 + t.n2 - t.P) <= 1e-12 * std::abs(t.P));
        CHECK(std::abs(t.n1 * t.n2 - t.Q) <= 1e-12 * std::max(std::abs(t.Q), 1.0));
        CHECK(t.P * t.P - 4.0 * t.Q >= 0.0);
        CHECK(m.m1 <= m.m2);
        CHECK(t.n1 <= t.n2);
    }
}

TEST_CASE("closed forms at t = 0 and t -> infinity") {
    const DimensionlessParams p;
    const AnalyticParams ap = default_analytic_params(p);
    for (double x : {0.0, 0.3, 1.0}) {
        const MatrixFields m = eval_matrix(x, 0.0, p, ap);
        CHECK(m.c0 == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(m.c0_star == doctest::Approx(1.0).epsilon(1e-14));
    }
    for (double x : {1.0, 1.5, 2.0}) {
        const TissueFields t = eval_tissue(x, 0.0, p, ap);
        CHECK(std::abs(t.c1) < 1e-14);
        CHECK(std::abs(t.c1_star) < 1e-14);
        CHECK(std::abs(t.ci) < 1e-14);
    }
    const double limit = -p.km * p.clim / p.solid_loss_rate();
    CHECK(eval_matrix(0.4, 1e4, p, ap).c0_star == doctest::Approx(limit).epsilon(1e-12));
}

TEST_CASE("vanishing rates switch tissue species off") {
    DimensionlessParams p;
    p.ki = 0.0;
    const AnalyticParams ap = default_analytic_params(p);
    for (double t : {0.5, 3.0, 20.0}) CHECK(eval_tissue(1.4, t, p, ap).ci == 0.0);
    p.ki = 0.3;
    p.ka = 0.0;
    for (double t : {0.5, 3.0, 20.0}) {
        const TissueFields f = eval_tissue(1.4, t, p, ap);
        CHECK(f.c1_star == 0.0);
        CHECK(f.ci == 0.0);
    }
}

TEST_CASE("exp_convolution matches the distinct-rate formula and its resonant limit") {
    const double r1 = 0.4, r2 = 1.7, t = 2.3;
    const double rates2[] = {r1, r2};
    const ConvolutionValue c = exp_convolution(rates2, t);
    const double expected = (std::exp(-r1 * t) - std::exp(-r2 * t)) / (r2 - r1);
    CHECK(c.value == doctest::Approx(expected).epsilon(1e-13));
    const double dexp = (-r1 * std::exp(-r1 * t) + r2 * std::exp(-r2 * t)) / (r2 - r1);
    CHECK(c.derivative == doctest::Approx(dexp).epsilon(1e-12));

    const double same[] = {r1, r1};
    CHECK(exp_convolution(same, t).value == doctest::Approx(t * std::exp(-r1 * t)).epsilon(1e-13));
    const double triple[] = {r1, r1, r1};
    CHECK(exp_convolution(triple, t).value == doctest::Approx(0.5 * t * t * std::exp(-r1 * t)).epsilon(1e-13));
    CHECK(resonant(1.0, 1.0 + 1e-12));
    CHECK_FALSE(resonant(1.0, 1.0 + 1e-6));
}

TEST_CASE("resonant parameters use the limiting form continuously") {
    DimensionlessParams p;
    const AnalyticParams ap = default_analytic_params(p);
    p.kid = tissue_rates(p, ap.b).n1;
    const TissueFields exact = eval_tissue(1.3, 4.0, p, ap);
    CHECK(exact.limiting_form);
    DimensionlessParams near = p;
    near.kid *= 1.0 + 1e-7;
    const TissueFields off = eval_tissue(1.3, 4.0, near, ap);
    CHECK_FALSE(off.limiting_form);
    CHECK(off.ci == doctest::Approx(exact.ci).epsilon(1e-6));
    CHECK(std::isfinite(exact.ci));
}

TEST_CASE("jets agree with finite differences") {
    const DimensionlessParams p;
    const AnalyticParams ap = default_analytic_params(p);
    const double x = 0.37, t = 1.9, h = 1e-5;
    const MatrixJet j = eval_matrix_jet(x, t, p, ap);
    CHECK(j.c0_t == doctest::Approx((eval_matrix(x, t + h, p, ap).c0 - eval_matrix(x, t - h, p, ap).c0) / (2 * h)).epsilon(1e-7));
    CHECK(j.c0_star_t ==
          doctest::Approx((eval_matrix(x, t + h, p, ap).c0_star - eval_matrix(x, t - h, p, ap).c0_star) / (2 * h)).epsilon(1e-7));
    const double xt = 1.41;
    const TissueJet k = eval_tissue_jet(xt, t, p, ap);
    CHECK(k.ci_t == doctest::Approx((eval_tissue(xt, t + h, p, ap).ci - eval_tissue(xt, t - h, p, ap).ci) / (2 * h)).epsilon(1e-7));
    CHECK(k.c1_x == doctest::Approx((eval_tissue(xt + h, t, p, ap).c1 - eval_tissue(xt - h, t, p, ap).c1) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("residuals: local equations vanish, the free matrix equation does not") {
    const DimensionlessParams p;
    const AnalyticParams ap = default_analytic_params(p);
    const ResidualReport r = residual(p, ap, matrix_sample_grid(p, 9, 41, 40.0), tissue_sample_grid(p, 9, 41, 40.0));
    CHECK(r.max_abs[0] <= 1e-10);
    CHECK(r.max_abs[2] <= 1e-10);
    CHECK(r.max_abs[4] <= 1e-10);
    CHECK(r.max_abs[1] > 1e-10);
    CHECK(std::string(ResidualReport::equation_name(1)) == "free_matrix");
}

TEST_CASE("interface flux mismatch is reported, and vanishes for zero amplitudes") {
    const DimensionlessParams p;
    AnalyticParams ap = make_analytic_params(1.1, 0.9, 1.0, 1.0, p.gamma);
    CHECK(interface_flux_mismatch(1.0, p, ap).mismatch > 1e-3);

    ap = make_analytic_params(1.1, 0.9, 0.0, 0.0, p.gamma);
    for (double t : {0.0, 0.7, 5.0}) {
        CHECK(interface_flux_mismatch(t, p, ap).mismatch == 0.0);
        const MatrixFields m = eval_matrix(0.5, t, p, ap);
        const TissueFields f = eval_tissue(1.5, t, p, ap);
        CHECK(m.c0 == 0.0);
        CHECK(f.c1 == 0.0);
        CHECK(f.c1_star == 0.0);
        CHECK(f.ci == 0.0);
    }
}
