#include <doctest.h>

#include <cmath>

#include "twolayer/error.hpp"
#include "twolayer/run_spec.hpp"
#include "twolayer/solver.hpp"

using namespace twolayer;

namespace {

DimensionlessParams frozen() {
    DimensionlessParams p;
    p.alpha0 = p.km = p.beta0 = p.delta0 = 0.0;
    p.ka = p.kd = p.ki = p.kid = 0.0;
    p.pm = 0.0;
    return p;
}

double total(const CompositeGrid& g, const SimState& s) { return matrix_mass(g, s) + tissue_mass(g, s); }

}  // namespace

TEST_CASE("grid geometry and trapezoidal weights") {
    const CompositeGrid g(4, 8, 1.0, 2.0);
    CHECK(g.matrix_nodes() == 5);
    CHECK(g.tissue_nodes() == 9);
    CHECK(g.matrix_x(4) == 1.0);
    CHECK(g.tissue_x(0) == 1.0);
    CHECK(g.tissue_x(8) == 2.0);
    CHECK(g.matrix_weight(0) == doctest::Approx(0.125));
    CHECK(g.matrix_weight(2) == doctest::Approx(0.25));
    const std::vector<double> ones(9, 1.0);
    CHECK(g.integrate_tissue(ones) == doctest::Approx(1.0));
    CHECK_THROWS_AS(CompositeGrid(2, 8, 1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(CompositeGrid(8, 8, 1.0, 1.0), ValidationError);
}

TEST_CASE("initialize loads the matrix only") {
    const CompositeGrid g(10, 12, 1.0, 2.0);
    const SimState s = initialize(g, DimensionlessParams{});
    for (double v : s.c0s) CHECK(v == 1.0);
    for (double v : s.c0) CHECK(v == 0.0);
    for (double v : s.ci) CHECK(v == 0.0);
    CHECK(s.c1.size() == 13);
    CHECK(initialize(g, DimensionlessParams{}, 2.5).c0s[3] == 2.5);
}

TEST_CASE("frozen species and pure diffusion") {
    const DimensionlessParams p = frozen();
    const CompositeGrid g(10, 10, p.l0, p.l1);
    SolverConfig c;
    c.dt = 0.01;
    c.t_end = 2.0;
    SimState s = initialize(g, p);
    for (double& v : s.c0) v = 0.7;
    const TimeSeries ts = simulate_from(s, p, g, c);
    for (const SimState& st : ts.samples) {
        for (double v : st.c0s) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
        for (double v : st.c0) CHECK(v == doctest::Approx(0.7).epsilon(1e-13));
        CHECK(matrix_mass(g, st) == doctest::Approx(matrix_mass(g, s)).epsilon(1e-13));
    }
}

TEST_CASE("t_end = 0 yields the initial state only") {
    const DimensionlessParams p;
    const CompositeGrid g(8, 8, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 0.0;
    const TimeSeries ts = simulate(p, g, c);
    REQUIRE(ts.samples.size() == 1);
    CHECK(ts.samples[0] == initialize(g, p));
}

TEST_CASE("sampling cadence and remainder step") {
    const DimensionlessParams p;
    const CompositeGrid g(8, 8, p.l0, p.l1);
    SolverConfig c;
    c.dt = 0.1;
    c.t_end = 1.05;
    c.sample_every = 5;
    const TimeSeries ts = simulate(p, g, c);
    REQUIRE(ts.samples.size() == 4);
    CHECK(ts.samples[1].t == doctest::Approx(0.5));
    CHECK(ts.samples[2].t == doctest::Approx(1.0));
    CHECK(ts.samples[3].t == 1.05);
}

TEST_CASE("mass is conserved without internalization sink under zero flux") {
    DimensionlessParams p;
    p.kid = 0.0;
    for (double pm : {InterfaceParams::kInfinite, 0.8}) {
        p.pm = pm;
        p.sigma = pm == 0.8 ? 1.5 : 1.0;
        const CompositeGrid g(20, 20, p.l0, p.l1);
        SolverConfig c;
        c.t_end = 30.0;
        const TimeSeries ts = simulate(p, g, c);
        const double m0 = total(g, ts.samples.front());
        for (const SimState& s : ts.samples) CHECK(std::abs(total(g, s) - m0) <= 1e-12 * m0);
    }
}

TEST_CASE("perfect contact holds the interface values equal and a sink pins the far end") {
    DimensionlessParams p;
    p.sigma = 1.0;
    const CompositeGrid g(10, 10, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 3.0;
    c.outer_bc = OuterBoundary::Sink;
    const TimeSeries ts = simulate(p, g, c);
    for (const SimState& s : ts.samples) {
        CHECK(s.c0.back() == doctest::Approx(s.c1.front()).epsilon(1e-12));
        CHECK(std::abs(s.c1.back()) <= 1e-15);
    }
    CHECK(sink_outflow_rate(g, p, ts.samples.back()) > 0.0);
}

TEST_CASE("a large permeability approaches perfect contact") {
    DimensionlessParams p;
    const CompositeGrid g(10, 10, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 5.0;
    const SimState perfect = simulate(p, g, c).samples.back();
    p.pm = 1e7;
    const SimState leaky = simulate(p, g, c).samples.back();
    for (std::size_t j = 0; j < perfect.c1.size(); ++j)
        CHECK(leaky.c1[j] == doctest::Approx(perfect.c1[j]).epsilon(1e-5));
}

TEST_CASE("an impermeable interface leaves the tissue empty") {
    DimensionlessParams p;
    p.pm = 0.0;
    const CompositeGrid g(10, 10, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 5.0;
    const SimState s = simulate(p, g, c).samples.back();
    for (double v : s.c1) CHECK(v == 0.0);
    CHECK(matrix_mass(g, s) > 0.0);
}

TEST_CASE("transported species stay nonnegative and solid drug settles at its limit") {
    const DimensionlessParams p;
    const CompositeGrid g(20, 20, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 150.0;
    const TimeSeries ts = simulate(p, g, c);
    CHECK(ts.most_negative >= -1e-6);
    const double limit = -p.km * p.clim / p.solid_loss_rate();
    for (double v : ts.samples.back().c0s) CHECK(v == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("solid drug decays faster next to the interface") {
    const DimensionlessParams p;
    const CompositeGrid g(20, 20, p.l0, p.l1);
    SolverConfig c;
    c.t_end = 10.0;
    const SimState s = simulate(p, g, c).samples.back();
    CHECK(s.c0s[19] < s.c0s[0]);
}

TEST_CASE("stepper validation and failure paths") {
    const DimensionlessParams p;
    const CompositeGrid g(8, 8, p.l0, p.l1);
    SolverConfig c;
    c.dt = -1.0;
    CHECK_FALSE(validate(c).ok());
    CHECK_THROWS_AS(simulate(p, g, c), ValidationError);
    c.dt = 0.01;
    c.theta = 1.5;
    CHECK_THROWS_AS(simulate(p, g, c), ValidationError);
    c.theta = 0.5;
    const Stepper stepper(g, p, c);
    SimState bad = initialize(g, p);
    bad.c1.pop_back();
    CHECK_THROWS_AS(stepper.step(bad), ValidationError);
    SimState nan = initialize(g, p);
    nan.c0[2] = std::nan("");
    CHECK_THROWS_AS(stepper.step(nan), NumericalError);
    CHECK(outer_boundary_from_string("sink") == OuterBoundary::Sink);
    CHECK(to_string(OuterBoundary::ZeroFlux) == "zero-flux");
    CHECK_THROWS_AS(outer_boundary_from_string("dirichlet"), ValidationError);
}
