#include <doctest.h>

#include <cmath>

#include "twolayer/error.hpp"
#include "twolayer/params.hpp"

using namespace twolayer;

TEST_CASE("phi0 follows k eps0 / (1 - eps0)") {
    CHECK(phi0(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi0(0.0, 0.3) == 0.0);
    CHECK(phi0(2.0, 0.25) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(phi0(1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(phi0(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(phi0(-1.0, 0.5), ValidationError);
}

TEST_CASE("nondimensionalize scales lengths, times and diffusivities") {
    ModelParams p = reference_params();
    p.tissue.D1 = p.matrix.D0;
    CHECK(nondimensionalize(p).d1 == 1.0);
    p.tissue.D1 = p.matrix.D0 / 2.0;
    CHECK(nondimensionalize(p).d1 == 0.5);

    p.matrix.l0 = 2.0;
    p.tissue.l1 = 5.0;
    p.matrix.D0 = 4.0;
    p.tissue.D1 = 1.0;
    p.matrix.M = 3.0;
    p.matrix.Clim = 0.6;
    p.tissue.ka = 0.8;
    p.interface.Pm = 6.0;
    const DimensionlessParams d = nondimensionalize(p);
    CHECK(d.l0 == 1.0);
    CHECK(d.l1 == doctest::Approx(2.5));
    CHECK(d.gamma == 1.0);
    CHECK(d.d1 == doctest::Approx(0.25));
    CHECK(d.scales.time == doctest::Approx(1.0));
    CHECK(d.clim == doctest::Approx(0.2));
    CHECK(d.ka == doctest::Approx(0.8));
    CHECK(d.pm == doctest::Approx(3.0));
    CHECK(d.phi0 == doctest::Approx(phi0(p.matrix.k, p.matrix.eps0)));
}

TEST_CASE("redimensionalize inverts nondimensionalize") {
    ModelParams p = reference_params();
    p.matrix.l0 = 0.7;
    p.tissue.l1 = 1.9;
    p.matrix.D0 = 2.5;
    p.matrix.M = 4.0;
    p.interface.Pm = 0.3;
    const ModelParams q = redimensionalize(nondimensionalize(p));
    CHECK(q.matrix.alpha0 == doctest::Approx(p.matrix.alpha0));
    CHECK(q.matrix.Clim == doctest::Approx(p.matrix.Clim));
    CHECK(q.tissue.D1 == doctest::Approx(p.tissue.D1));
    CHECK(q.tissue.l1 == doctest::Approx(p.tissue.l1));
    CHECK(q.interface.Pm == doctest::Approx(p.interface.Pm));
}

TEST_CASE("validation reports") {
    CHECK(validate(reference_params()).ok());

    ModelParams p = reference_params();
    p.matrix.eps0 = 1.2;
    ValidationReport r = validate(p);
    CHECK_FALSE(r.ok());
    CHECK(r.mentions("eps0"));
    CHECK(r.to_string().find("porosity") != std::string::npos);

    p = reference_params();
    p.tissue.l1 = p.matrix.l0;
    r = validate(p);
    CHECK(r.mentions("l1"));
    CHECK(r.to_string().find("geometry") != std::string::npos);

    p = reference_params();
    p.tissue.kd = -0.1;
    p.matrix.D0 = 0.0;
    r = validate(p);
    CHECK(r.mentions("kd"));
    CHECK(r.mentions("D0"));
    CHECK_THROWS_AS(require_valid(r), ValidationError);

    p = reference_params();
    p.interface.Pm = 0.0;
    CHECK(validate(p).ok());
    p.interface.Pm = std::nan("");
    CHECK_FALSE(validate(p).ok());
}
