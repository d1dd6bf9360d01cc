#include <doctest.h>

#include <random>

#include "twolayer/config.hpp"
#include "twolayer/error.hpp"
#include "twolayer/verification.hpp"

using namespace twolayer;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("an empty document gives the reference scenario") {
    CHECK(parse_config("{}") == default_run_spec());
    const RunSpec s = parse_config(R"({"matrix": {"km": 0.4}})");
    CHECK(s.params.matrix.km == 0.4);
    CHECK(s.params.tissue == reference_params().tissue);
}

TEST_CASE("rejections name the problem") {
    const std::string porosity = message_of(R"({"matrix": {"eps0": 1.5}})");
    CHECK(porosity.find("eps0") != std::string::npos);
    CHECK(porosity.find("porosity") != std::string::npos);

    const std::string unknown = message_of(R"({"matrix": {"kmm": 0.2}})");
    CHECK(unknown.find("kmm") != std::string::npos);
    CHECK(message_of(R"({"solver": {"dt": 0.1, "typo": 1}})").find("solver.typo") != std::string::npos);
    CHECK(message_of(R"({"matrix": {"km": "fast"}})").find("km") != std::string::npos);

    const std::string syntax = message_of("{\n  \"matrix\": {\n    \"km\": 0.2,,\n  }\n}");
    CHECK(syntax.find("line 3") != std::string::npos);

    CHECK(message_of(R"({"solver": {"outer_bc": "open"}})").find("outer_bc") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("permeability accepts infinite and finite values") {
    CHECK(parse_config(R"({"interface": {"Pm": "infinite"}})").params.interface.perfect_contact());
    CHECK(parse_config(R"({"interface": {"Pm": 2.5}})").params.interface.Pm == 2.5);
    CHECK(parse_config(R"({"interface": {"Pm": 0}})").params.interface.Pm == 0.0);
}

TEST_CASE("probes default from the geometry and must lie in their layer") {
    const RunSpec s = parse_config(R"({"tissue": {"l1": 3.0}})");
    CHECK(s.probes.tissue.back() == 3.0);
    CHECK_FALSE(message_of(R"({"probes": {"matrix": [0.0, 1.5]}})").empty());
}

TEST_CASE("write_config round-trips random admissible specs") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> cells(4, 64);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        RunSpec spec;
        spec.params = redimensionalize(random_admissible(rng));
        spec.params.matrix.D0 = 0.1 + 3.0 * u(rng);
        spec.params.matrix.M = 0.5 + u(rng);
        spec.params.matrix.l0 = 0.2 + u(rng);
        spec.params.tissue.l1 = spec.params.matrix.l0 * (1.5 + u(rng));
        spec.params.interface.Pm = u(rng) < 0.5 ? InterfaceParams::kInfinite : 10.0 * u(rng);
        spec.params.interface.sigma = 0.5 + u(rng);
        spec.solver.dt = 1e-3 + u(rng) * 0.1;
        spec.solver.t_end = 10.0 * u(rng);
        spec.solver.theta = 0.5 + 0.5 * u(rng);
        spec.solver.outer_bc = u(rng) < 0.5 ? OuterBoundary::Sink : OuterBoundary::ZeroFlux;
        spec.solver.sample_every = cells(rng);
        spec.grid = {cells(rng), cells(rng)};
        spec.probes = default_probes(spec.params);
        if (u(rng) < 0.5) spec.analytic.a = 0.1 + u(rng);
        spec.analytic.E2 = u(rng);
        REQUIRE(parse_config(write_config(spec).dump()) == spec);
    }
}

TEST_CASE("a manifest is accepted as a configuration") {
    RunSpec spec = default_run_spec();
    spec.params.tissue.kid = 0.25;
    Json manifest;
    manifest["manifest_version"] = 1;
    manifest["config"] = write_config(spec);
    manifest["outputs"] = Json::object();
    CHECK(parse_config(manifest.dump()) == spec);
}
