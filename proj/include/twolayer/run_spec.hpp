#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twolayer/analytic.hpp"
#include "twolayer/grid.hpp"
#include "twolayer/params.hpp"
#include "twolayer/solver.hpp"

namespace twolayer {

struct GridSpec {
    int nx0 = 40;
    int nx1 = 40;
    bool operator==(const GridSpec&) const = default;
};

/// Probe locations in dimensional coordinates.
struct Probes {
    std::vector<double> matrix;
    std::vector<double> tissue;
    bool operator==(const Probes&) const = default;
};

/// User overrides for the closed-form mode (scaled frame); unset values take defaults.
struct AnalyticSpec {
    std::optional<double> a;
    std::optional<double> b;
    double E1 = 1.0;
    double E2 = 1.0;
    bool operator==(const AnalyticSpec&) const = default;
};

/// Everything needed to reproduce one run. Solver times are dimensional.
struct RunSpec {
    ModelParams params;
    SolverConfig solver;
    GridSpec grid;
    Probes probes;
    AnalyticSpec analytic;

    bool operator==(const RunSpec&) const = default;
};

/// Reference scenario, default grid, solver and probes.
RunSpec default_run_spec();

/// Four probes spread evenly over each layer, endpoints included.
Probes default_probes(const ModelParams& p);

/// Parameter lookup by configuration key (alpha0, k, eps0, km, Clim, beta0, delta0,
/// D0, l0, M, ka, kd, ki, kid, D1, l1, Pm, sigma).
const std::vector<std::string>& parameter_names();
double get_parameter(const ModelParams& p, const std::string& name);
void set_parameter(ModelParams& p, const std::string& name, double value);

/// Solver configuration with dt and t_end converted to the scaled time.
SolverConfig scaled_config(const SolverConfig& c, const Scales& s);
CompositeGrid make_grid(const GridSpec& g, const DimensionlessParams& p);
AnalyticParams resolve_analytic(const AnalyticSpec& spec, const DimensionlessParams& p);

}  // namespace twolayer
