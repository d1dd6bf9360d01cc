#pragma once

#include <memory>
#include <string>
#include <vector>

#include "twolayer/grid.hpp"
#include "twolayer/params.hpp"

namespace twolayer {

/// Concentrations of all five species at one time, in the scaled frame.
struct SimState {
    double t = 0.0;
    std::vector<double> c0s;  ///< solid (loaded) drug in the matrix
    std::vector<double> c0;   ///< free drug in the matrix
    std::vector<double> c1s;  ///< bound drug in the tissue
    std::vector<double> c1;   ///< free drug in the tissue
    std::vector<double> ci;   ///< internalized drug in the tissue

    bool operator==(const SimState&) const = default;
};

enum class OuterBoundary { ZeroFlux, Sink };

std::string to_string(OuterBoundary bc);
OuterBoundary outer_boundary_from_string(const std::string& s);

struct SolverConfig {
    double dt = 0.01;
    double t_end = 150.0;
    double theta = 0.5;  ///< 1 = implicit Euler, 0.5 = trapezoidal
    OuterBoundary outer_bc = OuterBoundary::ZeroFlux;
    int sample_every = 10;  ///< output cadence in steps
    bool clamp_nonnegative = false;  ///< clip every species at zero after each step

    bool operator==(const SolverConfig&) const = default;
};

ValidationReport validate(const SolverConfig& c);

/// Sampled states of one run. Samples include t = 0 and the final time.
struct TimeSeries {
    CompositeGrid grid;
    DimensionlessParams params;
    SolverConfig config;
    std::vector<SimState> samples;
    double most_negative = 0.0;  ///< min_value over every step (0 if none negative)
};

/// Solid drug at the (dimensionless) loading everywhere in the matrix, all else zero.
SimState initialize(const CompositeGrid& grid, const DimensionlessParams& p, double loading = 1.0);

/// theta-scheme stepper for the coupled linear system. The step matrix is factored
/// once per step size and reused.
class Stepper {
public:
    Stepper(const CompositeGrid& grid, const DimensionlessParams& p, const SolverConfig& config);
    ~Stepper();
    Stepper(Stepper&&) noexcept;
    Stepper& operator=(Stepper&&) noexcept;

    /// Advances by the configured dt.
    SimState step(const SimState& s) const;
    /// Advances by an arbitrary dt (factors a separate matrix on first use of each size).
    SimState step(const SimState& s, double dt) const;

    const CompositeGrid& grid() const { return grid_; }
    std::size_t unknowns() const;

    /// Outflow rate through x = l1 for the given state (zero under ZeroFlux).
    double outflow_rate(const SimState& s) const;

private:
    struct Impl;
    CompositeGrid grid_;
    std::unique_ptr<Impl> impl_;
};

/// One step from the given state; factors the system on every call.
SimState step(const SimState& state, const CompositeGrid& grid, const DimensionlessParams& p,
              const SolverConfig& config);

TimeSeries simulate(const DimensionlessParams& p, const CompositeGrid& grid, const SolverConfig& config,
                    double loading = 1.0);
TimeSeries simulate_from(const SimState& initial, const DimensionlessParams& p,
                         const CompositeGrid& grid, const SolverConfig& config);

/// Trapezoidal masses of the species sums in each layer.
double matrix_mass(const CompositeGrid& grid, const SimState& s);
double tissue_mass(const CompositeGrid& grid, const SimState& s);
double internalized_mass(const CompositeGrid& grid, const SimState& s);

/// Outflow through x = l1 consistent with the discrete scheme: free drug leaving the
/// last interior node plus free drug released by unbinding at the pinned boundary node.
double sink_outflow_rate(const CompositeGrid& grid, const DimensionlessParams& p, const SimState& s);

/// Smallest value of C0, C1*, C1 and Ci. Solid drug is left out: with km * Clim > 0 it
/// settles at -km Clim / (alpha0 phi0 + beta0).
double min_value(const SimState& s);

}  // namespace twolayer
