#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "twolayer/analytic.hpp"
#include "twolayer/solver.hpp"

namespace twolayer {

/// Which local ODE of the closed-form family to integrate numerically.
enum class OracleEquation {
    SolidMatrix,   ///< solid drug, driven by the closed-form free matrix drug
    BoundTissue,   ///< bound tissue drug, driven by the closed-form free tissue drug
    Internalized,  ///< internalized drug, driven by the closed-form bound drug
};

std::string to_string(OracleEquation e);

struct OracleResult {
    double max_relative_deviation = 0.0;
    double max_abs_deviation = 0.0;
    double reference_scale = 0.0;  ///< max |closed form| over the time grid
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Integrates the chosen ODE with adaptive classical RK4 (step doubling) from the
/// initial values and compares with the closed form at every t in t_grid.
/// Throws NumericalError when the step size collapses.
OracleResult ode_oracle(OracleEquation which, const DimensionlessParams& p, const AnalyticParams& ap,
                        double x, std::span<const double> t_grid);

/// 10 / (smallest positive decay rate entering the chosen closed form).
double oracle_horizon(OracleEquation which, const DimensionlessParams& p, const AnalyticParams& ap);

/// Uniform grid of n points on [0, t_max].
std::vector<double> uniform_times(double t_max, int n);

struct LedgerEntry {
    double t = 0.0;
    double matrix_mass = 0.0;
    double tissue_mass = 0.0;
    double sink = 0.0;     ///< cumulative kid * int Ci dx dt
    double outflow = 0.0;  ///< cumulative flux through x = l1
    double defect = 0.0;   ///< |matrix + tissue + sink + outflow - initial|
    double relative_defect = 0.0;
};

struct MassLedger {
    double initial_total = 0.0;
    double max_relative_defect = 0.0;
    std::vector<LedgerEntry> entries;
};

/// Species-sum mass balance over a time series. Trapezoidal in space and time.
MassLedger mass_audit(const TimeSeries& ts);

/// The five species on each side, in a fixed order for per-species reporting.
inline constexpr std::array<const char*, 5> kSpeciesNames = {"C0_star", "C0", "C1_star", "C1", "Ci"};

enum class RefinementKind { Space, Time };

struct ConvergenceReport {
    RefinementKind kind = RefinementKind::Space;
    std::vector<double> steps;  ///< h0 (space) or dt (time) per level
    /// successive-level differences, per species then combined (max over species)
    std::vector<std::array<double, 5>> species_differences;
    std::vector<double> differences;
    /// observed orders log2(d_k / d_{k+1}); one fewer than differences
    std::vector<std::array<double, 5>> species_orders;
    std::vector<double> orders;
    std::vector<std::string> warnings;

    /// Order from the two finest differences.
    double finest_order() const { return orders.empty() ? 0.0 : orders.back(); }
};

/// Runs `levels` simulations, halving h (Space) or dt (Time) each time, and reports
/// observed orders from successive-level differences at the coarse nodes.
ConvergenceReport convergence_study(const DimensionlessParams& p, const SolverConfig& config,
                                    int nx0, int nx1, int levels, RefinementKind kind);

struct ComparisonReport {
    double t_start = 0.0;
    double t_stop = 0.0;
    /// full solver started from the closed-form fields, relative deviation per species
    std::array<double, 5> pde_deviation{};
    /// theta-scheme integration of the local ODE species with closed-form drivers;
    /// entries for C0_star, C1_star, Ci (others unused, zero)
    std::array<double, 5> driven_deviation{};
    std::vector<FluxMismatch> flux;
    double max_flux_mismatch = 0.0;
};

ComparisonReport compare_analytic_numeric(const DimensionlessParams& p, const AnalyticParams& ap,
                                          const CompositeGrid& grid, const SolverConfig& config,
                                          double t_start, double duration);

/// Admissible scaled parameters with every rate constant log-uniform on [1e-2, 1e1].
DimensionlessParams random_admissible(std::mt19937_64& rng);

}  // namespace twolayer
