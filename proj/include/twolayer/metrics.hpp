#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twolayer/run_spec.hpp"
#include "twolayer/solver.hpp"

namespace twolayer {

enum class Species { C0Star, C0, C1Star, C1, Ci };

std::string to_string(Species s);
Species species_from_string(const std::string& s);
inline bool in_matrix(Species s) { return s == Species::C0Star || s == Species::C0; }

/// Time series of one species at x (scaled), linearly interpolated between nodes.
/// Throws ValidationError when x lies outside the species' layer.
std::vector<double> probe_series(const TimeSeries& ts, Species s, double x);
std::vector<double> sample_times(const TimeSeries& ts);

struct Peak {
    double value = 0.0;
    double time = 0.0;
    std::size_t index = 0;
    bool at_end = false;  ///< the discrete maximum is the last sample
};

/// Discrete maximum refined by the parabola through the three bracketing samples.
Peak locate_peak(std::span<const double> t, std::span<const double> y);

/// First time after the peak where y falls to `fraction` of the peak value, linearly
/// interpolated; +infinity if it never does.
double extinction_time(std::span<const double> t, std::span<const double> y, const Peak& peak,
                       double fraction = 0.01);

/// True when y rises (weakly) to one maximum and then falls (weakly), allowing wiggles of
/// size tol * max|y|.
bool is_unimodal(std::span<const double> y, double tol = 1e-9);
bool is_nonincreasing(std::span<const double> y, double tol = 1e-12);

struct ProbeMetrics {
    Species species = Species::C0Star;
    double x = 0.0;  ///< scaled coordinate
    double peak = 0.0;
    double t_peak = 0.0;
    double t_extinction = std::numeric_limits<double>::infinity();
    bool peak_at_end = false;
};

struct ReleaseMetrics {
    std::vector<ProbeMetrics> probes;
    std::vector<double> times;
    std::vector<double> matrix_residual_fraction;  ///< matrix mass / initial total mass
    std::vector<double> degraded_fraction;         ///< cumulative degraded mass / initial total mass
    double ci_time_integral = 0.0;                 ///< int_0^T int Ci dx dt
    std::vector<std::string> warnings;

    const ProbeMetrics& at(Species s, double x) const;
};

inline constexpr double kExtinctionFraction = 0.01;

/// Metrics for each species at each probe of its layer. Probe coordinates are scaled.
ReleaseMetrics release_metrics(const TimeSeries& ts, std::span<const double> matrix_probes,
                               std::span<const double> tissue_probes);

/// Runs the spec (nondimensionalize, simulate) and evaluates metrics at its probes.
ReleaseMetrics run_metrics(const RunSpec& spec);

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    ReleaseMetrics metrics;
};

struct SweepTable {
    std::string parameter;
    std::vector<SweepRow> rows;
};

/// One metrics row per value, computed concurrently. A failing row records its error
/// and does not affect the others.
SweepTable sweep(const RunSpec& base, const std::string& name, std::span<const double> values,
                 unsigned threads = 0);

/// Scalar quantity extracted from ReleaseMetrics.
struct MetricSelector {
    enum class Kind { Peak, TimeToPeak, Extinction, DegradedFraction, MatrixResidualFraction, CiTimeIntegral };
    Kind kind = Kind::CiTimeIntegral;
    Species species = Species::Ci;
    double x = 0.0;      ///< dimensional probe coordinate for per-probe kinds
    double scale = 1.0;  ///< unit conversion applied to the extracted value

    /// "peak:C1@1.5", "t_peak:Ci@2", "extinction:C0_star@0", "degraded_fraction",
    /// "matrix_fraction", "ci_integral".
    static MetricSelector parse(const std::string& text);
    std::string name() const;
    double extract(const ReleaseMetrics& m, const RunSpec& spec) const;
};

struct SensitivityRecord {
    std::string parameter;
    std::string metric;
    double base_value = 0.0;
    double rel_step = 0.0;
    double metric_base = 0.0;
    double metric_plus = 0.0;
    double metric_minus = 0.0;
    double central = 0.0;   ///< (p/m) (m+ - m-) / (2 dp)
    double forward = 0.0;   ///< (p/m) (m+ - m) / dp
    double backward = 0.0;  ///< (p/m) (m - m-) / dp
};

SensitivityRecord local_sensitivity(const RunSpec& base, const std::string& name, double rel_step,
                                    const MetricSelector& metric);

}  // namespace twolayer
