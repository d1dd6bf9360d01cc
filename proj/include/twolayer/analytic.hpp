#pragma once

#include <span>
#include <string>
#include <vector>

#include "twolayer/params.hpp"

namespace twolayer {

/// Separation constants of the single-mode closed-form solution.
/// lambda = -a^2 and mu = -b^2 are kept consistent by make_analytic_params.
struct AnalyticParams {
    double a = 0.0;
    double b = 0.0;
    double E1 = 1.0;
    double E2 = 1.0;
    double lambda = 0.0;
    double mu = 0.0;
    double gamma = 1.0;
};

AnalyticParams make_analytic_params(double a, double b, double E1, double E2, double gamma);

/// a = pi/(2 l0), b = pi/(2 (l1 - l0)), E1 = E2 = 1, gamma from the scaled parameters.
AnalyticParams default_analytic_params(const DimensionlessParams& p);

/// Roots of m^2 - A m - B = 0 with m1 <= m2.
struct MatrixRates {
    double A = 0.0;
    double B = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

/// Roots of n^2 - P n + Q = 0 with n1 <= n2.
struct TissueRates {
    double P = 0.0;
    double Q = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
};

MatrixRates matrix_rates(const DimensionlessParams& p, double a, double gamma);
TissueRates tissue_rates(const DimensionlessParams& p, double b);

struct MatrixFields {
    double c0 = 0.0;
    double c0_star = 0.0;
    bool limiting_form = false;  ///< a resonant denominator was replaced by its limit
};

struct TissueFields {
    double c1 = 0.0;
    double c1_star = 0.0;
    double ci = 0.0;
    bool limiting_form = false;
};

/// Closed-form matrix fields at 0 <= x <= l0, t >= 0 (scaled frame).
MatrixFields eval_matrix(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap);

/// Closed-form tissue fields at l0 <= x <= l1, t >= 0 (scaled frame).
TissueFields eval_tissue(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap);

/// Fields together with their exact time derivatives and second space derivatives.
struct MatrixJet {
    MatrixFields value;
    double c0_t = 0.0, c0_star_t = 0.0, c0_x = 0.0, c0_xx = 0.0;
};

struct TissueJet {
    TissueFields value;
    double c1_t = 0.0, c1_star_t = 0.0, ci_t = 0.0, c1_x = 0.0, c1_xx = 0.0;
};

MatrixJet eval_matrix_jet(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap);
TissueJet eval_tissue_jet(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap);

/// Convolution of the decaying exponentials e^{-r_k t}, i.e. (-1)^{n-1} times the
/// divided difference of e^{-r t} over the given rates. Evaluated through the
/// exponential of a lower bidiagonal matrix, so coincident rates are handled
/// without cancellation. Supports 1 to 4 rates.
struct ConvolutionValue {
    double value = 0.0;
    double derivative = 0.0;
};
ConvolutionValue exp_convolution(std::span<const double> rates, double t);

/// True when |p - q| <= 1e-9 * max(|p|, |q|).
bool resonant(double p, double q);

struct SamplePoint {
    double x = 0.0;
    double t = 0.0;
};

/// Max absolute residual of each governing equation when the closed forms are substituted.
/// Index 0..4 correspond to: solid matrix drug, free matrix drug, bound tissue drug,
/// free tissue drug, internalized drug.
struct ResidualReport {
    double max_abs[5] = {0, 0, 0, 0, 0};
    static const char* equation_name(int n);
};

ResidualReport residual(const DimensionlessParams& p, const AnalyticParams& ap,
                        std::span<const SamplePoint> matrix_points,
                        std::span<const SamplePoint> tissue_points);

/// Uniform interior sample grids (endpoints excluded in x) for residual checks.
std::vector<SamplePoint> matrix_sample_grid(const DimensionlessParams& p, int nx, int nt, double t_max);
std::vector<SamplePoint> tissue_sample_grid(const DimensionlessParams& p, int nx, int nt, double t_max);

/// Flux carried by each side of x = l0 in the analytic mode. The single-mode forms
/// cannot match these for all t; the mismatch is measured, never forced to zero.
struct FluxMismatch {
    double t = 0.0;
    double matrix_flux = 0.0;  ///< -gamma dC0/dx at l0
    double tissue_flux = 0.0;  ///< -d1 dC1/dx at l0
    double mismatch = 0.0;     ///< |matrix_flux - tissue_flux|
};

FluxMismatch interface_flux_mismatch(double t, const DimensionlessParams& p, const AnalyticParams& ap);

}  // namespace twolayer
