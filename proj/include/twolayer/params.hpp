#pragma once

#include <limits>
#include <string>
#include <vector>

namespace twolayer {

/// Physicochemical constants of the polymeric matrix (reservoir) layer, dimensional.
struct MatrixParams {
    double alpha0 = 1.0;  ///< solid-liquid transfer rate [1/time]
    double k = 0.5;       ///< partition coefficient [-]
    double eps0 = 0.5;    ///< porosity [-], strictly inside (0,1)
    double km = 0.2;      ///< mass transfer coefficient [1/time]
    double Clim = 0.3;    ///< solubilisation limit [mol/volume]
    double beta0 = 0.1;   ///< dissociation rate constant [1/time]
    double delta0 = 0.05; ///< association (recrystallisation) rate constant [1/time]
    double D0 = 1.0;      ///< free-drug diffusivity in the matrix [length^2/time]
    double l0 = 1.0;      ///< matrix thickness [length]
    double M = 1.0;       ///< initial solid-drug loading [mol/volume]

    bool operator==(const MatrixParams&) const = default;
};

/// Kinetic and transport constants of the tissue layer, dimensional.
struct TissueParams {
    double ka = 0.6;   ///< binding rate [1/time]
    double kd = 0.2;   ///< unbinding rate [1/time]
    double ki = 0.3;   ///< internalization rate [1/time]
    double kid = 0.1;  ///< lysosomal degradation rate [1/time]
    double D1 = 0.5;   ///< free-drug diffusivity in tissue [length^2/time]
    double l1 = 2.0;   ///< outer tissue coordinate [length], must exceed l0

    bool operator==(const TissueParams&) const = default;
};

/// Membrane closure at x = l0: flux J = Pm (C0 - sigma C1).
/// An infinite Pm means perfect contact, C0 = sigma C1.
struct InterfaceParams {
    static constexpr double kInfinite = std::numeric_limits<double>::infinity();

    double Pm = kInfinite;  ///< membrane permeability [length/time] or kInfinite
    double sigma = 1.0;     ///< interface partition coefficient [-]

    bool perfect_contact() const { return Pm == kInfinite; }
    bool operator==(const InterfaceParams&) const = default;
};

struct ModelParams {
    MatrixParams matrix;
    TissueParams tissue;
    InterfaceParams interface;

    bool operator==(const ModelParams&) const = default;
};

/// Conversion factors between the dimensional and the scaled frame:
/// x = length * x_hat, t = time * t_hat, C = concentration * C_hat.
struct Scales {
    double length = 1.0;
    double time = 1.0;
    double concentration = 1.0;

    bool operator==(const Scales&) const = default;
};

/// All model constants in the scaled frame (lengths by l0, time by l0^2/D0,
/// concentrations by M). Rate constants are multiplied by the time scale.
struct DimensionlessParams {
    double alpha0 = 1.0;
    double k = 0.5;
    double eps0 = 0.5;
    double phi0 = 0.5;
    double km = 0.2;
    double clim = 0.3;
    double beta0 = 0.1;
    double delta0 = 0.05;

    double ka = 0.6;
    double kd = 0.2;
    double ki = 0.3;
    double kid = 0.1;

    double gamma = 1.0;  ///< matrix diffusivity; exactly 1 under our scaling
    double d1 = 0.5;     ///< tissue diffusivity D1/D0
    double l0 = 1.0;
    double l1 = 2.0;

    double pm = InterfaceParams::kInfinite;
    double sigma = 1.0;

    Scales scales;

    /// alpha0 * phi0 + beta0: the net first-order loss rate of solid drug.
    double solid_loss_rate() const { return alpha0 * phi0 + beta0; }
    /// alpha0 + km + delta0: the rate at which free matrix drug feeds the solid phase.
    double free_to_solid_rate() const { return alpha0 + km + delta0; }
    /// kd + ki: total first-order loss rate of bound tissue drug.
    double bound_loss_rate() const { return kd + ki; }
    bool perfect_contact() const { return pm == InterfaceParams::kInfinite; }

    bool operator==(const DimensionlessParams&) const = default;
};

/// Accessible-void-to-solid volume ratio k*eps0/(1-eps0). Throws ValidationError
/// unless eps0 lies strictly inside (0,1) and k >= 0.
double phi0(double k, double eps0);

DimensionlessParams nondimensionalize(const MatrixParams& m, const TissueParams& t,
                                      const InterfaceParams& i);
inline DimensionlessParams nondimensionalize(const ModelParams& p) {
    return nondimensionalize(p.matrix, p.tissue, p.interface);
}

/// Inverse of nondimensionalize.
ModelParams redimensionalize(const DimensionlessParams& d);

/// The dimensionless reference scenario used for defaults and acceptance runs.
ModelParams reference_params();

struct Violation {
    std::string field;
    std::string message;
};

/// Every violated invariant; an empty report means the parameters are admissible.
class ValidationReport {
public:
    void add(std::string field, std::string message);
    void merge(const ValidationReport& other);

    bool ok() const { return violations_.empty(); }
    const std::vector<Violation>& violations() const { return violations_; }
    bool mentions(const std::string& field) const;
    std::string to_string() const;

private:
    std::vector<Violation> violations_;
};

ValidationReport validate(const MatrixParams& m);
/// Tissue invariants; l0 is needed for the geometry check l1 > l0.
ValidationReport validate(const TissueParams& t, double l0);
ValidationReport validate(const InterfaceParams& i);
ValidationReport validate(const ModelParams& p);
ValidationReport validate(const DimensionlessParams& d);

/// Throws ValidationError carrying the report text when the report is not empty.
void require_valid(const ValidationReport& report);

}  // namespace twolayer
