#include "twolayer/params.hpp"

#include <cmath>
#include <sstream>

#include "twolayer/error.hpp"

namespace twolayer {

double phi0(double k, double eps0) {
    if (!(eps0 > 0.0 && eps0 < 1.0)) {
        throw ValidationError("porosity eps0 must lie strictly inside (0,1), got " +
                              std::to_string(eps0));
    }
    if (!(k >= 0.0)) {
        throw ValidationError("partition coefficient k must be >= 0, got " + std::to_string(k));
    }
    return k * eps0 / (1.0 - eps0);
}

DimensionlessParams nondimensionalize(const MatrixParams& m, const TissueParams& t,
                                      const InterfaceParams& i) {
    ModelParams p{m, t, i};
    require_valid(validate(p));

    Scales s;
    s.length = m.l0;
    s.time = m.l0 * m.l0 / m.D0;
    s.concentration = m.M;

    DimensionlessParams d;
    d.scales = s;
    d.alpha0 = m.alpha0 * s.time;
    d.k = m.k;
    d.eps0 = m.eps0;
    d.phi0 = phi0(m.k, m.eps0);
    d.km = m.km * s.time;
    d.clim = m.Clim / s.concentration;
    d.beta0 = m.beta0 * s.time;
    d.delta0 = m.delta0 * s.time;

    d.ka = t.ka * s.time;
    d.kd = t.kd * s.time;
    d.ki = t.ki * s.time;
    d.kid = t.kid * s.time;

    d.gamma = 1.0;
    d.d1 = t.D1 / m.D0;
    d.l0 = 1.0;
    d.l1 = t.l1 / s.length;

    d.pm = i.perfect_contact() ? InterfaceParams::kInfinite : i.Pm * s.length / m.D0;
    d.sigma = i.sigma;
    return d;
}

ModelParams redimensionalize(const DimensionlessParams& d) {
    const Scales& s = d.scales;
    const double D0 = d.gamma * s.length * s.length / s.time;

    ModelParams p;
    MatrixParams& m = p.matrix;
    m.alpha0 = d.alpha0 / s.time;
    m.k = d.k;
    m.eps0 = d.eps0;
    m.km = d.km / s.time;
    m.Clim = d.clim * s.concentration;
    m.beta0 = d.beta0 / s.time;
    m.delta0 = d.delta0 / s.time;
    m.D0 = D0;
    m.l0 = d.l0 * s.length;
    m.M = s.concentration;

    TissueParams& t = p.tissue;
    t.ka = d.ka / s.time;
    t.kd = d.kd / s.time;
    t.ki = d.ki / s.time;
    t.kid = d.kid / s.time;
    t.D1 = d.d1 * D0;
    t.l1 = d.l1 * s.length;

    p.interface.Pm = d.perfect_contact() ? InterfaceParams::kInfinite : d.pm * D0 / s.length;
    p.interface.sigma = d.sigma;
    return p;
}

ModelParams reference_params() {
    // Default member initializers already hold the reference scenario with
    // D0 = l0 = M = 1, so dimensional and scaled values coincide.
    return ModelParams{};
}

void ValidationReport::add(std::string field, std::string message) {
    violations_.push_back({std::move(field), std::move(message)});
}

void ValidationReport::merge(const ValidationReport& other) {
    violations_.insert(violations_.end(), other.violations_.begin(), other.violations_.end());
}

bool ValidationReport::mentions(const std::string& field) const {
    for (const auto& v : violations_) {
        if (v.field == field) return true;
    }
    return false;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (std::size_t n = 0; n < violations_.size(); ++n) {
        if (n) os << "; ";
        os << violations_[n].field << ": " << violations_[n].message;
    }
    return os.str();
}

namespace {

void nonnegative(ValidationReport& r, const char* field, double v) {
    if (!std::isfinite(v) || v < 0.0) r.add(field, "must be finite and >= 0");
}

void positive(ValidationReport& r, const char* field, double v) {
    if (!std::isfinite(v) || v <= 0.0) r.add(field, "must be finite and > 0");
}

}  // namespace

ValidationReport validate(const MatrixParams& m) {
    ValidationReport r;
    nonnegative(r, "alpha0", m.alpha0);
    nonnegative(r, "km", m.km);
    nonnegative(r, "beta0", m.beta0);
    nonnegative(r, "delta0", m.delta0);
    nonnegative(r, "Clim", m.Clim);
    nonnegative(r, "k", m.k);
    positive(r, "D0", m.D0);
    positive(r, "l0", m.l0);
    positive(r, "M", m.M);
    if (!(m.eps0 > 0.0 && m.eps0 < 1.0)) {
        r.add("eps0", "porosity must lie strictly inside (0,1)");
    } else if (m.k >= 0.0 && !std::isfinite(m.k * m.eps0 / (1.0 - m.eps0))) {
        r.add("eps0", "derived phi0 is not finite");
    }
    return r;
}

ValidationReport validate(const TissueParams& t, double l0) {
    ValidationReport r;
    nonnegative(r, "ka", t.ka);
    nonnegative(r, "kd", t.kd);
    nonnegative(r, "ki", t.ki);
    nonnegative(r, "kid", t.kid);
    positive(r, "D1", t.D1);
    if (!std::isfinite(t.l1) || !(t.l1 > l0)) {
        r.add("l1", "geometry: outer tissue coordinate l1 must exceed the matrix thickness l0");
    }
    return r;
}

ValidationReport validate(const InterfaceParams& i) {
    ValidationReport r;
    if (!(i.Pm >= 0.0)) {
        r.add("Pm", "membrane permeability must be >= 0 or infinite");
    }
    positive(r, "sigma", i.sigma);
    return r;
}

ValidationReport validate(const ModelParams& p) {
    ValidationReport r = validate(p.matrix);
    r.merge(validate(p.tissue, p.matrix.l0));
    r.merge(validate(p.interface));
    return r;
}

ValidationReport validate(const DimensionlessParams& d) {
    ValidationReport r;
    for (auto [name, v] : {std::pair{"alpha0", d.alpha0}, {"phi0", d.phi0}, {"km", d.km},
                           {"clim", d.clim}, {"beta0", d.beta0}, {"delta0", d.delta0},
                           {"ka", d.ka}, {"kd", d.kd}, {"ki", d.ki}, {"kid", d.kid}}) {
        nonnegative(r, name, v);
    }
    positive(r, "gamma", d.gamma);
    positive(r, "d1", d.d1);
    positive(r, "l0", d.l0);
    if (!std::isfinite(d.l1) || !(d.l1 > d.l0)) r.add("l1", "geometry: l1 must exceed l0");
    if (!(d.pm >= 0.0)) r.add("pm", "membrane permeability must be >= 0 or infinite");
    positive(r, "sigma", d.sigma);
    return r;
}

void require_valid(const ValidationReport& report) {
    if (!report.ok()) throw ValidationError(report.to_string());
}

}  // namespace twolayer
