#include "twolayer/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "twolayer/error.hpp"

namespace twolayer {

namespace {

constexpr double kResonanceTol = 1e-9;
constexpr double kDomainSlack = 1e-12;

// Roots of z^2 - S z + Pr = 0 (sum S, product Pr), ordered, without the
// cancellation of the textbook formula in the smaller root.
std::pair<double, double> ordered_roots(double S, double Pr, double disc) {
    const double sq = std::sqrt(disc);
    const double big = S >= 0.0 ? 0.5 * (S + sq) : 0.5 * (S - sq);
    const double other = big != 0.0 ? Pr / big : 0.0;
    return std::minmax(big, other);
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw ValidationError("analytic evaluation requires finite t >= 0");
    }
}

}  // namespace

AnalyticParams make_analytic_params(double a, double b, double E1, double E2, double gamma) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw ValidationError("spatial frequencies a and b must be >= 0");
    }
    if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
    AnalyticParams ap;
    ap.a = a;
    ap.b = b;
    ap.E1 = E1;
    ap.E2 = E2;
    ap.lambda = -a * a;
    ap.mu = -b * b;
    ap.gamma = gamma;
    return ap;
}

AnalyticParams default_analytic_params(const DimensionlessParams& p) {
    const double pi = std::numbers::pi;
    return make_analytic_params(pi / (2.0 * p.l0), pi / (2.0 * (p.l1 - p.l0)), 1.0, 1.0, p.gamma);
}

MatrixRates matrix_rates(const DimensionlessParams& p, double a, double gamma) {
    if (!(a >= 0.0)) throw ValidationError("matrix frequency a must be >= 0");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be > 0");
    const double lambda = -a * a;
    MatrixRates r;
    r.A = p.alpha0 * (p.phi0 + 1.0) + p.km + p.beta0 + p.delta0 - lambda * gamma;
    r.B = lambda * gamma * (p.alpha0 * p.phi0 + p.beta0);
    const double disc = r.A * r.A + 4.0 * r.B;
    if (disc < 0.0) {
        throw NumericalError("matrix rate discriminant A^2+4B is negative (" + std::to_string(disc) +
                             "); rate constants must be nonnegative");
    }
    // m1 + m2 = A, m1 m2 = -B
    std::tie(r.m1, r.m2) = ordered_roots(r.A, -r.B, disc);
    return r;
}

TissueRates tissue_rates(const DimensionlessParams& p, double b) {
    if (!(b >= 0.0)) throw ValidationError("tissue frequency b must be >= 0");
    const double mu = -b * b;
    TissueRates r;
    r.P = p.kd + p.ki + p.ka - mu;
    r.Q = p.ki * p.ka - mu * (p.kd + p.ki);
    const double disc = r.P * r.P - 4.0 * r.Q;
    if (disc < 0.0) {
        throw NumericalError("tissue rate discriminant P^2-4Q is negative (" + std::to_string(disc) +
                             "); rate constants must be nonnegative");
    }
    std::tie(r.n1, r.n2) = ordered_roots(r.P, r.Q, disc);
    return r;
}

bool resonant(double p, double q) {
    return std::abs(p - q) <= kResonanceTol * std::max(std::abs(p), std::abs(q));
}

ConvolutionValue exp_convolution(std::span<const double> rates, double t) {
    const auto n = static_cast<Eigen::Index>(rates.size());
    if (n < 1 || n > 4) throw ValidationError("exp_convolution supports 1 to 4 rates");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        L(k, k) = -rates[static_cast<std::size_t>(k)];
        if (k > 0) L(k, k - 1) = 1.0;
    }
    const Eigen::MatrixXd E = (t * L).exp();
    ConvolutionValue out;
    out.value = E(n - 1, 0);
    out.derivative = L(n - 1, n - 1) * E(n - 1, 0) + (n > 1 ? E(n - 2, 0) : 0.0);
    return out;
}

MatrixJet eval_matrix_jet(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap) {
    if (!(x >= -kDomainSlack && x <= p.l0 + kDomainSlack)) {
        throw ValidationError("matrix evaluation point outside [0, l0]");
    }
    check_time(t);
    const MatrixRates mr = matrix_rates(p, ap.a, ap.gamma);
    const double m1 = mr.m1, m2 = mr.m2;
    const double r = p.solid_loss_rate();
    const double K = p.free_to_solid_rate();
    const double cx = std::cos(ap.a * x);
    const double sx = std::sin(ap.a * x);

    const double e1 = std::exp(-m1 * t);
    const double e2 = std::exp(-m2 * t);
    const double er = std::exp(-r * t);

    MatrixJet j;
    const double g = e1 - e2;
    const double g_t = -m1 * e1 + m2 * e2;
    j.value.c0 = ap.E1 * g * cx;
    j.c0_t = ap.E1 * g_t * cx;
    j.c0_x = -ap.a * ap.E1 * g * sx;
    j.c0_xx = -ap.a * ap.a * j.value.c0;

    double h = 0.0, h_t = 0.0;
    if (!resonant(m1, r) && !resonant(m2, r)) {
        const double den = (m1 - r) * (m2 - r);
        const double br = (m1 - r) * e2 - (m2 - r) * e1 + (m2 - m1) * er;
        const double br_t = -m2 * (m1 - r) * e2 + m1 * (m2 - r) * e1 - r * (m2 - m1) * er;
        h = br / den;
        h_t = br_t / den;
    } else {
        const double rates[] = {m1, m2, r};
        const ConvolutionValue cv = exp_convolution(rates, t);
        h = (m2 - m1) * cv.value;
        h_t = (m2 - m1) * cv.derivative;
        j.value.limiting_form = true;
    }

    const double kc = p.km * p.clim;
    double f = 0.0, f_t = 0.0;
    if (r != 0.0) {
        f = -kc / r * (1.0 - er) + er;
        f_t = -kc * er - r * er;
    } else {
        f = 1.0 - kc * t;
        f_t = -kc;
        j.value.limiting_form = true;
    }

    j.value.c0_star = ap.E1 * K * cx * h + f;
    j.c0_star_t = ap.E1 * K * cx * h_t + f_t;
    return j;
}

TissueJet eval_tissue_jet(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap) {
    if (!(x >= p.l0 - kDomainSlack && x <= p.l1 + kDomainSlack)) {
        throw ValidationError("tissue evaluation point outside [l0, l1]");
    }
    check_time(t);
    const TissueRates tr = tissue_rates(p, ap.b);
    const double n1 = tr.n1, n2 = tr.n2;
    const double s = p.bound_loss_rate();
    const double kid = p.kid;
    const double cx = std::cos(ap.b * x);
    const double sx = std::sin(ap.b * x);

    const double e1 = std::exp(-n1 * t);
    const double e2 = std::exp(-n2 * t);
    const double es = std::exp(-s * t);
    const double ek = std::exp(-kid * t);

    TissueJet j;
    const double g = e1 - e2;
    const double g_t = -n1 * e1 + n2 * e2;
    j.value.c1 = ap.E2 * g * cx;
    j.c1_t = ap.E2 * g_t * cx;
    j.c1_x = -ap.b * ap.E2 * g * sx;
    j.c1_xx = -ap.b * ap.b * j.value.c1;

    const bool bound_resonant = resonant(s, n1) || resonant(s, n2);
    const bool internal_resonant =
        bound_resonant || resonant(kid, n1) || resonant(kid, n2) || resonant(kid, s);

    double h = 0.0, h_t = 0.0;
    if (!bound_resonant) {
        const double den = (s - n1) * (s - n2);
        const double br = (s - n2) * e1 - (s - n1) * e2 + (n2 - n1) * es;
        const double br_t = -n1 * (s - n2) * e1 + n2 * (s - n1) * e2 - s * (n2 - n1) * es;
        h = br / den;
        h_t = br_t / den;
    } else {
        const double rates[] = {n1, n2, s};
        const ConvolutionValue cv = exp_convolution(rates, t);
        h = (n2 - n1) * cv.value;
        h_t = (n2 - n1) * cv.derivative;
    }
    j.value.c1_star = ap.E2 * p.ka * cx * h;
    j.c1_star_t = ap.E2 * p.ka * cx * h_t;

    double q = 0.0, q_t = 0.0;
    if (!internal_resonant) {
        const double den = (s - n1) * (s - n2);
        const double w1 = (s - n2) / (kid - n1);
        const double w2 = (s - n1) / (kid - n2);
        const double w3 = (n2 - n1) / (kid - s);
        const double bi = w1 * (e1 - ek) - w2 * (e2 - ek) + w3 * (es - ek);
        const double bi_t = w1 * (-n1 * e1 + kid * ek) - w2 * (-n2 * e2 + kid * ek) +
                            w3 * (-s * es + kid * ek);
        q = bi / den;
        q_t = bi_t / den;
    } else {
        const double rates[] = {n1, n2, s, kid};
        const ConvolutionValue cv = exp_convolution(rates, t);
        q = (n2 - n1) * cv.value;
        q_t = (n2 - n1) * cv.derivative;
    }
    j.value.ci = ap.E2 * p.ka * p.ki * cx * q;
    j.ci_t = ap.E2 * p.ka * p.ki * cx * q_t;
    j.value.limiting_form = internal_resonant;
    return j;
}

MatrixFields eval_matrix(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap) {
    return eval_matrix_jet(x, t, p, ap).value;
}

TissueFields eval_tissue(double x, double t, const DimensionlessParams& p, const AnalyticParams& ap) {
    return eval_tissue_jet(x, t, p, ap).value;
}

const char* ResidualReport::equation_name(int n) {
    static const char* names[] = {"solid_matrix", "free_matrix", "bound_tissue", "free_tissue",
                                  "internalized"};
    return names[n];
}

ResidualReport residual(const DimensionlessParams& p, const AnalyticParams& ap,
                        std::span<const SamplePoint> matrix_points,
                        std::span<const SamplePoint> tissue_points) {
    ResidualReport rep;
    auto track = [&rep](int eq, double v) { rep.max_abs[eq] = std::max(rep.max_abs[eq], std::abs(v)); };

    for (const SamplePoint& sp : matrix_points) {
        const MatrixJet j = eval_matrix_jet(sp.x, sp.t, p, ap);
        const double cs = j.value.c0_star;
        const double c = j.value.c0;
        const double exchange = p.alpha0 * (p.phi0 * cs - c) + p.km * (p.clim - c) + p.beta0 * cs -
                                p.delta0 * c;
        track(0, j.c0_star_t - (-exchange));
        track(1, j.c0_t - (ap.gamma * j.c0_xx + exchange));
    }
    for (const SamplePoint& sp : tissue_points) {
        const TissueJet j = eval_tissue_jet(sp.x, sp.t, p, ap);
        const double c1 = j.value.c1;
        const double cb = j.value.c1_star;
        const double ci = j.value.ci;
        track(2, j.c1_star_t - (p.ka * c1 - p.kd * cb - p.ki * cb));
        track(3, j.c1_t - (p.d1 * j.c1_xx - p.ka * c1 + p.kd * cb));
        track(4, j.ci_t - (p.ki * cb - p.kid * ci));
    }
    return rep;
}

namespace {

std::vector<SamplePoint> sample_grid(double x_lo, double x_hi, int nx, int nt, double t_max) {
    std::vector<SamplePoint> pts;
    pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nt));
    for (int i = 0; i < nx; ++i) {
        const double x = x_lo + (x_hi - x_lo) * (i + 1) / (nx + 1);
        for (int k = 0; k < nt; ++k) {
            const double t = nt > 1 ? t_max * k / (nt - 1) : 0.0;
            pts.push_back({x, t});
        }
    }
    return pts;
}

}  // namespace

std::vector<SamplePoint> matrix_sample_grid(const DimensionlessParams& p, int nx, int nt, double t_max) {
    return sample_grid(0.0, p.l0, nx, nt, t_max);
}

std::vector<SamplePoint> tissue_sample_grid(const DimensionlessParams& p, int nx, int nt, double t_max) {
    return sample_grid(p.l0, p.l1, nx, nt, t_max);
}

FluxMismatch interface_flux_mismatch(double t, const DimensionlessParams& p, const AnalyticParams& ap) {
    const MatrixJet mj = eval_matrix_jet(p.l0, t, p, ap);
    const TissueJet tj = eval_tissue_jet(p.l0, t, p, ap);
    FluxMismatch f;
    f.t = t;
    f.matrix_flux = -ap.gamma * mj.c0_x;
    f.tissue_flux = -p.d1 * tj.c1_x;
    f.mismatch = std::abs(f.matrix_flux - f.tissue_flux);
    return f;
}

}  // namespace twolayer
