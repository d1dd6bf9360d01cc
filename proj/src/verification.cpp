#include "twolayer/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "twolayer/error.hpp"

namespace twolayer {

std::string to_string(OracleEquation e) {
    switch (e) {
        case OracleEquation::SolidMatrix: return "solid_matrix";
        case OracleEquation::BoundTissue: return "bound_tissue";
        case OracleEquation::Internalized: return "internalized";
    }
    return "unknown";
}

std::vector<double> uniform_times(double t_max, int n) {
    std::vector<double> t(static_cast<std::size_t>(std::max(n, 2)));
    const auto last = static_cast<double>(t.size() - 1);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = t_max * static_cast<double>(k) / last;
    return t;
}

namespace {

using Rhs = std::function<double(double, double)>;

double rk4(const Rhs& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Step-doubling control; local error per step held below 1e-13 of the solution scale.
struct AdaptiveRk4 {
    Rhs f;
    double h = 1e-3;
    long accepted = 0;
    long rejected = 0;

    double advance(double t, double y, double t_stop) {
        constexpr double kTol = 1e-13;
        while (t < t_stop) {
            const double step = std::min(h, t_stop - t);
            const double full = rk4(f, t, y, step);
            const double half = rk4(f, t + 0.5 * step, rk4(f, t, y, 0.5 * step), 0.5 * step);
            const double err = std::abs(half - full) / 15.0;
            const double tol = kTol * std::max(1.0, std::abs(half));
            if (err <= tol) {
                t = (step == t_stop - t) ? t_stop : t + step;
                y = half;
                ++accepted;
            } else {
                ++rejected;
            }
            const double factor = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
            const double next = step * std::clamp(factor, 0.1, 4.0);
            if (err > tol && next < 1e-12 * std::max(1.0, t)) {
                throw NumericalError("oracle integrator rejected step: error estimate " +
                                     std::to_string(err) + " exceeds tolerance at t=" + std::to_string(t));
            }
            // Do not let a short final step towards t_stop shrink the carried step size.
            if (!(err <= tol && step < h)) h = next;
        }
        return y;
    }
};

}  // namespace

double oracle_horizon(OracleEquation which, const DimensionlessParams& p, const AnalyticParams& ap) {
    std::vector<double> rates;
    if (which == OracleEquation::SolidMatrix) {
        const MatrixRates mr = matrix_rates(p, ap.a, ap.gamma);
        rates = {mr.m1, mr.m2, p.solid_loss_rate()};
    } else {
        const TissueRates tr = tissue_rates(p, ap.b);
        rates = {tr.n1, tr.n2, p.bound_loss_rate()};
        if (which == OracleEquation::Internalized) rates.push_back(p.kid);
    }
    double slowest = std::numeric_limits<double>::infinity();
    for (double r : rates) {
        if (r > 0.0) slowest = std::min(slowest, r);
    }
    if (!std::isfinite(slowest)) throw ValidationError("no positive decay rate; horizon undefined");
    return 10.0 / slowest;
}

OracleResult ode_oracle(OracleEquation which, const DimensionlessParams& p, const AnalyticParams& ap,
                        double x, std::span<const double> t_grid) {
    if (t_grid.empty() || t_grid.front() != 0.0) {
        throw ValidationError("oracle time grid must start at t = 0");
    }
    Rhs f;
    std::function<double(double)> closed;
    double y = 0.0;
    switch (which) {
        case OracleEquation::SolidMatrix:
            f = [&](double t, double c0s) {
                const double c0 = eval_matrix(x, t, p, ap).c0;
                return -p.alpha0 * (p.phi0 * c0s - c0) - p.km * (p.clim - c0) - p.beta0 * c0s +
                       p.delta0 * c0;
            };
            closed = [&](double t) { return eval_matrix(x, t, p, ap).c0_star; };
            y = 1.0;
            break;
        case OracleEquation::BoundTissue:
            f = [&](double t, double c1s) {
                const double c1 = eval_tissue(x, t, p, ap).c1;
                return p.ka * c1 - p.kd * c1s - p.ki * c1s;
            };
            closed = [&](double t) { return eval_tissue(x, t, p, ap).c1_star; };
            break;
        case OracleEquation::Internalized:
            f = [&](double t, double ci) {
                const double c1s = eval_tissue(x, t, p, ap).c1_star;
                return p.ki * c1s - p.kid * ci;
            };
            closed = [&](double t) { return eval_tissue(x, t, p, ap).ci; };
            break;
    }

    AdaptiveRk4 integrator{f};
    if (t_grid.size() > 1) integrator.h = (t_grid[1] - t_grid[0]) * 1e-2;

    OracleResult res;
    double t = 0.0;
    for (double tk : t_grid) {
        if (tk < t) throw ValidationError("oracle time grid must be nondecreasing");
        y = integrator.advance(t, y, tk);
        t = tk;
        const double ref = closed(tk);
        res.reference_scale = std::max(res.reference_scale, std::abs(ref));
        res.max_abs_deviation = std::max(res.max_abs_deviation, std::abs(y - ref));
    }
    res.max_relative_deviation = res.reference_scale > 0.0
                                     ? res.max_abs_deviation / res.reference_scale
                                     : res.max_abs_deviation;
    res.accepted_steps = integrator.accepted;
    res.rejected_steps = integrator.rejected;
    return res;
}

MassLedger mass_audit(const TimeSeries& ts) {
    MassLedger ledger;
    const CompositeGrid& g = ts.grid;
    const DimensionlessParams& p = ts.params;
    const bool sink = ts.config.outer_bc == OuterBoundary::Sink;
    if (ts.samples.empty()) return ledger;

    double sink_total = 0.0;
    double outflow_total = 0.0;
    double prev_t = ts.samples.front().t;
    double prev_sink_rate = p.kid * internalized_mass(g, ts.samples.front());
    double prev_out_rate = sink ? sink_outflow_rate(g, p, ts.samples.front()) : 0.0;

    for (std::size_t n = 0; n < ts.samples.size(); ++n) {
        const SimState& s = ts.samples[n];
        const double sink_rate = p.kid * internalized_mass(g, s);
        const double out_rate = sink ? sink_outflow_rate(g, p, s) : 0.0;
        if (n > 0) {
            const double dt = s.t - prev_t;
            sink_total += 0.5 * dt * (prev_sink_rate + sink_rate);
            outflow_total += 0.5 * dt * (prev_out_rate + out_rate);
        }
        prev_t = s.t;
        prev_sink_rate = sink_rate;
        prev_out_rate = out_rate;

        LedgerEntry e;
        e.t = s.t;
        e.matrix_mass = matrix_mass(g, s);
        e.tissue_mass = tissue_mass(g, s);
        e.sink = sink_total;
        e.outflow = outflow_total;
        if (n == 0) ledger.initial_total = e.matrix_mass + e.tissue_mass;
        e.defect = std::abs(e.matrix_mass + e.tissue_mass + e.sink + e.outflow - ledger.initial_total);
        e.relative_defect = ledger.initial_total != 0.0 ? e.defect / std::abs(ledger.initial_total) : e.defect;
        ledger.max_relative_defect = std::max(ledger.max_relative_defect, e.relative_defect);
        ledger.entries.push_back(e);
    }
    return ledger;
}

namespace {

std::array<const std::vector<double>*, 5> fields(const SimState& s) {
    return {&s.c0s, &s.c0, &s.c1s, &s.c1, &s.ci};
}

// Max difference per species between a coarse state and a fine state sampled at
// every `stride`-th node (stride 1 when only the time step differs).
std::array<double, 5> level_difference(const SimState& coarse, const SimState& fine, std::size_t stride) {
    std::array<double, 5> d{};
    const auto cf = fields(coarse);
    const auto ff = fields(fine);
    for (std::size_t s = 0; s < 5; ++s) {
        for (std::size_t i = 0; i < cf[s]->size(); ++i) {
            d[s] = std::max(d[s], std::abs((*cf[s])[i] - (*ff[s])[i * stride]));
        }
    }
    return d;
}

}  // namespace

ConvergenceReport convergence_study(const DimensionlessParams& p, const SolverConfig& config,
                                    int nx0, int nx1, int levels, RefinementKind kind) {
    if (levels < 3) throw ValidationError("convergence study needs at least 3 levels");
    ConvergenceReport rep;
    rep.kind = kind;

    std::vector<SimState> finals;
    for (int k = 0; k < levels; ++k) {
        const int scale = 1 << k;
        SolverConfig c = config;
        c.sample_every = std::numeric_limits<int>::max();
        int m0 = nx0, m1 = nx1;
        if (kind == RefinementKind::Space) {
            m0 *= scale;
            m1 *= scale;
        } else {
            c.dt = config.dt / scale;
        }
        const CompositeGrid grid(m0, m1, p.l0, p.l1);
        rep.steps.push_back(kind == RefinementKind::Space ? grid.h0() : c.dt);
        finals.push_back(simulate(p, grid, c).samples.back());
    }

    const std::size_t stride = kind == RefinementKind::Space ? 2 : 1;
    for (int k = 0; k + 1 < levels; ++k) {
        const auto d = level_difference(finals[static_cast<std::size_t>(k)],
                                        finals[static_cast<std::size_t>(k + 1)], stride);
        rep.species_differences.push_back(d);
        rep.differences.push_back(*std::max_element(d.begin(), d.end()));
    }
    for (std::size_t k = 0; k + 1 < rep.differences.size(); ++k) {
        std::array<double, 5> o{};
        for (std::size_t s = 0; s < 5; ++s) {
            const double a = rep.species_differences[k][s];
            const double b = rep.species_differences[k + 1][s];
            o[s] = (a > 0.0 && b > 0.0) ? std::log2(a / b) : std::numeric_limits<double>::quiet_NaN();
        }
        rep.species_orders.push_back(o);
        const double a = rep.differences[k];
        const double b = rep.differences[k + 1];
        rep.orders.push_back((a > 0.0 && b > 0.0) ? std::log2(a / b) : std::numeric_limits<double>::quiet_NaN());
        if (!(b < a)) {
            rep.warnings.push_back("non-monotone difference sequence at level " + std::to_string(k + 1) +
                                   "; asymptotic regime not reached");
        }
    }
    return rep;
}

ComparisonReport compare_analytic_numeric(const DimensionlessParams& p, const AnalyticParams& ap,
                                          const CompositeGrid& grid, const SolverConfig& config,
                                          double t_start, double duration) {
    if (!(t_start >= 0.0) || !(duration > 0.0)) {
        throw ValidationError("comparison needs t_start >= 0 and duration > 0");
    }
    ComparisonReport rep;
    rep.t_start = t_start;
    rep.t_stop = t_start + duration;

    auto analytic_state = [&](double t) {
        SimState s;
        s.t = t;
        for (std::size_t i = 0; i < grid.matrix_nodes(); ++i) {
            const MatrixFields m = eval_matrix(grid.matrix_x(i), t, p, ap);
            s.c0s.push_back(m.c0_star);
            s.c0.push_back(m.c0);
        }
        for (std::size_t j = 0; j < grid.tissue_nodes(); ++j) {
            const TissueFields f = eval_tissue(grid.tissue_x(j), t, p, ap);
            s.c1s.push_back(f.c1_star);
            s.c1.push_back(f.c1);
            s.ci.push_back(f.ci);
        }
        return s;
    };

    const SimState start = analytic_state(rep.t_start);
    const SimState target = analytic_state(rep.t_stop);

    auto relative = [](const std::vector<double>& num, const std::vector<double>& ref) {
        double scale = 0.0, dev = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            scale = std::max(scale, std::abs(ref[i]));
            dev = std::max(dev, std::abs(num[i] - ref[i]));
        }
        return scale > 0.0 ? dev / scale : dev;
    };

    SolverConfig c = config;
    c.t_end = rep.t_stop;
    const TimeSeries ts = simulate_from(start, p, grid, c);
    const SimState& end = ts.samples.back();
    const auto ef = fields(end);
    const auto tf = fields(target);
    for (std::size_t s = 0; s < 5; ++s) rep.pde_deviation[s] = relative(*ef[s], *tf[s]);

    // Local ODE species with closed-form drivers, same theta-scheme and step as the solver.
    const auto steps = std::max<long long>(1, std::llround(duration / config.dt));
    const double dt = duration / static_cast<double>(steps);
    const double th = config.theta;
    const double r = p.solid_loss_rate();
    const double K = p.free_to_solid_rate();
    const double kc = p.km * p.clim;
    const double s_rate = p.bound_loss_rate();

    std::vector<double> c0s(start.c0s), c1s(start.c1s), ci(start.ci);
    for (long long n = 0; n < steps; ++n) {
        const double ta = rep.t_start + static_cast<double>(n) * dt;
        const double tb = rep.t_start + static_cast<double>(n + 1) * dt;
        for (std::size_t i = 0; i < c0s.size(); ++i) {
            const double x = grid.matrix_x(i);
            const double fa = K * eval_matrix(x, ta, p, ap).c0 - kc;
            const double fb = K * eval_matrix(x, tb, p, ap).c0 - kc;
            c0s[i] = (c0s[i] * (1.0 - (1.0 - th) * dt * r) + dt * (th * fb + (1.0 - th) * fa)) /
                     (1.0 + th * dt * r);
        }
        for (std::size_t j = 0; j < c1s.size(); ++j) {
            const double x = grid.tissue_x(j);
            const double fa = p.ka * eval_tissue(x, ta, p, ap).c1;
            const double fb = p.ka * eval_tissue(x, tb, p, ap).c1;
            const double bound_old = c1s[j];
            c1s[j] = (bound_old * (1.0 - (1.0 - th) * dt * s_rate) + dt * (th * fb + (1.0 - th) * fa)) /
                     (1.0 + th * dt * s_rate);
            ci[j] = (ci[j] * (1.0 - (1.0 - th) * dt * p.kid) +
                     dt * p.ki * (th * c1s[j] + (1.0 - th) * bound_old)) /
                    (1.0 + th * dt * p.kid);
        }
    }
    rep.driven_deviation[0] = relative(c0s, target.c0s);
    rep.driven_deviation[2] = relative(c1s, target.c1s);
    rep.driven_deviation[4] = relative(ci, target.ci);

    for (const SimState& s : ts.samples) {
        rep.flux.push_back(interface_flux_mismatch(s.t, p, ap));
        rep.max_flux_mismatch = std::max(rep.max_flux_mismatch, rep.flux.back().mismatch);
    }
    return rep;
}

DimensionlessParams random_admissible(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * u(rng));
    };
    auto rate = [&] { return log_uniform(1e-2, 1e1); };

    DimensionlessParams d;
    d.alpha0 = rate();
    d.eps0 = 0.1 + 0.8 * u(rng);
    d.k = rate();
    d.phi0 = d.k * d.eps0 / (1.0 - d.eps0);
    d.km = rate();
    d.clim = rate();
    d.beta0 = rate();
    d.delta0 = rate();
    d.ka = rate();
    d.kd = rate();
    d.ki = rate();
    d.kid = rate();
    d.gamma = 1.0;
    d.d1 = log_uniform(0.1, 10.0);
    d.l0 = 1.0;
    d.l1 = 1.5 + 1.5 * u(rng);
    d.pm = InterfaceParams::kInfinite;
    d.sigma = 1.0;
    return d;
}

}  // namespace twolayer
