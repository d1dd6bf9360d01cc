#include "twolayer/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include "twolayer/error.hpp"

namespace fs = std::filesystem;

namespace twolayer::acceptance {

namespace {

constexpr std::uint64_t kSeed = 20240611;

using Clock = std::chrono::steady_clock;

// Runs body, which fills measured/detail and returns whether the tolerance was met.
// The budget is part of the verdict.
CheckResult timed(std::string id, std::string name, double threshold, double budget_seconds,
                  const std::function<bool(CheckResult&)>& body) {
    CheckResult r;
    r.id = std::move(id);
    r.name = std::move(name);
    r.threshold = threshold;
    const auto start = Clock::now();
    bool ok = false;
    try {
        ok = body(r);
    } catch (const std::exception& e) {
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("error: ") + e.what();
        ok = false;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.passed = ok && r.seconds < budget_seconds;
    if (ok && !r.passed) {
        std::ostringstream os;
        os << "; runtime " << r.seconds << " s exceeds budget " << budget_seconds << " s";
        r.detail += os.str();
    }
    return r;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("twolayer-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// |a - b| relative to `scale`, or absolute when scale is zero.
double rel(double a, double b, double scale) { return scale > 0.0 ? std::abs(a - b) / scale : std::abs(a - b); }

}  // namespace

CheckResult initial_conditions() {
    return timed("1", "initial-condition exactness", 1e-12, 1.0, [](CheckResult& r) {
        std::mt19937_64 rng(kSeed);
        std::uniform_real_distribution<double> mode(0.1, 5.0), amp(-3.0, 3.0);
        double worst = 0.0;
        for (int draw = 0; draw < 50; ++draw) {
            const DimensionlessParams p = random_admissible(rng);
            const AnalyticParams ap = make_analytic_params(mode(rng), mode(rng), amp(rng), amp(rng), p.gamma);
            for (int k = 0; k <= 10; ++k) {
                const double xm = p.l0 * k / 10.0;
                const double xt = p.l0 + (p.l1 - p.l0) * k / 10.0;
                const MatrixFields m = eval_matrix(xm, 0.0, p, ap);
                const TissueFields t = eval_tissue(xt, 0.0, p, ap);
                worst = std::max({worst, std::abs(m.c0_star - 1.0), std::abs(m.c0), std::abs(t.c1_star),
                                  std::abs(t.c1), std::abs(t.ci)});
            }
        }
        r.measured = worst;
        r.detail = "50 draws, 11 points per layer, max deviation " + fmt(worst);
        return worst <= 1e-12;
    });
}

CheckResult rate_identities() {
    return timed("2", "rate-constant identities", 1e-12, 1.0, [](CheckResult& r) {
        std::mt19937_64 rng(kSeed + 1);
        std::uniform_real_distribution<double> mode(0.1, 5.0);
        double worst = 0.0;
        int failures = 0;
        for (int draw = 0; draw < 1000; ++draw) {
            const DimensionlessParams p = random_admissible(rng);
            const AnalyticParams ap = make_analytic_params(mode(rng), mode(rng), 1.0, 1.0, p.gamma);
            try {
                const MatrixRates m = matrix_rates(p, ap.a, ap.gamma);
                const TissueRates t = tissue_rates(p, ap.b);
                worst = std::max({worst, rel(m.m1 + m.m2, m.A, std::abs(m.A)),
                                  rel(m.m1 * m.m2, -m.B, std::max(std::abs(m.B), 1.0)),
                                  rel(t.n1 + t.n2, t.P, std::abs(t.P)),
                                  rel(t.n1 * t.n2, t.Q, std::max(std::abs(t.Q), 1.0))});
                if (m.A * m.A + 4.0 * m.B < 0.0 || t.P * t.P - 4.0 * t.Q < 0.0) ++failures;
            } catch (const NumericalError&) {
                ++failures;
            }
        }
        r.measured = worst;
        r.detail = "1000 draws, max relative identity error " + fmt(worst) + ", negative discriminants " +
                   std::to_string(failures);
        return worst <= 1e-12 && failures == 0;
    });
}

CheckResult ode_oracles(const RunSpec& spec) {
    return timed("3", "ODE oracle equivalence", 1e-6, 10.0, [&spec](CheckResult& r) {
        std::vector<DimensionlessParams> cases{nondimensionalize(spec.params)};
        std::mt19937_64 rng(kSeed + 2);
        for (int n = 0; n < 20; ++n) cases.push_back(random_admissible(rng));
        double worst = 0.0;
        long steps = 0;
        for (std::size_t c = 0; c < cases.size(); ++c) {
            const DimensionlessParams& p = cases[c];
            const AnalyticParams ap = c == 0 ? resolve_analytic(spec.analytic, p) : default_analytic_params(p);
            const double xm = 0.25 * p.l0;
            const double xt = p.l0 + 0.25 * (p.l1 - p.l0);
            for (OracleEquation eq : {OracleEquation::SolidMatrix, OracleEquation::BoundTissue,
                                      OracleEquation::Internalized}) {
                const std::vector<double> times = uniform_times(oracle_horizon(eq, p, ap), 200);
                const OracleResult o = ode_oracle(eq, p, ap, eq == OracleEquation::SolidMatrix ? xm : xt, times);
                worst = std::max(worst, o.max_relative_deviation);
                steps += o.accepted_steps;
            }
        }
        r.measured = worst;
        r.detail = "reference + 20 draws, 3 equations, " + std::to_string(steps) +
                   " accepted RK4 steps, max relative deviation " + fmt(worst);
        return worst <= 1e-6;
    });
}

CheckResult conservation(const RunSpec& spec) {
    return timed("4", "conservation", 1e-4, 30.0, [&spec](CheckResult& r) {
        bool ok = true;
        std::ostringstream detail;

        RunSpec closed = spec;
        closed.params.tissue.kid = 0.0;
        closed.solver.outer_bc = OuterBoundary::ZeroFlux;
        {
            const DimensionlessParams d = nondimensionalize(closed.params);
            const TimeSeries ts = simulate(d, make_grid(closed.grid, d), scaled_config(closed.solver, d.scales));
            const double m0 = matrix_mass(ts.grid, ts.samples.front()) + tissue_mass(ts.grid, ts.samples.front());
            double drift = 0.0;
            for (const SimState& s : ts.samples)
                drift = std::max(drift, std::abs(matrix_mass(ts.grid, s) + tissue_mass(ts.grid, s) - m0) / m0);
            r.measured = drift;
            ok = ok && drift <= 1e-4;
            detail << "kid=0 zero-flux drift " << fmt(drift) << " (<= 1e-4)";
        }

        RunSpec open = spec;
        if (!(open.params.tissue.kid > 0.0)) open.params.tissue.kid = reference_params().tissue.kid;
        for (OuterBoundary bc : {OuterBoundary::ZeroFlux, OuterBoundary::Sink}) {
            open.solver.outer_bc = bc;
            const DimensionlessParams d = nondimensionalize(open.params);
            const CompositeGrid grid = make_grid(open.grid, d);
            SolverConfig c = scaled_config(open.solver, d.scales);
            const double coarse = mass_audit(simulate(d, grid, c)).max_relative_defect;
            c.dt /= 2.0;
            const double fine = mass_audit(simulate(d, grid, c)).max_relative_defect;
            const bool bc_ok = coarse <= 1e-3 && fine <= std::max(0.5 * coarse, 1e-12);
            ok = ok && bc_ok;
            detail << "; kid>0 " << to_string(bc) << " defect " << fmt(coarse) << " -> " << fmt(fine)
                   << " under dt halving";
        }
        r.detail = detail.str();
        return ok;
    });
}

CheckResult convergence(const RunSpec& spec) {
    return timed("5", "convergence order", 1.9, 120.0, [&spec](CheckResult& r) {
        const DimensionlessParams d = nondimensionalize(spec.params);
        SolverConfig c = spec.solver;
        c.theta = 0.5;
        c.t_end = 5.0;
        c.dt = 1e-3;
        c.sample_every = 1000000;
        const double space = convergence_study(d, c, 10, 10, 4, RefinementKind::Space).finest_order();
        c.dt = 0.1;
        const double time_cn = convergence_study(d, c, 40, 40, 4, RefinementKind::Time).finest_order();
        c.theta = 1.0;
        const double time_be = convergence_study(d, c, 40, 40, 4, RefinementKind::Time).finest_order();
        r.measured = std::min(space, time_cn);
        r.detail = "space order " + fmt(space) + " (>= 1.9), time order theta=0.5 " + fmt(time_cn) +
                   " (>= 1.9), theta=1 " + fmt(time_be) + " (>= 0.9)";
        return space >= 1.9 && time_cn >= 1.9 && time_be >= 0.9;
    });
}

CheckResult qualitative(const RunSpec& spec) {
    return timed("6", "qualitative release behaviour", 0.0, 30.0, [&spec](CheckResult& r) {
        const DimensionlessParams d = nondimensionalize(spec.params);
        const CompositeGrid grid = make_grid(spec.grid, d);
        const TimeSeries ts = simulate(d, grid, scaled_config(spec.solver, d.scales));

        std::vector<double> mx, tx;
        for (double x : spec.probes.matrix) mx.push_back(x / d.scales.length);
        for (double x : spec.probes.tissue) tx.push_back(x / d.scales.length);
        std::sort(mx.begin(), mx.end());
        std::sort(tx.begin(), tx.end());
        if (mx.size() < 2 || tx.empty())
            throw ValidationError("qualitative check needs two matrix probes and one tissue probe");
        const ReleaseMetrics m = release_metrics(ts, mx, tx);

        std::vector<std::string> failed;
        int violations = 0;
        auto fail = [&](const std::string& what) {
            ++violations;
            if (failed.size() < 6) failed.push_back(what);
        };

        for (double x : mx) {
            if (!is_nonincreasing(probe_series(ts, Species::C0Star, x))) fail("(a) C0_star rises at x=" + fmt(x));
            if (!is_unimodal(probe_series(ts, Species::C0, x))) fail("(c) C0 not unimodal at x=" + fmt(x));
        }
        const double t_ext0 = m.at(Species::C0Star, mx.front()).t_extinction;
        for (std::size_t i = 1; i < mx.size(); ++i) {
            if (!(m.at(Species::C0Star, mx[i]).t_extinction < t_ext0))
                fail("(b) C0_star extinction at x=" + fmt(mx[i]) + " not earlier than at x=" + fmt(mx.front()));
        }
        for (double x : tx) {
            if (!is_unimodal(probe_series(ts, Species::C1, x))) fail("(c) C1 not unimodal at x=" + fmt(x));
            const double p1 = m.at(Species::C1, x).t_peak;
            const double p1s = m.at(Species::C1Star, x).t_peak;
            const double pi = m.at(Species::Ci, x).t_peak;
            if (!(p1 < p1s && p1s < pi)) fail("(d) peak order C1 < C1_star < Ci broken at x=" + fmt(x));
        }

        double matrix_latest = 0.0;
        for (const ProbeMetrics& p : m.probes)
            if (in_matrix(p.species)) matrix_latest = std::max(matrix_latest, p.t_extinction);
        for (Species s : {Species::C1Star, Species::C1, Species::Ci}) {
            double latest = 0.0;
            for (double x : tx) latest = std::max(latest, m.at(s, x).t_extinction);
            if (!(latest > matrix_latest) || !std::isfinite(matrix_latest))
                fail("(d) " + to_string(s) + " extinction " + fmt(latest) + " not after matrix " + fmt(matrix_latest));
        }

        r.measured = violations;
        std::string detail = "C0_star extinction at probes:";
        for (double x : mx) detail += " " + fmt(m.at(Species::C0Star, x).t_extinction);
        const double xl = tx.back();
        detail += "; peaks at x=" + fmt(xl) + ": C1 " + fmt(m.at(Species::C1, xl).t_peak) + ", C1_star " +
                  fmt(m.at(Species::C1Star, xl).t_peak) + ", Ci " + fmt(m.at(Species::Ci, xl).t_peak);
        for (const std::string& f : failed) detail += "; " + f;
        r.detail = detail;
        return violations == 0;
    });
}

CheckResult linearity(const RunSpec& spec) {
    return timed("7", "linearity in the loading", 1e-10, 10.0, [&spec](CheckResult& r) {
        double worst = 0.0;
        auto compare = [&worst](const TimeSeries& a, const TimeSeries& b, double factor) {
            double scale = 0.0, diff = 0.0;
            for (std::size_t n = 0; n < a.samples.size(); ++n) {
                const SimState& x = a.samples[n];
                const SimState& y = b.samples[n];
                for (const auto& [u, v] : {std::pair{&x.c0s, &y.c0s}, {&x.c0, &y.c0}, {&x.c1s, &y.c1s},
                                           {&x.c1, &y.c1}, {&x.ci, &y.ci}}) {
                    for (std::size_t i = 0; i < u->size(); ++i) {
                        scale = std::max(scale, std::abs(factor * (*u)[i]));
                        diff = std::max(diff, std::abs(factor * (*u)[i] - (*v)[i]));
                    }
                }
            }
            worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
        };

        RunSpec base = spec;
        base.solver.t_end = std::min(base.solver.t_end, 20.0);

        // Doubling M together with Clim leaves the scaled problem unchanged.
        {
            RunSpec twice = base;
            twice.params.matrix.M *= 2.0;
            twice.params.matrix.Clim *= 2.0;
            const DimensionlessParams d1 = nondimensionalize(base.params);
            const DimensionlessParams d2 = nondimensionalize(twice.params);
            TimeSeries a = simulate(d1, make_grid(base.grid, d1), scaled_config(base.solver, d1.scales));
            TimeSeries b = simulate(d2, make_grid(twice.grid, d2), scaled_config(twice.solver, d2.scales));
            for (TimeSeries* ts : {&a, &b}) {
                const double M = ts->params.scales.concentration;
                for (SimState& s : ts->samples)
                    for (auto* v : {&s.c0s, &s.c0, &s.c1s, &s.c1, &s.ci})
                        for (double& c : *v) c *= M;
            }
            compare(a, b, 2.0);
        }
        // Solver superposition: twice the loading with twice the solubility forcing.
        DimensionlessParams d = nondimensionalize(base.params);
        const CompositeGrid grid = make_grid(base.grid, d);
        const SolverConfig c = scaled_config(base.solver, d.scales);
        {
            DimensionlessParams d2 = d;
            d2.clim *= 2.0;
            compare(simulate(d, grid, c, 1.0), simulate(d2, grid, c, 2.0), 2.0);
        }
        // Without the solubility term the system is homogeneous in the loading alone.
        {
            d.km = 0.0;
            compare(simulate(d, grid, c, 1.0), simulate(d, grid, c, 2.0), 2.0);
        }
        r.measured = worst;
        r.detail = "max relative deviation from exact doubling " + fmt(worst) + " over M, loading and km=0 runs";
        return worst <= 1e-10;
    });
}

CheckResult determinism(const RunSpec& spec) {
    return timed("8", "determinism", 0.0, 10.0, [&spec](CheckResult& r) {
        TempDir tmp("determinism");
        const fs::path a = tmp.path() / "a";
        const fs::path b = tmp.path() / "b";
        run_simulate(spec, a);
        run_simulate(load_config(a / "run.json"), b);
        int differing = 0;
        std::string detail;
        for (const char* name : {"matrix.csv", "tissue.csv", "metrics.json", "ledger.json"}) {
            if (slurp(a / name) != slurp(b / name)) {
                ++differing;
                detail += std::string(" ") + name;
            }
        }
        if (manifest_without_wall_time(a / "run.json") != manifest_without_wall_time(b / "run.json")) {
            ++differing;
            detail += " run.json";
        }
        r.measured = differing;
        r.detail = differing == 0 ? "second run from run.json reproduced all outputs byte for byte (run.json compared "
                                    "without wall-clock fields)"
                                  : "differing files:" + detail;
        return differing == 0;
    });
}

CheckResult honest_reporting(const RunSpec& spec) {
    return timed("9", "honest reporting of analytic defects", 1e-10, 5.0, [&spec](CheckResult& r) {
        TempDir tmp("analytic");
        RunSpec s = spec;
        s.solver.t_end = std::min(s.solver.t_end, 20.0);
        run_analytic(s, tmp.path());
        const Json rep = Json::parse(slurp(tmp.path() / "analytic_report.json"));
        const double mismatch = rep.at("max_interface_flux_mismatch").get<double>();
        const double eq2 = rep.at("max_abs_residual").at(ResidualReport::equation_name(1)).get<double>();
        const bool csv_present = fs::exists(tmp.path() / "flux_mismatch.csv");
        const bool forced = s.params.matrix.km * s.params.matrix.Clim > 0.0;
        r.measured = std::min(mismatch, eq2);
        r.detail = "reported flux mismatch " + fmt(mismatch) + ", free-matrix residual " + fmt(eq2);
        if (!forced) r.detail += " (km*Clim = 0, residual not required)";
        return csv_present && mismatch > 1e-10 && (!forced || eq2 > 1e-10);
    });
}

CheckResult ode_residuals(const RunSpec& spec) {
    return timed("R", "closed-form residuals of the local equations", 1e-10, 5.0, [&spec](CheckResult& r) {
        const DimensionlessParams d = nondimensionalize(spec.params);
        const AnalyticParams ap = resolve_analytic(spec.analytic, d);
        const double t_max = oracle_horizon(OracleEquation::Internalized, d, ap);
        const ResidualReport rep =
            residual(d, ap, matrix_sample_grid(d, 9, 41, t_max), tissue_sample_grid(d, 9, 41, t_max));
        r.measured = std::max({rep.max_abs[0], rep.max_abs[2], rep.max_abs[4]});
        r.detail = std::string(ResidualReport::equation_name(0)) + " " + fmt(rep.max_abs[0]) + ", " +
                   ResidualReport::equation_name(2) + " " + fmt(rep.max_abs[2]) + ", " +
                   ResidualReport::equation_name(4) + " " + fmt(rep.max_abs[4]);
        return r.measured <= 1e-10;
    });
}

std::vector<CheckResult> all(const RunSpec& spec) {
    return {initial_conditions(), rate_identities(), ode_oracles(spec), conservation(spec), convergence(spec),
            qualitative(spec),    linearity(spec),   determinism(spec), honest_reporting(spec)};
}

}  // namespace twolayer::acceptance
