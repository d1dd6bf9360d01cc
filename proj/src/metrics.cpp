#include "twolayer/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "twolayer/error.hpp"

namespace twolayer {

std::string to_string(Species s) {
    switch (s) {
        case Species::C0Star: return "C0_star";
        case Species::C0: return "C0";
        case Species::C1Star: return "C1_star";
        case Species::C1: return "C1";
        case Species::Ci: return "Ci";
    }
    return "?";
}

Species species_from_string(const std::string& s) {
    for (Species sp : {Species::C0Star, Species::C0, Species::C1Star, Species::C1, Species::Ci}) {
        if (to_string(sp) == s) return sp;
    }
    throw ValidationError("unknown species '" + s + "'");
}

namespace {

const std::vector<double>& field(const SimState& s, Species sp) {
    switch (sp) {
        case Species::C0Star: return s.c0s;
        case Species::C0: return s.c0;
        case Species::C1Star: return s.c1s;
        case Species::C1: return s.c1;
        case Species::Ci: return s.ci;
    }
    return s.ci;
}

}  // namespace

std::vector<double> sample_times(const TimeSeries& ts) {
    std::vector<double> t;
    t.reserve(ts.samples.size());
    for (const SimState& s : ts.samples) t.push_back(s.t);
    return t;
}

std::vector<double> probe_series(const TimeSeries& ts, Species sp, double x) {
    const CompositeGrid& g = ts.grid;
    const bool matrix = in_matrix(sp);
    const double lo = matrix ? 0.0 : g.l0();
    const double hi = matrix ? g.l0() : g.l1();
    const double slack = 1e-12 * g.l1();
    if (!(x >= lo - slack && x <= hi + slack)) {
        std::ostringstream os;
        os << "probe x=" << x << " lies outside the " << (matrix ? "matrix" : "tissue") << " layer [" << lo
           << ", " << hi << "]";
        throw ValidationError(os.str());
    }
    const double h = matrix ? g.h0() : g.h1();
    const int cells = matrix ? g.nx0() : g.nx1();
    const double xi = std::clamp((x - lo) / h, 0.0, static_cast<double>(cells));
    const auto i = static_cast<std::size_t>(std::min(std::floor(xi), static_cast<double>(cells - 1)));
    const double w = xi - static_cast<double>(i);

    std::vector<double> y;
    y.reserve(ts.samples.size());
    for (const SimState& s : ts.samples) {
        const auto& f = field(s, sp);
        y.push_back(w == 0.0 ? f[i] : (1.0 - w) * f[i] + w * f[i + 1]);
    }
    return y;
}

Peak locate_peak(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || y.empty()) throw ValidationError("peak search needs matching nonempty series");
    Peak pk;
    pk.index = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    pk.value = y[pk.index];
    pk.time = t[pk.index];
    pk.at_end = y.size() > 1 && pk.index == y.size() - 1;
    if (pk.index == 0 || pk.index + 1 == y.size()) return pk;

    const std::size_t k = pk.index;
    const double t0 = t[k - 1], t1 = t[k], t2 = t[k + 1];
    const double d1 = (y[k] - y[k - 1]) / (t1 - t0);
    const double d2 = (y[k + 1] - y[k]) / (t2 - t1);
    const double curv = (d2 - d1) / (t2 - t0);
    if (!(curv < 0.0)) return pk;
    // y(t) = y0 + d1 (t - t0) + curv (t - t0)(t - t1)
    const double tv = std::clamp(0.5 * (t0 + t1) - d1 / (2.0 * curv), t0, t2);
    pk.time = tv;
    pk.value = y[k - 1] + d1 * (tv - t0) + curv * (tv - t0) * (tv - t1);
    return pk;
}

double extinction_time(std::span<const double> t, std::span<const double> y, const Peak& peak,
                       double fraction) {
    const double level = fraction * peak.value;
    for (std::size_t k = peak.index + 1; k < y.size(); ++k) {
        if (y[k] <= level) {
            const double ya = y[k - 1], yb = y[k];
            double te = t[k];
            if (ya != yb) te = t[k - 1] + (t[k] - t[k - 1]) * (ya - level) / (ya - yb);
            return std::max(te, peak.time);
        }
    }
    return std::numeric_limits<double>::infinity();
}

bool is_unimodal(std::span<const double> y, double tol) {
    if (y.empty()) return true;
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const double eps = tol * scale;
    std::size_t k = 0;
    while (k + 1 < y.size() && y[k + 1] >= y[k] - eps) ++k;
    while (k + 1 < y.size() && y[k + 1] <= y[k] + eps) ++k;
    return k + 1 == y.size();
}

bool is_nonincreasing(std::span<const double> y, double tol) {
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 1; k < y.size(); ++k) {
        if (y[k] > y[k - 1] + tol * scale) return false;
    }
    return true;
}

const ProbeMetrics& ReleaseMetrics::at(Species s, double x) const {
    for (const ProbeMetrics& p : probes) {
        if (p.species == s && std::abs(p.x - x) <= 1e-9 * std::max(1.0, std::abs(x))) return p;
    }
    std::ostringstream os;
    os << "no metrics recorded for " << to_string(s) << " at x=" << x;
    throw ValidationError(os.str());
}

ReleaseMetrics release_metrics(const TimeSeries& ts, std::span<const double> matrix_probes,
                               std::span<const double> tissue_probes) {
    ReleaseMetrics m;
    m.times = sample_times(ts);

    auto add = [&](Species sp, double x) {
        const std::vector<double> y = probe_series(ts, sp, x);
        const Peak pk = locate_peak(m.times, y);
        ProbeMetrics pm;
        pm.species = sp;
        pm.x = x;
        pm.peak = pk.value;
        pm.t_peak = pk.time;
        pm.t_extinction = extinction_time(m.times, y, pk, kExtinctionFraction);
        pm.peak_at_end = pk.at_end;
        if (pk.at_end) {
            std::ostringstream os;
            os << to_string(sp) << " at x=" << x << " peaks at t_end; extend the horizon";
            m.warnings.push_back(os.str());
        }
        m.probes.push_back(pm);
    };
    for (double x : matrix_probes) {
        add(Species::C0Star, x);
        add(Species::C0, x);
    }
    for (double x : tissue_probes) {
        add(Species::C1Star, x);
        add(Species::C1, x);
        add(Species::Ci, x);
    }

    const CompositeGrid& g = ts.grid;
    const double kid = ts.params.kid;
    double total0 = 0.0;
    double integral = 0.0;
    double prev_t = 0.0, prev_ci = 0.0;
    for (std::size_t n = 0; n < ts.samples.size(); ++n) {
        const SimState& s = ts.samples[n];
        const double ci = internalized_mass(g, s);
        if (n == 0) {
            total0 = matrix_mass(g, s) + tissue_mass(g, s);
        } else {
            integral += 0.5 * (s.t - prev_t) * (prev_ci + ci);
        }
        prev_t = s.t;
        prev_ci = ci;
        m.matrix_residual_fraction.push_back(matrix_mass(g, s) / total0);
        m.degraded_fraction.push_back(kid * integral / total0);
    }
    m.ci_time_integral = integral;
    return m;
}

ReleaseMetrics run_metrics(const RunSpec& spec) {
    const DimensionlessParams d = nondimensionalize(spec.params);
    const CompositeGrid grid = make_grid(spec.grid, d);
    const TimeSeries ts = simulate(d, grid, scaled_config(spec.solver, d.scales));
    std::vector<double> mp, tp;
    for (double x : spec.probes.matrix) mp.push_back(x / d.scales.length);
    for (double x : spec.probes.tissue) tp.push_back(x / d.scales.length);
    return release_metrics(ts, mp, tp);
}

SweepTable sweep(const RunSpec& base, const std::string& name, std::span<const double> values,
                 unsigned threads) {
    get_parameter(base.params, name);  // rejects unknown identifiers up front
    SweepTable table;
    table.parameter = name;
    table.rows.resize(values.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            SweepRow& row = table.rows[k];
            row.value = values[k];
            try {
                RunSpec spec = base;
                set_parameter(spec.params, name, values[k]);
                row.metrics = run_metrics(spec);
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, values.size())));
    std::vector<std::jthread> pool;
    for (unsigned n = 1; n < threads; ++n) pool.emplace_back(worker);
    worker();
    pool.clear();
    return table;
}

MetricSelector MetricSelector::parse(const std::string& text) {
    MetricSelector sel;
    if (text == "degraded_fraction") {
        sel.kind = Kind::DegradedFraction;
        return sel;
    }
    if (text == "matrix_fraction") {
        sel.kind = Kind::MatrixResidualFraction;
        return sel;
    }
    if (text == "ci_integral") {
        sel.kind = Kind::CiTimeIntegral;
        return sel;
    }
    const auto colon = text.find(':');
    const auto at = text.find('@');
    if (colon == std::string::npos || at == std::string::npos || at < colon) {
        throw ValidationError("cannot parse metric selector '" + text + "'");
    }
    const std::string kind = text.substr(0, colon);
    if (kind == "peak") sel.kind = Kind::Peak;
    else if (kind == "t_peak") sel.kind = Kind::TimeToPeak;
    else if (kind == "extinction") sel.kind = Kind::Extinction;
    else throw ValidationError("unknown metric kind '" + kind + "'");
    sel.species = species_from_string(text.substr(colon + 1, at - colon - 1));
    try {
        sel.x = std::stod(text.substr(at + 1));
    } catch (const std::exception&) {
        throw ValidationError("bad probe coordinate in metric selector '" + text + "'");
    }
    return sel;
}

std::string MetricSelector::name() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::DegradedFraction: return "degraded_fraction";
        case Kind::MatrixResidualFraction: return "matrix_fraction";
        case Kind::CiTimeIntegral: return "ci_integral";
        case Kind::Peak: os << "peak:"; break;
        case Kind::TimeToPeak: os << "t_peak:"; break;
        case Kind::Extinction: os << "extinction:"; break;
    }
    os << to_string(species) << "@" << x;
    return os.str();
}

double MetricSelector::extract(const ReleaseMetrics& m, const RunSpec& spec) const {
    switch (kind) {
        case Kind::DegradedFraction: return scale * m.degraded_fraction.back();
        case Kind::MatrixResidualFraction: return scale * m.matrix_residual_fraction.back();
        case Kind::CiTimeIntegral: return scale * m.ci_time_integral;
        default: break;
    }
    const ProbeMetrics& pm = m.at(species, x / spec.params.matrix.l0);
    switch (kind) {
        case Kind::Peak: return scale * pm.peak;
        case Kind::TimeToPeak: return scale * pm.t_peak;
        default: return scale * pm.t_extinction;
    }
}

SensitivityRecord local_sensitivity(const RunSpec& base, const std::string& name, double rel_step,
                                    const MetricSelector& metric) {
    if (!(rel_step > 0.0 && rel_step <= 0.5)) throw ValidationError("rel_step must lie in (0, 0.5]");
    SensitivityRecord rec;
    rec.parameter = name;
    rec.metric = metric.name();
    rec.rel_step = rel_step;
    rec.base_value = get_parameter(base.params, name);
    if (rec.base_value == 0.0 || !std::isfinite(rec.base_value)) {
        throw ValidationError("normalized sensitivity needs a finite nonzero base value for '" + name + "'");
    }
    const double dp = rel_step * rec.base_value;

    auto evaluate = [&](double value) {
        RunSpec spec = base;
        set_parameter(spec.params, name, value);
        // Probes stay at the base locations so the metric refers to the same points.
        return metric.extract(run_metrics(spec), base);
    };
    rec.metric_base = evaluate(rec.base_value);
    rec.metric_plus = evaluate(rec.base_value + dp);
    rec.metric_minus = evaluate(rec.base_value - dp);
    for (double v : {rec.metric_base, rec.metric_plus, rec.metric_minus}) {
        if (!std::isfinite(v)) throw NumericalError("metric " + rec.metric + " is not finite at a perturbed point");
    }
    if (rec.metric_base == 0.0) throw NumericalError("metric " + rec.metric + " vanishes at the base point");

    const double norm = rec.base_value / rec.metric_base;
    rec.central = norm * (rec.metric_plus - rec.metric_minus) / (2.0 * dp);
    rec.forward = norm * (rec.metric_plus - rec.metric_base) / dp;
    rec.backward = norm * (rec.metric_base - rec.metric_minus) / dp;
    return rec;
}

}  // namespace twolayer
