#include "twolayer/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "twolayer/acceptance.hpp"
#include "twolayer/error.hpp"

namespace fs = std::filesystem;

namespace twolayer {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("SHA-256 initialisation failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    static const char* digits = "0123456789abcdef";
    for (unsigned int n = 0; n < len; ++n) {
        hex.push_back(digits[md[n] >> 4]);
        hex.push_back(digits[md[n] & 0xf]);
    }
    return hex;
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json(const Json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string csv_quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else if (c == '\n') q += ' ';
        else q += c;
    }
    return q + "\"";
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

Json scaled_to_json(const DimensionlessParams& d) {
    Json j;
    j["alpha0"] = d.alpha0;
    j["phi0"] = d.phi0;
    j["km"] = d.km;
    j["clim"] = d.clim;
    j["beta0"] = d.beta0;
    j["delta0"] = d.delta0;
    j["ka"] = d.ka;
    j["kd"] = d.kd;
    j["ki"] = d.ki;
    j["kid"] = d.kid;
    j["gamma"] = d.gamma;
    j["d1"] = d.d1;
    j["l0"] = d.l0;
    j["l1"] = d.l1;
    j["pm"] = d.perfect_contact() ? Json("infinite") : Json(d.pm);
    j["sigma"] = d.sigma;
    j["scales"] = {{"length", d.scales.length}, {"time", d.scales.time}, {"concentration", d.scales.concentration}};
    return j;
}

struct Manifest {
    explicit Manifest(std::string cmd) : command(std::move(cmd)) {}
    std::string command;
    std::string start = utc_now();
    Json extra = Json::object();
    std::vector<std::string> outputs;
};

void finish_manifest(const Manifest& m, const RunSpec& spec, const fs::path& out) {
    Json j;
    j["manifest_version"] = 1;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["command"] = m.command;
    j["csv_schema_version"] = kCsvSchemaVersion;
    j["config"] = write_config(spec);
    try {
        const DimensionlessParams d = nondimensionalize(spec.params);
        j["scaled"] = scaled_to_json(d);
        const SolverConfig c = scaled_config(spec.solver, d.scales);
        j["scaled_solver"] = {{"dt", c.dt}, {"t_end", c.t_end}};
    } catch (const Error&) {
        j["scaled"] = nullptr;
    }
    for (const auto& [k, v] : m.extra.items()) j[k] = v;
    Json hashes = Json::object();
    for (const std::string& name : m.outputs) hashes[name] = sha256_file(out / name);
    j["outputs"] = hashes;
    j["wall_time"] = {{"start", m.start}, {"end", utc_now()}};
    write_json(j, out / "run.json");
}

struct SimulationProducts {
    DimensionlessParams params;
    TimeSeries series;
    ReleaseMetrics metrics;
    MassLedger ledger;
};

SimulationProducts simulate_and_write(const RunSpec& spec, const fs::path& out, Manifest& manifest) {
    validate_run_spec(spec);
    ensure_dir(out);
    const DimensionlessParams d = nondimensionalize(spec.params);
    const CompositeGrid grid = make_grid(spec.grid, d);
    TimeSeries ts = simulate(d, grid, scaled_config(spec.solver, d.scales));

    std::vector<double> mp, tp;
    for (double x : spec.probes.matrix) mp.push_back(x / d.scales.length);
    for (double x : spec.probes.tissue) tp.push_back(x / d.scales.length);
    ReleaseMetrics metrics = release_metrics(ts, mp, tp);
    MassLedger ledger = mass_audit(ts);

    write_state_csvs(ts, out);
    write_json(metrics_to_json(metrics, d.scales), out / "metrics.json");
    write_json(ledger_to_json(ledger, d.scales), out / "ledger.json");
    manifest.outputs.insert(manifest.outputs.end(), {"matrix.csv", "tissue.csv", "metrics.json", "ledger.json"});
    return {d, std::move(ts), std::move(metrics), std::move(ledger)};
}

}  // namespace

void write_state_csvs(const TimeSeries& ts, const fs::path& dir) {
    const Scales& s = ts.params.scales;
    const std::vector<double> xm = ts.grid.matrix_coordinates();
    const std::vector<double> xt = ts.grid.tissue_coordinates();

    std::string m = "t,x,C0_star,C0\n";
    std::string t = "t,x,C1_star,C1,Ci\n";
    for (const SimState& st : ts.samples) {
        const std::string time = format_number(st.t * s.time);
        for (std::size_t i = 0; i < xm.size(); ++i) {
            m += time + ',' + format_number(xm[i] * s.length) + ',' +
                 format_number(st.c0s[i] * s.concentration) + ',' + format_number(st.c0[i] * s.concentration) + '\n';
        }
        for (std::size_t j = 0; j < xt.size(); ++j) {
            t += time + ',' + format_number(xt[j] * s.length) + ',' +
                 format_number(st.c1s[j] * s.concentration) + ',' + format_number(st.c1[j] * s.concentration) +
                 ',' + format_number(st.ci[j] * s.concentration) + '\n';
        }
    }
    write_text(m, dir / "matrix.csv");
    write_text(t, dir / "tissue.csv");
}

Json metrics_to_json(const ReleaseMetrics& m, const Scales& s) {
    Json j;
    j["units"] = "dimensional";
    j["extinction_fraction"] = kExtinctionFraction;
    Json probes = Json::array();
    for (const ProbeMetrics& p : m.probes) {
        probes.push_back({{"species", to_string(p.species)},
                          {"x", p.x * s.length},
                          {"peak", p.peak * s.concentration},
                          {"t_peak", p.t_peak * s.time},
                          {"t_extinction", number_or_null(p.t_extinction * s.time)},
                          {"peak_at_end", p.peak_at_end}});
    }
    j["probes"] = probes;
    j["ci_time_integral"] = m.ci_time_integral * s.concentration * s.length * s.time;
    j["final_matrix_residual_fraction"] = m.matrix_residual_fraction.empty() ? 0.0 : m.matrix_residual_fraction.back();
    j["final_degraded_fraction"] = m.degraded_fraction.empty() ? 0.0 : m.degraded_fraction.back();
    Json times = Json::array();
    for (double t : m.times) times.push_back(t * s.time);
    j["series"] = {{"t", times},
                   {"matrix_residual_fraction", m.matrix_residual_fraction},
                   {"degraded_fraction", m.degraded_fraction}};
    j["warnings"] = m.warnings;
    return j;
}

Json ledger_to_json(const MassLedger& ledger, const Scales& s) {
    const double mass = s.concentration * s.length;
    Json j;
    j["units"] = "dimensional";
    j["initial_total"] = ledger.initial_total * mass;
    j["max_relative_defect"] = ledger.max_relative_defect;
    Json entries = Json::array();
    for (const LedgerEntry& e : ledger.entries) {
        entries.push_back({{"t", e.t * s.time},
                           {"matrix_mass", e.matrix_mass * mass},
                           {"tissue_mass", e.tissue_mass * mass},
                           {"sink", e.sink * mass},
                           {"outflow", e.outflow * mass},
                           {"defect", e.defect * mass},
                           {"relative_defect", e.relative_defect}});
    }
    j["entries"] = entries;
    return j;
}

Json convergence_to_json(const ConvergenceReport& r) {
    Json j;
    j["kind"] = r.kind == RefinementKind::Space ? "space" : "time";
    j["steps"] = r.steps;
    j["differences"] = r.differences;
    j["orders"] = Json::array();
    for (double o : r.orders) j["orders"].push_back(number_or_null(o));
    Json per = Json::object();
    for (std::size_t s = 0; s < 5; ++s) {
        Json orders = Json::array();
        for (const auto& o : r.species_orders) orders.push_back(number_or_null(o[s]));
        per[kSpeciesNames[s]] = orders;
    }
    j["species_orders"] = per;
    j["warnings"] = r.warnings;
    return j;
}

Json comparison_to_json(const ComparisonReport& r) {
    Json j;
    j["t_start"] = r.t_start;
    j["t_stop"] = r.t_stop;
    Json pde = Json::object(), driven = Json::object();
    for (std::size_t s = 0; s < 5; ++s) pde[kSpeciesNames[s]] = r.pde_deviation[s];
    for (std::size_t s : {0u, 2u, 4u}) driven[kSpeciesNames[s]] = r.driven_deviation[s];
    j["pde_relative_deviation"] = pde;
    j["driven_relative_deviation"] = driven;
    j["max_interface_flux_mismatch"] = r.max_flux_mismatch;
    return j;
}

Json checks_to_json(const std::vector<CheckResult>& checks) {
    Json arr = Json::array();
    bool all = true;
    for (const CheckResult& c : checks) {
        all = all && c.passed;
        arr.push_back({{"id", c.id},
                       {"name", c.name},
                       {"passed", c.passed},
                       {"measured", number_or_null(c.measured)},
                       {"threshold", number_or_null(c.threshold)},
                       {"seconds", c.seconds},
                       {"detail", c.detail}});
    }
    return {{"passed", all}, {"checks", arr}};
}

void run_simulate(const RunSpec& spec, const fs::path& out) {
    Manifest manifest("simulate");
    simulate_and_write(spec, out, manifest);
    finish_manifest(manifest, spec, out);
}

void run_analytic(const RunSpec& spec, const fs::path& out) {
    Manifest manifest("analytic");
    const SimulationProducts sim = simulate_and_write(spec, out, manifest);
    const DimensionlessParams& d = sim.params;
    const Scales& s = d.scales;
    const AnalyticParams ap = resolve_analytic(spec.analytic, d);
    const CompositeGrid& grid = sim.series.grid;

    std::string csv = "t,x,layer,C0_star,C0,C1_star,C1,Ci\n";
    std::string flux = "t,matrix_flux,tissue_flux,mismatch\n";
    const double flux_scale = s.length * s.concentration / s.time;
    double max_mismatch = 0.0;
    bool limiting = false;
    for (const SimState& st : sim.series.samples) {
        const std::string time = format_number(st.t * s.time);
        for (std::size_t i = 0; i < grid.matrix_nodes(); ++i) {
            const MatrixFields f = eval_matrix(grid.matrix_x(i), st.t, d, ap);
            limiting = limiting || f.limiting_form;
            csv += time + ',' + format_number(grid.matrix_x(i) * s.length) + ",matrix," +
                   format_number(f.c0_star * s.concentration) + ',' + format_number(f.c0 * s.concentration) + ",,,\n";
        }
        for (std::size_t j = 0; j < grid.tissue_nodes(); ++j) {
            const TissueFields f = eval_tissue(grid.tissue_x(j), st.t, d, ap);
            limiting = limiting || f.limiting_form;
            csv += time + ',' + format_number(grid.tissue_x(j) * s.length) + ",tissue,,," +
                   format_number(f.c1_star * s.concentration) + ',' + format_number(f.c1 * s.concentration) + ',' +
                   format_number(f.ci * s.concentration) + '\n';
        }
        const FluxMismatch fm = interface_flux_mismatch(st.t, d, ap);
        max_mismatch = std::max(max_mismatch, fm.mismatch);
        flux += time + ',' + format_number(fm.matrix_flux * flux_scale) + ',' +
                format_number(fm.tissue_flux * flux_scale) + ',' + format_number(fm.mismatch * flux_scale) + '\n';
    }
    write_text(csv, out / "analytic.csv");
    write_text(flux, out / "flux_mismatch.csv");

    const double t_max = sim.series.samples.back().t > 0.0 ? sim.series.samples.back().t : 1.0;
    const ResidualReport res = residual(d, ap, matrix_sample_grid(d, 9, 41, t_max), tissue_sample_grid(d, 9, 41, t_max));
    const MatrixRates mr = matrix_rates(d, ap.a, ap.gamma);
    const TissueRates tr = tissue_rates(d, ap.b);
    const ComparisonReport cmp = compare_analytic_numeric(d, ap, grid, scaled_config(spec.solver, s), 1.0, 1.0);

    Json rep;
    rep["units"] = "scaled";
    rep["analytic_params"] = {{"a", ap.a}, {"b", ap.b}, {"E1", ap.E1}, {"E2", ap.E2},
                              {"lambda", ap.lambda}, {"mu", ap.mu}, {"gamma", ap.gamma}};
    rep["matrix_rates"] = {{"A", mr.A}, {"B", mr.B}, {"m1", mr.m1}, {"m2", mr.m2}};
    rep["tissue_rates"] = {{"P", tr.P}, {"Q", tr.Q}, {"n1", tr.n1}, {"n2", tr.n2}};
    rep["limiting_form_used"] = limiting;
    Json r = Json::object();
    for (int n = 0; n < 5; ++n) r[ResidualReport::equation_name(n)] = res.max_abs[n];
    rep["max_abs_residual"] = r;
    rep["residual_grid"] = {{"x_points_per_layer", 9}, {"t_points", 41}, {"t_max", t_max}};
    rep["max_interface_flux_mismatch"] = max_mismatch;
    rep["comparison"] = comparison_to_json(cmp);
    rep["notes"] = {
        "free_matrix and free_tissue residuals measure how far the single-mode forms are from solving the diffusion equations; they are not expected to vanish",
        "the interface flux mismatch is measured from the two one-sided closed-form derivatives at x = l0"};
    write_json(rep, out / "analytic_report.json");

    manifest.outputs.insert(manifest.outputs.end(), {"analytic.csv", "flux_mismatch.csv", "analytic_report.json"});
    finish_manifest(manifest, spec, out);
}

void run_sweep(const RunSpec& spec, const std::string& name, const std::vector<double>& values,
               const fs::path& out) {
    validate_run_spec(spec);
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    ensure_dir(out);
    Manifest manifest("sweep");
    manifest.extra["sweep"] = {{"parameter", name}, {"values", values}};

    const SweepTable table = sweep(spec, name, values);
    std::string rows = "parameter,value,status,species,x,peak,t_peak,t_extinction,peak_at_end\n";
    std::string summary = "parameter,value,status,matrix_residual_fraction,degraded_fraction,ci_time_integral,error\n";
    for (const SweepRow& row : table.rows) {
        const std::string head = name + ',' + format_number(row.value) + ',';
        if (!row.ok) {
            summary += head + "error,,,," + csv_quote(row.error) + '\n';
            continue;
        }
        RunSpec rs = spec;
        set_parameter(rs.params, name, row.value);
        const Scales s = nondimensionalize(rs.params).scales;
        for (const ProbeMetrics& p : row.metrics.probes) {
            rows += head + "ok," + to_string(p.species) + ',' + format_number(p.x * s.length) + ',' +
                    format_number(p.peak * s.concentration) + ',' + format_number(p.t_peak * s.time) + ',' +
                    format_number(p.t_extinction * s.time) + ',' + (p.peak_at_end ? "1" : "0") + '\n';
        }
        summary += head + "ok," + format_number(row.metrics.matrix_residual_fraction.back()) + ',' +
                   format_number(row.metrics.degraded_fraction.back()) + ',' +
                   format_number(row.metrics.ci_time_integral * s.concentration * s.length * s.time) + ",\n";
    }
    write_text(rows, out / "sweep.csv");
    write_text(summary, out / "sweep_summary.csv");
    manifest.outputs = {"sweep.csv", "sweep_summary.csv"};
    finish_manifest(manifest, spec, out);
}

VerifyMode verify_mode_from_string(const std::string& s) {
    if (s == "residuals") return VerifyMode::Residuals;
    if (s == "oracle") return VerifyMode::Oracle;
    if (s == "mass") return VerifyMode::Mass;
    if (s == "convergence") return VerifyMode::Convergence;
    if (s == "all") return VerifyMode::All;
    throw ValidationError("verify mode must be residuals|oracle|mass|convergence|all, got '" + s + "'");
}

std::string to_string(VerifyMode m) {
    switch (m) {
        case VerifyMode::Residuals: return "residuals";
        case VerifyMode::Oracle: return "oracle";
        case VerifyMode::Mass: return "mass";
        case VerifyMode::Convergence: return "convergence";
        case VerifyMode::All: return "all";
    }
    return "?";
}

std::vector<CheckResult> run_verify(const RunSpec& spec, VerifyMode mode, const fs::path& out) {
    validate_run_spec(spec);
    ensure_dir(out);
    Manifest manifest("verify");
    manifest.extra["verify_mode"] = to_string(mode);

    std::vector<CheckResult> checks;
    switch (mode) {
        case VerifyMode::Residuals:
            checks = {acceptance::initial_conditions(), acceptance::rate_identities(),
                      acceptance::ode_residuals(spec), acceptance::honest_reporting(spec)};
            break;
        case VerifyMode::Oracle: checks = {acceptance::ode_oracles(spec)}; break;
        case VerifyMode::Mass: checks = {acceptance::conservation(spec), acceptance::linearity(spec)}; break;
        case VerifyMode::Convergence: checks = {acceptance::convergence(spec)}; break;
        case VerifyMode::All: checks = acceptance::all(spec); break;
    }
    Json report = checks_to_json(checks);
    report["mode"] = to_string(mode);
    write_json(report, out / "verify.json");
    manifest.outputs = {"verify.json"};
    finish_manifest(manifest, spec, out);
    return checks;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 1;
    if (dynamic_cast<const NumericalError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return 3;
    return 2;
}

Json error_record(const std::exception& e) {
    const char* kind = "numerical";
    if (const auto* err = dynamic_cast<const Error*>(&e)) kind = err->kind();
    else if (dynamic_cast<const fs::filesystem_error*>(&e)) kind = "io";
    return {{"error", kind}, {"exit_code", exit_code_for(e)}, {"message", e.what()}};
}

std::string manifest_without_wall_time(const fs::path& run_json) {
    std::ifstream in(run_json, std::ios::binary);
    if (!in) throw IoError("cannot read '" + run_json.string() + "'");
    Json j = Json::parse(in);
    j.erase("wall_time");
    return j.dump();
}

}  // namespace twolayer
