#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twolayer/error.hpp"
#include "twolayer/io.hpp"

namespace fs = std::filesystem;
using namespace twolayer;

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::optional<double> t_end;
    std::optional<double> dt;
    std::optional<int> nx0;
    std::optional<int> nx1;
    std::optional<double> theta;
    std::optional<std::string> outer_bc;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config, "configuration file (JSON, or a run.json manifest)");
    cmd->add_option("--out", a.out, "output directory")->capture_default_str();
    cmd->add_option("--t-end", a.t_end, "end time (dimensional)");
    cmd->add_option("--dt", a.dt, "time step (dimensional)");
    cmd->add_option("--nx0", a.nx0, "matrix cells");
    cmd->add_option("--nx1", a.nx1, "tissue cells");
    cmd->add_option("--theta", a.theta, "time-stepping weight, 0.5 Crank-Nicolson, 1 implicit Euler");
    cmd->add_option("--outer-bc", a.outer_bc, "outer boundary at x = l1")
        ->check(CLI::IsMember({"zero-flux", "sink"}));
}

RunSpec resolve(const CommonArgs& a) {
    RunSpec spec = a.config.empty() ? default_run_spec() : load_config(a.config);
    if (a.t_end) spec.solver.t_end = *a.t_end;
    if (a.dt) spec.solver.dt = *a.dt;
    if (a.nx0) spec.grid.nx0 = *a.nx0;
    if (a.nx1) spec.grid.nx1 = *a.nx1;
    if (a.theta) spec.solver.theta = *a.theta;
    if (a.outer_bc) spec.solver.outer_bc = outer_boundary_from_string(*a.outer_bc);
    validate_run_spec(spec);
    return spec;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("--values: '" + item + "' is not a number");
        }
    }
    if (values.empty()) throw ValidationError("--values needs at least one number");
    return values;
}

int report_error(const std::exception& e, const fs::path& out) {
    const Json record = error_record(e);
    std::cerr << record.dump() << "\n";
    std::error_code ec;
    if (fs::is_directory(out, ec)) {
        try {
            write_json(record, out / "error.json");
        } catch (const std::exception&) {
        }
    }
    return record.at("exit_code").get<int>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drug release from a dissolving polymer matrix into tissue"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    CommonArgs sim_args, ana_args, ver_args, sweep_args;
    CLI::App* simulate = app.add_subcommand("simulate", "run the finite-volume solver");
    add_common(simulate, sim_args);
    CLI::App* analytic = app.add_subcommand("analytic", "solver run plus closed-form fields and their defects");
    add_common(analytic, ana_args);
    CLI::App* verify = app.add_subcommand("verify", "run verification checks");
    add_common(verify, ver_args);
    std::string mode = "all";
    verify->add_option("mode", mode, "residuals|oracle|mass|convergence|all")
        ->check(CLI::IsMember({"residuals", "oracle", "mass", "convergence", "all"}))
        ->capture_default_str();
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "one-at-a-time parameter sweep");
    add_common(sweep_cmd, sweep_args);
    std::string param, values;
    sweep_cmd->add_option("--param", param, "parameter name")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;
        std::cerr << Json{{"error", "validation"}, {"exit_code", 1}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }

    const CommonArgs& args = simulate->parsed()  ? sim_args
                             : analytic->parsed() ? ana_args
                             : verify->parsed()   ? ver_args
                                                  : sweep_args;
    const fs::path out = args.out;
    try {
        const RunSpec spec = resolve(args);
        if (simulate->parsed()) {
            run_simulate(spec, out);
        } else if (analytic->parsed()) {
            run_analytic(spec, out);
        } else if (sweep_cmd->parsed()) {
            run_sweep(spec, param, parse_values(values), out);
        } else {
            const std::vector<CheckResult> checks = run_verify(spec, verify_mode_from_string(mode), out);
            bool all = true;
            for (const CheckResult& c : checks) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << c.detail << " ["
                          << c.seconds << " s]\n";
                all = all && c.passed;
            }
            if (!all) throw NumericalError("verification failed; see " + (out / "verify.json").string());
        }
    } catch (const std::exception& e) {
        return report_error(e, out);
    }
    return 0;
}
