#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twolayer/config.hpp"
#include "twolayer/metrics.hpp"
#include "twolayer/verification.hpp"

namespace twolayer {

inline constexpr const char* kToolName = "twolayer";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

/// Fixed-format number for CSV/JSON text: 17 significant digits, "inf"/"-inf"/"nan" otherwise.
std::string format_number(double v);

/// Hex SHA-256 digest of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// matrix.csv: t,x,C0_star,C0 and tissue.csv: t,x,C1_star,C1,Ci, dimensional units.
void write_state_csvs(const TimeSeries& ts, const std::filesystem::path& dir);

Json metrics_to_json(const ReleaseMetrics& m, const Scales& s);
Json ledger_to_json(const MassLedger& ledger, const Scales& s);
Json convergence_to_json(const ConvergenceReport& r);
Json comparison_to_json(const ComparisonReport& r);

/// Writes pretty-printed JSON with a trailing newline.
void write_json(const Json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

/// Outcome of one acceptance or verification check.
struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    double seconds = 0.0;
    std::string detail;
};

Json checks_to_json(const std::vector<CheckResult>& checks);

/// Drivers behind the CLI subcommands. Each writes its files into `out` (created if
/// needed) and finishes with run.json. They throw the library's Error subclasses.
void run_simulate(const RunSpec& spec, const std::filesystem::path& out);
void run_analytic(const RunSpec& spec, const std::filesystem::path& out);
void run_sweep(const RunSpec& spec, const std::string& name, const std::vector<double>& values,
               const std::filesystem::path& out);

enum class VerifyMode { Residuals, Oracle, Mass, Convergence, All };
VerifyMode verify_mode_from_string(const std::string& s);
std::string to_string(VerifyMode m);

/// Runs the checks selected by `mode`, writes verify.json and returns the results.
std::vector<CheckResult> run_verify(const RunSpec& spec, VerifyMode mode, const std::filesystem::path& out);

/// Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 I/O failure.
int exit_code_for(const std::exception& e);
Json error_record(const std::exception& e);

/// run.json without the wall-clock fields, for byte comparison of two runs.
std::string manifest_without_wall_time(const std::filesystem::path& run_json);

}  // namespace twolayer
