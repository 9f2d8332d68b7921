#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "fracheat/analysis.hpp"

namespace fracheat {

// config schema violation; the message names the offending field (and the
// line for JSON syntax errors)
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

struct RunConfig {
    KernelParams params;
    GridSpec grid;
    std::string datum = "cosine:1";
    std::vector<std::string> suites{"solution"};
    std::filesystem::path output_dir = "fracheat_out";
    unsigned seed = 7;
    int threads = 0;  // 0: FRACHEAT_THREADS
    double classical_B = 0.0;

    FunctionSpec datum_spec() const { return FunctionSpec::parse(datum); }
    void validate() const;
};

// Config text is a JSON object:
//   {"N": 1, "s": 0.75, "datum": "cosine:1",
//    "grid": "-5:5:21" | {"lo": [..], "hi": [..], "counts": [..]},
//    "times": [0, 0.5, 1, 2], "suites": ["solution"], "out": "dir",
//    "seed": 7, "threads": 0, "classical_B": 0,
//    "quad": {"abs_tol": 1e-10, "rel_tol": 1e-8, "max_subdivisions": 2048}}
// Only "s" and "datum" are required.  Unknown keys are rejected.
RunConfig parse_config(const std::string& text);

// "lo:hi:count" per axis, axes separated by commas
GridSpec parse_grid(const std::string& text, int N, std::vector<double> times);
std::vector<double> parse_list(const std::string& text);

struct SuiteInfo {
    std::string name;
    std::string description;
};
const std::vector<SuiteInfo>& registered_suites();
bool is_registered_suite(const std::string& name);

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    nlohmann::json to_json() const;
};

enum class TableFormat { Csv, Json };

// 17 significant digits, round-trip exact
std::string format_number(double v);

// CSV: header row, one line per row, newline-terminated.  JSON: sorted
// keys, two-space indent, trailing newline.
void emit_table(const Table& table, const std::filesystem::path& path, TableFormat format);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

Table report_table(const VerificationReport& report);
// columns t, x1.., u, err_est
Table field_table(const SolutionField& field);

struct SuiteOutcome {
    VerificationReport report;
    std::vector<std::filesystem::path> files;
};

// Runs one registered suite; numeric failures become failed checks.
// Writes <out>/<suite>.json and <out>/<suite>.csv.
SuiteOutcome run_suite(const RunConfig& cfg, const std::string& suite);

// solve subcommand body: CSV at csv_path, manifest next to it
std::vector<std::filesystem::path> run_solve(const RunConfig& cfg, const std::filesystem::path& csv_path);

// datum grammar and suite list, for --help
std::string help_footer();

// fracheat command line; returns the process exit code
int cli_main(int argc, char** argv);

}  // namespace fracheat
