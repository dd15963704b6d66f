#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtx/config.hpp"
#include "rtx/csv.hpp"

namespace rtx {

// Bad experiment name, axis or grid; the message is meant for the user.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// One reproduced quantity. `relation` says how pass is decided:
//   abs     |engine - paper| <= tolerance
//   rel     |engine - paper| <= tolerance |paper|
//   below   engine < paper
//   factor  paper / tolerance <= engine <= paper * tolerance
// Only kind == "check" rows gate the exit status; "report" rows carry
// reference values the engine is not expected to reproduce.
struct SummaryRow {
    std::string name;
    double engine_value = 0, paper_value = 0, tolerance = 0;
    std::string relation = "abs";
    std::string kind = "check";
    bool pass = true;
};

SummaryRow check_abs(const std::string& name, double engine, double paper, double tol);
SummaryRow check_rel(const std::string& name, double engine, double paper, double rel);
SummaryRow check_below(const std::string& name, double engine, double bound);
SummaryRow check_factor(const std::string& name, double engine, double paper, double factor);
SummaryRow report(const std::string& name, double engine, double paper);

struct ExperimentResult {
    std::string name;
    std::vector<std::pair<std::string, CsvTable>> files;  // file name, table
    std::vector<SummaryRow> summary;

    bool passed() const;
    CsvTable summary_table() const;
    const CsvTable& file(const std::string& name) const;
    // every table plus summary.csv into dir (created if needed)
    void write(const std::filesystem::path& dir) const;
};

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);
// Bundled config file name used when none is given.
std::string default_config_name(const std::string& name);

ExperimentResult run_experiment(const std::string& name, const ConfigFile& file, std::uint64_t seed);

// "lin:a:b:n", "log:a:b:n", "v1,v2,...", or "" (empty grid). Values are in
// the default unit of the swept key.
std::vector<double> parse_grid(const std::string& spec);

// Row per grid value, in grid order: parameter, eta_M, eta_L, eta0, eta,
// t_dM, zeta_M and experiment-specific columns. Points run on the worker pool.
CsvTable sweep(const std::string& name, const ConfigFile& file, const std::string& axis,
               const std::vector<double>& grid, std::uint64_t seed, int workers = 0);

}  // namespace rtx
