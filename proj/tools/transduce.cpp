#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rtx/config.hpp"
#include "rtx/experiments.hpp"
#include "rtx/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef RTX_CONFIG_DIR
#define RTX_CONFIG_DIR "configs"
#endif

namespace {

constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

fs::path resolve_config(const std::string& given, const std::string& experiment)
{
    if (!given.empty()) return given;
    fs::path local = fs::path("configs") / rtx::default_config_name(experiment);
    if (fs::exists(local)) return local;
    return fs::path(RTX_CONFIG_DIR) / rtx::default_config_name(experiment);
}

std::string utc_now()
{
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_metadata(const fs::path& dir, json meta)
{
    meta["timestamp"] = utc_now();
    meta["workers"] = rtx::worker_count();
    std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
}

void print_summary(const rtx::ExperimentResult& r)
{
    for (const auto& row : r.summary) {
        std::cout << std::left << std::setw(7) << (row.kind == "check" ? (row.pass ? "PASS" : "FAIL") : "report")
                  << std::setw(44) << row.name << " engine " << std::setw(14) << rtx::format_number(row.engine_value)
                  << " ref " << rtx::format_number(row.paper_value) << '\n';
    }
}

std::string config_error_text(const rtx::ConfigError& e)
{
    std::string s = e.what();
    if (!e.field().empty() && s.find(e.field()) == std::string::npos) s = e.field() + ": " + s;
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rydberg-EIT microwave-to-optical transduction engine"};
    app.require_subcommand(1);

    std::string name, config, out, axis, grid;
    std::uint64_t seed = 1;

    std::string names;
    for (const auto& n : rtx::experiment_names()) names += (names.empty() ? "" : ", ") + n;

    auto* run = app.add_subcommand("run", "reproduce one experiment");
    run->add_option("name", name, "experiment: " + names)->required();
    run->add_option("--config", config, "config file (default: bundled preset)");
    run->add_option("--out", out, "output directory (default: out/<name>)");
    run->add_option("--seed", seed, "random seed");

    auto* sw = app.add_subcommand("sweep", "evaluate an experiment over a grid of one config field");
    sw->add_option("name", name, "experiment: " + names)->required();
    sw->add_option("--axis", axis, "config field, section.key")->required();
    sw->add_option("--grid", grid, "lin:A:B:N, log:A:B:N or v1,v2,... in the field's default unit")->required();
    sw->add_option("--config", config, "config file (default: bundled preset)");
    sw->add_option("--out", out, "output directory (default: out/<name>_sweep)");
    sw->add_option("--seed", seed, "random seed");

    auto* va = app.add_subcommand("validate", "parse and check a config file");
    va->add_option("--config", config, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_usage;
    }

    try {
        if (va->parsed()) {
            rtx::TransducerConfig cfg = rtx::load_config(config);
            rtx::validate(cfg);
            std::cout << config << ": ok\n";
            return 0;
        }

        if (!rtx::is_experiment(name)) {
            std::cerr << "unknown experiment '" << name << "'\nvalid names: " << names << "\n\n" << app.help();
            return exit_usage;
        }
        fs::path cfg_path = resolve_config(config, name);
        rtx::ConfigFile file = rtx::ConfigFile::parse(cfg_path);

        if (run->parsed()) {
            fs::path dir = out.empty() ? fs::path("out") / name : fs::path(out);
            rtx::ExperimentResult r = rtx::run_experiment(name, file, seed);
            r.write(dir);
            json files = json::array();
            for (const auto& [n, t] : r.files) files.push_back(n);
            files.push_back("summary.csv");
            write_metadata(dir, {{"command", "run"},
                                 {"experiment", name},
                                 {"config", cfg_path.string()},
                                 {"seed", seed},
                                 {"files", files},
                                 {"passed", r.passed()}});
            print_summary(r);
            std::cout << (r.passed() ? "all checks passed" : "some checks failed") << " -> " << dir.string() << '\n';
            return r.passed() ? 0 : exit_fail;
        }

        if (sw->parsed()) {
            fs::path dir = out.empty() ? fs::path("out") / (name + "_sweep") : fs::path(out);
            std::vector<double> values = rtx::parse_grid(grid);
            rtx::CsvTable t = rtx::sweep(name, file, axis, values, seed);
            fs::create_directories(dir);
            t.write(dir / "sweep.csv");
            write_metadata(dir, {{"command", "sweep"},
                                 {"experiment", name},
                                 {"config", cfg_path.string()},
                                 {"axis", axis},
                                 {"grid", grid},
                                 {"seed", seed},
                                 {"points", values.size()}});
            std::cout << values.size() << " points -> " << (dir / "sweep.csv").string() << '\n';
            return 0;
        }
    } catch (const rtx::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const rtx::ConfigError& e) {
        std::cerr << "config error: " << config_error_text(e) << '\n';
        return exit_fail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_fail;
    }
    return 0;
}
