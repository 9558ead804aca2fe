// Command-line front end for the smartification study pipeline:
//   run      - execute the scenario pipeline for every variant in a config
//   compare  - tabulate report.json files side by side
//   validate - load and check a grid directory
#include <iostream>

#include <CLI11.hpp>

#include "lvse/csv.hpp"
#include "lvse/grid_model.hpp"
#include "lvse/scenario.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, int workers_override,
            const std::string& dump_list) {
    lvse::ScenarioConfig config = lvse::load_scenario_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (workers_override > 0) config.workers = workers_override;
    for (const auto& part : lvse::csv::split(dump_list, ',')) {
        if (part == "truth") config.dumps.truth = true;
        else if (part == "measurements") config.dumps.measurements = true;
        else if (part == "estimates") config.dumps.estimates = true;
        else if (part == "samples") config.dumps.samples = true;
        else if (!part.empty()) throw lvse::ValidationError("unknown dump kind '" + part + "'");
    }

    lvse::RunArtifacts artifacts = lvse::run_scenario(config);
    for (const auto& outcome : artifacts.outcomes) {
        if (outcome.failed) {
            std::cout << "variant " << outcome.variant_id << ": FAILED (" << outcome.error
                      << ")\n";
            continue;
        }
        const auto& r = outcome.report;
        std::cout << "variant " << outcome.variant_id << ": voltage q99 = " << r.voltage_q99
                  << ", loading q95 = " << r.loading_q95 << " -> " << outcome.report_json.string()
                  << "\n";
    }
    return artifacts.any_failed ? 2 : 0;
}

int cmd_compare(const std::vector<std::string>& reports, const std::string& out_dir) {
    std::vector<std::filesystem::path> paths(reports.begin(), reports.end());
    lvse::ComparisonTable table = lvse::compare_variants(paths);
    std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    lvse::write_comparison(table, dir / "comparison.csv", dir / "comparison.json");

    std::cout << "grid " << table.grid_name << ", t = [" << table.t_begin << ", " << table.t_end
              << ")\n";
    for (const auto& row : table.rows) {
        std::cout << "  variant " << row.variant_id << ": voltage q99 = " << row.voltage_q99
                  << ", loading q95 = " << row.loading_q95;
        for (const auto& [name, pass] : row.use_case_pass)
            std::cout << ", " << name << " = " << (pass ? "pass" : "fail");
        std::cout << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& grid_dir) {
    lvse::GridTopology grid = lvse::load_grid(grid_dir);
    std::cout << "grid " << grid.name() << " is valid\n"
              << "  buses:     " << grid.buses().size() << "\n"
              << "  lines:     " << grid.lines().size() << "\n"
              << "  cabinets:  " << grid.cabinets().size() << "\n"
              << "  prosumers: " << grid.prosumers().size() << "\n"
              << "  feeders:   " << grid.feeder_count() << "\n"
              << "  timesteps: " << grid.profiles().length() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-voltage grid smartification study: power flow, measurement synthesis, "
                 "state estimation and quality evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, dump_list, grid_dir;
    int workers = 0;
    std::vector<std::string> reports;

    auto* run = app.add_subcommand("run", "run the pipeline for every variant in a config");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--workers", workers, "timestep worker threads (overrides config)");
    run->add_option("--dump", dump_list, "comma list of truth,measurements,estimates,samples");

    auto* compare = app.add_subcommand("compare", "compare report.json files");
    compare->add_option("--reports", reports, "report.json files")->required()->expected(-2);
    compare->add_option("--out", out_dir, "output directory for comparison files");

    auto* validate = app.add_subcommand("validate", "validate a grid directory");
    validate->add_option("--grid", grid_dir, "grid directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, workers, dump_list);
        if (compare->parsed()) return cmd_compare(reports, out_dir);
        if (validate->parsed()) return cmd_validate(grid_dir);
    } catch (const lvse::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const lvse::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
