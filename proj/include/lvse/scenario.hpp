#ifndef LVSE_SCENARIO_HPP
#define LVSE_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lvse/evaluation.hpp"
#include "lvse/measurement_gen.hpp"
#include "lvse/power_flow.hpp"
#include "lvse/state_estimation.hpp"

namespace lvse {

struct DumpFlags {
    bool truth = false;
    bool measurements = false;
    bool estimates = false;
    bool samples = false;
};

struct ScenarioConfig {
    std::filesystem::path grid_dir;
    std::vector<EquipmentVariant> variants;
    std::size_t t_begin = 0;
    std::size_t t_end = 0;
    std::uint64_t master_seed = 0;
    PseudoConfig pseudo;
    PowerFlowOptions power_flow;
    WlsOptions wls;
    UseCaseThresholds thresholds;
    std::filesystem::path out_dir = "out";
    int workers = 1;
    DumpFlags dumps;

    // Stable digest of everything that determines the outputs.
    std::string fingerprint() const;
};

// Key-value scenario file with one [variant <id>] section per rollout
// strategy; see README for the schema.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

struct VariantOutcome {
    std::string variant_id;
    bool failed = false;
    std::string error;
    QualityReport report;
    std::filesystem::path report_json;
    std::filesystem::path report_csv;
};

struct RunArtifacts {
    std::filesystem::path out_dir;
    std::vector<VariantOutcome> outcomes;
    bool any_failed = false;
};

// The full pipeline for every variant of the config: one shared ground-truth
// power flow series, then per variant: allocation (time-invariant),
// per-timestep measurement synthesis, WLS estimation and quality samples,
// finally quantiles and use-case assessment. A failing variant is recorded
// and the remaining variants still run.
RunArtifacts run_scenario(const ScenarioConfig& config);

// In-memory single-variant evaluation, shared by run_scenario and tests.
struct VariantEvaluation {
    QualityReport report;
    std::vector<QualitySample> voltage_samples;
    std::vector<QualitySample> loading_samples;
    std::vector<WlsSolution> solutions; // per timestep
};

VariantEvaluation evaluate_variant(const NetworkModel& net, const TimeseriesResult& truth,
                                   const EquipmentVariant& variant, const ScenarioConfig& config);

struct ComparisonRow {
    std::string variant_id;
    double voltage_q99 = 0.0;
    double loading_q95 = 0.0;
    std::map<std::string, bool> use_case_pass;
};

struct ComparisonTable {
    std::string grid_name;
    std::size_t t_begin = 0;
    std::size_t t_end = 0;
    std::vector<ComparisonRow> rows; // ordered by variant id
};

// Side-by-side table from report.json files; all reports must stem from the
// same grid and timestep range.
ComparisonTable compare_variants(const std::vector<std::filesystem::path>& report_files);

void write_report_json(const QualityReport& report, const std::filesystem::path& path);
QualityReport read_report_json(const std::filesystem::path& path);
void write_report_csv(const VariantEvaluation& eval, const std::filesystem::path& path);
void write_comparison(const ComparisonTable& table, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path);

} // namespace lvse

#endif
