#include "lvse/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lvse/csv.hpp"
#include "lvse/rng.hpp"

namespace lvse {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double to_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + ": '" + value + "' is not a number");
    }
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + ": '" + value +
                              "' is not an unsigned integer");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config key " + key + ": '" + value + "' is not a boolean");
}

std::string canonical_config_text(const ScenarioConfig& c) {
    std::ostringstream out;
    out << "grid=" << c.grid_dir.string() << "\n";
    out << "t_begin=" << c.t_begin << "\nt_end=" << c.t_end << "\n";
    out << "master_seed=" << c.master_seed << "\n";
    out << "slack_v_pu=" << csv::format_number(c.power_flow.slack_voltage_pu) << "\n";
    out << "pf_tol_pu=" << csv::format_number(c.power_flow.tolerance_pu) << "\n";
    out << "pf_max_iter=" << c.power_flow.max_iterations << "\n";
    out << "wls_step_tol=" << csv::format_number(c.wls.step_tolerance) << "\n";
    out << "wls_grad_tol=" << csv::format_number(c.wls.gradient_tolerance) << "\n";
    out << "wls_max_iter=" << c.wls.max_iterations << "\n";
    out << "cos_phi=" << csv::format_number(c.pseudo.cos_phi) << "\n";
    out << "sigma_load_rel_pct=" << csv::format_number(c.pseudo.sigma_load_rel_pct) << "\n";
    out << "sigma_pv_rel_pct=" << csv::format_number(c.pseudo.sigma_pv_rel_pct) << "\n";
    out << "sigma_floor_frac_of_mean=" << csv::format_number(c.pseudo.sigma_floor_frac_of_mean)
        << "\n";
    out << "sigma_slack_v_rel_pct=" << csv::format_number(c.pseudo.sigma_slack_v_rel_pct) << "\n";
    out << "clamp_noise=" << (c.pseudo.clamp_noise ? "true" : "false") << "\n";
    out << "h0_profile=" << c.pseudo.h0_profile << "\n";
    out << "pv_reference=" << c.pseudo.pv_reference << "\n";
    for (const auto& v : c.variants)
        out << "variant=" << v.id << "|" << to_string(v.substation) << "|"
            << csv::format_number(v.ikvs_pct) << "|" << csv::format_number(v.imsys_pct) << "|"
            << v.allocation_seed << "\n";
    return out.str();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::string ScenarioConfig::fingerprint() const {
    return hex64(RngStream::hash_string(canonical_config_text(*this)));
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());

    ScenarioConfig cfg;
    bool have_t_end = false;
    EquipmentVariant* current = nullptr;
    std::vector<std::pair<std::string, bool>> variant_seed_given; // (id, explicit seed)

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;

        if (text.front() == '[') {
            if (text.back() != ']')
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": malformed section header");
            std::string section = trim(text.substr(1, text.size() - 2));
            if (section.rfind("variant", 0) != 0)
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": unknown section '" + section + "'");
            EquipmentVariant v;
            v.id = trim(section.substr(7));
            if (v.id.empty())
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": variant section needs an id");
            cfg.variants.push_back(std::move(v));
            current = &cfg.variants.back();
            variant_seed_given.emplace_back(current->id, false);
            continue;
        }

        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));

        if (current) {
            if (key == "substation") current->substation = substation_device_from_string(value);
            else if (key == "ikvs_pct") current->ikvs_pct = to_number(key, value);
            else if (key == "imsys_pct") current->imsys_pct = to_number(key, value);
            else if (key == "seed") {
                current->allocation_seed = to_seed(key, value);
                variant_seed_given.back().second = true;
            } else
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": unknown variant key '" + key + "'");
            continue;
        }

        if (key == "grid") cfg.grid_dir = value;
        else if (key == "t_begin") cfg.t_begin = static_cast<std::size_t>(to_number(key, value));
        else if (key == "t_end") {
            cfg.t_end = static_cast<std::size_t>(to_number(key, value));
            have_t_end = true;
        } else if (key == "master_seed")
            cfg.master_seed = to_seed(key, value);
        else if (key == "workers") cfg.workers = static_cast<int>(to_number(key, value));
        else if (key == "out") cfg.out_dir = value;
        else if (key == "slack_v_pu") cfg.power_flow.slack_voltage_pu = to_number(key, value);
        else if (key == "pf_tol_pu") cfg.power_flow.tolerance_pu = to_number(key, value);
        else if (key == "pf_max_iter")
            cfg.power_flow.max_iterations = static_cast<int>(to_number(key, value));
        else if (key == "wls_step_tol") cfg.wls.step_tolerance = to_number(key, value);
        else if (key == "wls_grad_tol") cfg.wls.gradient_tolerance = to_number(key, value);
        else if (key == "wls_max_iter")
            cfg.wls.max_iterations = static_cast<int>(to_number(key, value));
        else if (key == "cos_phi") cfg.pseudo.cos_phi = to_number(key, value);
        else if (key == "sigma_load_rel_pct") cfg.pseudo.sigma_load_rel_pct = to_number(key, value);
        else if (key == "sigma_pv_rel_pct") cfg.pseudo.sigma_pv_rel_pct = to_number(key, value);
        else if (key == "sigma_floor_frac_of_mean")
            cfg.pseudo.sigma_floor_frac_of_mean = to_number(key, value);
        else if (key == "sigma_slack_v_rel_pct")
            cfg.pseudo.sigma_slack_v_rel_pct = to_number(key, value);
        else if (key == "clamp_noise") cfg.pseudo.clamp_noise = to_bool(key, value);
        else if (key == "h0_profile") cfg.pseudo.h0_profile = value;
        else if (key == "pv_reference") cfg.pseudo.pv_reference = value;
        else if (key == "dump") {
            for (const auto& part : csv::split(value, ',')) {
                if (part == "truth") cfg.dumps.truth = true;
                else if (part == "measurements") cfg.dumps.measurements = true;
                else if (part == "estimates") cfg.dumps.estimates = true;
                else if (part == "samples") cfg.dumps.samples = true;
                else if (!part.empty())
                    throw ValidationError("unknown dump kind '" + part + "'");
            }
        } else
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }

    if (cfg.grid_dir.empty()) throw ValidationError(path.string() + ": missing 'grid'");
    if (!have_t_end || cfg.t_end <= cfg.t_begin)
        throw ValidationError(path.string() + ": t_end must be greater than t_begin");
    if (cfg.variants.empty()) throw ValidationError(path.string() + ": no [variant] sections");
    if (cfg.workers < 1) throw ValidationError(path.string() + ": workers must be >= 1");

    // config-relative grid path
    if (cfg.grid_dir.is_relative()) {
        auto resolved = path.parent_path() / cfg.grid_dir;
        if (std::filesystem::exists(resolved)) cfg.grid_dir = resolved;
    }
    if (!std::filesystem::exists(cfg.grid_dir))
        throw ValidationError("grid directory " + cfg.grid_dir.string() + " does not exist");

    // variants without an explicit seed derive one from the master seed
    for (std::size_t i = 0; i < cfg.variants.size(); ++i)
        if (!variant_seed_given[i].second)
            cfg.variants[i].allocation_seed = RngStream::mix(cfg.master_seed, i + 1);

    return cfg;
}

VariantEvaluation evaluate_variant(const NetworkModel& net, const TimeseriesResult& truth,
                                   const EquipmentVariant& variant, const ScenarioConfig& config) {
    const GridTopology& grid = net.grid();
    auto specs = expand_to_specs(grid, variant);

    std::size_t count = truth.steps.size();
    struct StepResult {
        std::vector<double> voltage;  // per bus
        std::vector<double> loading;  // per non-transformer branch
        WlsSolution solution;
        std::string error;
    };
    std::vector<StepResult> steps(count);

    std::vector<std::size_t> line_branches;
    for (std::size_t bi = 0; bi < net.branches().size(); ++bi)
        if (!net.branches()[bi].is_transformer) line_branches.push_back(bi);

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < count; k += stride) {
            std::size_t t = truth.t_begin + k;
            StepResult& out = steps[k];
            try {
                auto measurements = assemble_measurement_vector(net, specs, truth.steps[k],
                                                                config.pseudo, config.master_seed,
                                                                t);
                auto model = MeasurementModel::build(net, measurements);
                out.solution = wls_solve(model, StateVector::flat_start(net), config.wls);
                auto estimated = derive_estimated_flows(net, out.solution.state);

                out.voltage.reserve(grid.buses().size());
                for (const auto& b : grid.buses()) {
                    int node = net.node_of(b.id);
                    out.voltage.push_back(voltage_quality(estimated.v_mag[node],
                                                          truth.steps[k].v_mag[node]));
                }
                out.loading.reserve(line_branches.size());
                for (std::size_t bi : line_branches) {
                    const Branch& br = net.branches()[bi];
                    out.loading.push_back(loading_quality(estimated.flows[bi].i_mag_a,
                                                          truth.steps[k].flows[bi].i_mag_a,
                                                          br.thermal_limit_a));
                }
            } catch (const Error& e) {
                out.error = e.what();
            }
        }
    };

    int thread_count = std::max(1, config.workers);
    if (thread_count == 1 || count == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < thread_count; ++w)
            pool.emplace_back(work, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(thread_count));
        for (auto& th : pool) th.join();
    }

    for (std::size_t k = 0; k < count; ++k)
        if (!steps[k].error.empty())
            throw SolverError("timestep " + std::to_string(truth.t_begin + k) + ": " +
                              steps[k].error);

    VariantEvaluation eval;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t t = truth.t_begin + k;
        for (std::size_t bi = 0; bi < grid.buses().size(); ++bi)
            eval.voltage_samples.push_back(
                {grid.buses()[bi].id, t, QualityKind::voltage, steps[k].voltage[bi]});
        for (std::size_t li = 0; li < line_branches.size(); ++li)
            eval.loading_samples.push_back({net.branches()[line_branches[li]].line_id, t,
                                            QualityKind::line_loading, steps[k].loading[li]});
        eval.solutions.push_back(std::move(steps[k].solution));
    }

    eval.report = assess(eval.voltage_samples, eval.loading_samples, config.thresholds);
    eval.report.grid_name = grid.name();
    eval.report.variant_id = variant.id;
    eval.report.config_echo["substation"] = to_string(variant.substation);
    eval.report.config_echo["ikvs_pct"] = csv::format_number(variant.ikvs_pct);
    eval.report.config_echo["imsys_pct"] = csv::format_number(variant.imsys_pct);
    eval.report.config_echo["allocation_seed"] = std::to_string(variant.allocation_seed);
    eval.report.master_seed = config.master_seed;
    eval.report.t_begin = truth.t_begin;
    eval.report.t_end = truth.t_end;
    for (const auto& sol : eval.solutions) {
        if (!sol.converged) ++eval.report.se_nonconverged_steps;
        eval.report.se_max_objective = std::max(eval.report.se_max_objective, sol.objective);
    }
    for (const auto& step : truth.steps)
        eval.report.pf_max_iterations = std::max(eval.report.pf_max_iterations, step.iterations);
    return eval;
}

namespace {

ordered_json report_to_json(const QualityReport& r) {
    ordered_json j;
    j["grid"] = r.grid_name;
    j["variant"] = r.variant_id;
    j["t_begin"] = r.t_begin;
    j["t_end"] = r.t_end;
    j["master_seed"] = r.master_seed;
    j["fingerprint"] = r.config_fingerprint;
    ordered_json echo;
    for (const auto& [key, value] : r.config_echo) echo[key] = value;
    j["config"] = echo;
    j["quantiles"] = {{"voltage_q99", r.voltage_q99}, {"loading_q95", r.loading_q95}};
    j["samples"] = {{"voltage", r.voltage_sample_count}, {"loading", r.loading_sample_count}};
    ordered_json cases;
    for (const auto& [name, verdict] : r.use_cases)
        cases[name] = {{"pass", verdict.pass},
                       {"voltage_limit", verdict.voltage_limit},
                       {"loading_limit", verdict.loading_limit}};
    j["use_cases"] = cases;
    j["diagnostics"] = {{"se_nonconverged_steps", r.se_nonconverged_steps},
                        {"se_max_objective", r.se_max_objective},
                        {"pf_max_iterations", r.pf_max_iterations}};
    return j;
}

} // namespace

void write_report_json(const QualityReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << report_to_json(report).dump(2) << "\n";
}

QualityReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
    QualityReport r;
    try {
        r.grid_name = j.at("grid").get<std::string>();
        r.variant_id = j.at("variant").get<std::string>();
        r.t_begin = j.at("t_begin").get<std::size_t>();
        r.t_end = j.at("t_end").get<std::size_t>();
        r.master_seed = j.at("master_seed").get<std::uint64_t>();
        r.config_fingerprint = j.value("fingerprint", "");
        if (j.contains("config"))
            for (const auto& [key, value] : j.at("config").items())
                r.config_echo[key] = value.get<std::string>();
        r.voltage_q99 = j.at("quantiles").at("voltage_q99").get<double>();
        r.loading_q95 = j.at("quantiles").at("loading_q95").get<double>();
        r.voltage_sample_count = j.at("samples").at("voltage").get<std::size_t>();
        r.loading_sample_count = j.at("samples").at("loading").get<std::size_t>();
        for (const auto& [name, v] : j.at("use_cases").items()) {
            UseCaseVerdict verdict;
            verdict.pass = v.at("pass").get<bool>();
            verdict.voltage_limit = v.at("voltage_limit").get<double>();
            verdict.loading_limit = v.at("loading_limit").get<double>();
            r.use_cases[name] = verdict;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": unexpected report schema: " + e.what());
    }
    return r;
}

void write_report_csv(const VariantEvaluation& eval, const std::filesystem::path& path) {
    // per-element quantiles for drill-down
    std::map<std::string, std::vector<double>> voltage, loading;
    for (const auto& s : eval.voltage_samples) voltage[s.element].push_back(s.value);
    for (const auto& s : eval.loading_samples) loading[s.element].push_back(s.value);

    std::vector<std::vector<std::string>> rows;
    for (const auto& [element, samples] : voltage)
        rows.push_back({element, "voltage", "q99",
                        csv::format_number(pooled_quantile(samples, 0.99)),
                        std::to_string(samples.size())});
    for (const auto& [element, samples] : loading)
        rows.push_back({element, "line_loading", "q95",
                        csv::format_number(pooled_quantile(samples, 0.95)),
                        std::to_string(samples.size())});
    csv::write_file(path, {"element", "kind", "quantile", "value", "samples"}, rows);
}

namespace {

void dump_estimates_csv(const NetworkModel& net, const TimeseriesResult& truth,
                        const VariantEvaluation& eval, const std::filesystem::path& path,
                        const std::filesystem::path& diag_path) {
    std::vector<std::vector<std::string>> rows;
    const GridTopology& grid = net.grid();
    for (std::size_t k = 0; k < eval.solutions.size(); ++k) {
        std::string t = std::to_string(truth.t_begin + k);
        auto estimated = derive_estimated_flows(net, eval.solutions[k].state);
        for (const auto& b : grid.buses()) {
            int node = net.node_of(b.id);
            rows.push_back({t, b.id, "v_mag_pu", csv::format_number(estimated.v_mag[node])});
            rows.push_back({t, b.id, "v_ang_rad", csv::format_number(estimated.v_ang[node])});
        }
        for (std::size_t bi = 0; bi < net.branches().size(); ++bi) {
            const auto& br = net.branches()[bi];
            if (br.is_transformer) continue;
            rows.push_back(
                {t, br.line_id, "i_mag_a", csv::format_number(estimated.flows[bi].i_mag_a)});
        }
    }
    csv::write_file(path, {"t", "element", "quantity", "estimate"}, rows);

    std::vector<std::vector<std::string>> diag;
    for (std::size_t k = 0; k < eval.solutions.size(); ++k) {
        const auto& sol = eval.solutions[k];
        diag.push_back({std::to_string(truth.t_begin + k), csv::format_number(sol.objective),
                        std::to_string(sol.iterations), sol.converged ? "1" : "0"});
    }
    csv::write_file(diag_path, {"t", "objective", "iterations", "converged"}, diag);
}

} // namespace

RunArtifacts run_scenario(const ScenarioConfig& config) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;

    RunArtifacts artifacts;
    artifacts.out_dir = config.out_dir;
    fs::create_directories(config.out_dir);
    std::ofstream log(config.out_dir / "run.log");
    auto log_stage = [&](const std::string& stage, clock::time_point since) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - since);
        log << stage << ": " << ms.count() << " ms\n";
    };

    std::string fingerprint = config.fingerprint();
    log << "config fingerprint " << fingerprint << "\n";

    auto t0 = clock::now();
    GridTopology grid = load_grid(config.grid_dir);
    NetworkModel net(grid);
    log_stage("load_grid", t0);

    // ground truth is variant-independent: computed once, shared
    t0 = clock::now();
    TimeseriesResult truth =
        run_timeseries(net, config.t_begin, config.t_end, config.power_flow, config.workers);
    log_stage("power_flow (" + std::to_string(truth.steps.size()) + " steps)", t0);

    if (config.dumps.truth) dump_truth_csv(net, truth, config.out_dir / "pf_truth.csv");

    for (const auto& variant : config.variants) {
        VariantOutcome outcome;
        outcome.variant_id = variant.id;
        t0 = clock::now();
        try {
            VariantEvaluation eval = evaluate_variant(net, truth, variant, config);
            eval.report.config_fingerprint = fingerprint;

            outcome.report = eval.report;
            outcome.report_json = config.out_dir / ("report_" + variant.id + ".json");
            outcome.report_csv = config.out_dir / ("report_" + variant.id + ".csv");
            write_report_json(eval.report, outcome.report_json);
            write_report_csv(eval, outcome.report_csv);
            dump_allocation_csv(grid, variant,
                                config.out_dir / ("allocation_" + variant.id + ".csv"));

            if (config.dumps.measurements) {
                auto specs = expand_to_specs(grid, variant);
                std::vector<std::vector<Measurement>> per_t;
                per_t.reserve(truth.steps.size());
                for (std::size_t k = 0; k < truth.steps.size(); ++k)
                    per_t.push_back(assemble_measurement_vector(net, specs, truth.steps[k],
                                                                config.pseudo, config.master_seed,
                                                                truth.t_begin + k));
                dump_measurements_csv(per_t, truth.t_begin,
                                      config.out_dir / ("measurements_" + variant.id + ".csv"));
            }
            if (config.dumps.estimates)
                dump_estimates_csv(net, truth, eval,
                                   config.out_dir / ("se_result_" + variant.id + ".csv"),
                                   config.out_dir / ("se_diag_" + variant.id + ".csv"));
            if (config.dumps.samples) {
                std::vector<std::vector<std::string>> rows;
                for (const auto& sample : eval.voltage_samples)
                    rows.push_back({std::to_string(sample.timestep), sample.element, "voltage",
                                    csv::format_number(sample.value)});
                for (const auto& sample : eval.loading_samples)
                    rows.push_back({std::to_string(sample.timestep), sample.element,
                                    "line_loading", csv::format_number(sample.value)});
                csv::write_file(config.out_dir / ("samples_" + variant.id + ".csv"),
                                {"t", "element", "kind", "value"}, rows);
            }
            log_stage("variant " + variant.id, t0);
        } catch (const Error& e) {
            outcome.failed = true;
            outcome.error = e.what();
            artifacts.any_failed = true;
            log << "variant " << variant.id << " FAILED: " << e.what() << "\n";
        }
        artifacts.outcomes.push_back(std::move(outcome));
    }
    return artifacts;
}

ComparisonTable compare_variants(const std::vector<std::filesystem::path>& report_files) {
    if (report_files.size() < 2)
        throw ValidationError("comparison needs at least two reports");

    ComparisonTable table;
    std::vector<QualityReport> reports;
    for (const auto& path : report_files) reports.push_back(read_report_json(path));

    table.grid_name = reports.front().grid_name;
    table.t_begin = reports.front().t_begin;
    table.t_end = reports.front().t_end;
    for (const auto& r : reports) {
        if (r.grid_name != table.grid_name)
            throw ValidationError("reports mix grids '" + table.grid_name + "' and '" +
                                  r.grid_name + "'");
        if (r.t_begin != table.t_begin || r.t_end != table.t_end)
            throw ValidationError("reports cover different timestep ranges");
        ComparisonRow row;
        row.variant_id = r.variant_id;
        row.voltage_q99 = r.voltage_q99;
        row.loading_q95 = r.loading_q95;
        for (const auto& [name, verdict] : r.use_cases) row.use_case_pass[name] = verdict.pass;
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const ComparisonRow& a, const ComparisonRow& b) {
                  return a.variant_id < b.variant_id;
              });
    return table;
}

void write_comparison(const ComparisonTable& table, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path) {
    std::vector<std::string> header = {"variant", "voltage_q99", "loading_q95"};
    std::vector<std::string> case_names;
    if (!table.rows.empty())
        for (const auto& [name, pass] : table.rows.front().use_case_pass) {
            header.push_back(name);
            case_names.push_back(name);
        }
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows) {
        std::vector<std::string> row = {r.variant_id, csv::format_number(r.voltage_q99),
                                        csv::format_number(r.loading_q95)};
        for (const auto& name : case_names)
            row.push_back(r.use_case_pass.at(name) ? "pass" : "fail");
        rows.push_back(std::move(row));
    }
    csv::write_file(csv_path, header, rows);

    ordered_json j;
    j["grid"] = table.grid_name;
    j["t_begin"] = table.t_begin;
    j["t_end"] = table.t_end;
    j["rows"] = ordered_json::array();
    for (const auto& r : table.rows) {
        ordered_json row;
        row["variant"] = r.variant_id;
        row["voltage_q99"] = r.voltage_q99;
        row["loading_q95"] = r.loading_q95;
        for (const auto& [name, pass] : r.use_case_pass) row[name] = pass;
        j["rows"].push_back(row);
    }
    std::ofstream out(json_path);
    if (!out) throw Error("cannot write " + json_path.string());
    out << j.dump(2) << "\n";
}

} // namespace lvse
