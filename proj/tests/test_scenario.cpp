#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lvse/scenario.hpp"
#include "test_support.hpp"

using namespace lvse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

std::string chain3_config(const std::string& out, int workers) {
    std::ostringstream cfg;
    cfg << "grid = " << (test::fixture_dir() / "chain3").string() << "\n"
        << "t_begin = 0\nt_end = 4\nmaster_seed = 7\nworkers = " << workers << "\n"
        << "out = " << out << "\n\n[variant 1]\nsubstation = none\n";
    return cfg.str();
}

} // namespace

TEST_CASE("scenario config parsing and validation") {
    SUBCASE("valid config with two variants") {
        auto path = write_config("lvse_cfg_ok.cfg",
                                 "grid = " + (test::fixture_dir() / "chain3").string() +
                                     "\nt_begin = 0\nt_end = 4\nmaster_seed = 3\n"
                                     "[variant 1]\nsubstation = none\n"
                                     "[variant 2]\nsubstation = digions\nseed = 55\n");
        ScenarioConfig cfg = load_scenario_config(path);
        REQUIRE(cfg.variants.size() == 2);
        CHECK(cfg.variants[0].substation == SubstationDevice::none);
        CHECK(cfg.variants[1].allocation_seed == 55);
        CHECK(cfg.master_seed == 3);
        // variant 1 got a derived seed, deterministically
        CHECK(cfg.variants[0].allocation_seed ==
              load_scenario_config(path).variants[0].allocation_seed);
    }
    SUBCASE("t_end must exceed t_begin") {
        auto path = write_config("lvse_cfg_t.cfg",
                                 "grid = " + (test::fixture_dir() / "chain3").string() +
                                     "\nt_begin = 4\nt_end = 4\n[variant 1]\n");
        CHECK_THROWS_AS(load_scenario_config(path), ValidationError);
    }
    SUBCASE("unknown keys are rejected") {
        auto path = write_config("lvse_cfg_k.cfg",
                                 "grid = " + (test::fixture_dir() / "chain3").string() +
                                     "\nt_end = 4\nbogus = 1\n[variant 1]\n");
        CHECK_THROWS_AS(load_scenario_config(path), ValidationError);
    }
    SUBCASE("missing grid directory is rejected") {
        auto path = write_config("lvse_cfg_g.cfg",
                                 "grid = /no/such/dir\nt_end = 4\n[variant 1]\n");
        CHECK_THROWS_AS(load_scenario_config(path), ValidationError);
    }
}

TEST_CASE("fingerprint is stable and sensitive to the config content") {
    auto path_a = write_config("lvse_fp_a.cfg", chain3_config("out_a", 1));
    auto path_b = write_config("lvse_fp_b.cfg", chain3_config("out_b", 2));
    ScenarioConfig a = load_scenario_config(path_a);
    ScenarioConfig b = load_scenario_config(path_b);
    CHECK(a.fingerprint() == b.fingerprint()); // out dir does not affect results

    b.master_seed += 1;
    CHECK(a.fingerprint() != b.fingerprint());
    b.master_seed -= 1;
    b.variants[0].ikvs_pct = 50.0;
    CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("chain3 reference run: sample counts follow elements x timesteps") {
    fs::path out = fs::temp_directory_path() / "lvse_chain3_run";
    fs::remove_all(out);
    auto path = write_config("lvse_cfg_run.cfg", chain3_config(out.string(), 1));
    ScenarioConfig cfg = load_scenario_config(path);
    RunArtifacts artifacts = run_scenario(cfg);

    REQUIRE(artifacts.outcomes.size() == 1);
    REQUIRE_FALSE(artifacts.outcomes[0].failed);
    const QualityReport& report = artifacts.outcomes[0].report;
    CHECK(report.voltage_sample_count == 3 * 4); // 3 buses x 4 timesteps
    CHECK(report.loading_sample_count == 2 * 4); // 2 lines x 4 timesteps
    CHECK(fs::exists(artifacts.outcomes[0].report_json));
    CHECK(fs::exists(artifacts.outcomes[0].report_csv));
    CHECK(fs::exists(out / "allocation_1.csv"));
    CHECK(report.se_nonconverged_steps == 0);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    fs::path out_a = fs::temp_directory_path() / "lvse_det_a";
    fs::path out_b = fs::temp_directory_path() / "lvse_det_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);

    std::ostringstream body;
    body << "grid = " << (test::fixture_dir() / "synth-rural").string() << "\n"
         << "t_begin = 0\nt_end = 16\nmaster_seed = 13\n"
         << "[variant 2]\nsubstation = digions\n[variant 5]\nimsys_pct = 11\n";

    ScenarioConfig cfg_a = load_scenario_config(write_config("lvse_det.cfg", body.str()));
    cfg_a.out_dir = out_a;
    cfg_a.workers = 1;
    ScenarioConfig cfg_b = cfg_a;
    cfg_b.out_dir = out_b;
    cfg_b.workers = 4;

    run_scenario(cfg_a);
    run_scenario(cfg_b);
    for (const char* name : {"report_2.json", "report_5.json", "report_2.csv", "report_5.csv",
                             "allocation_2.csv", "allocation_5.csv"})
        CHECK(slurp(out_a / name) == slurp(out_b / name));
}

TEST_CASE("variant comparison table orders by variant id and checks compatibility") {
    fs::path out = fs::temp_directory_path() / "lvse_cmp_run";
    fs::remove_all(out);
    std::ostringstream body;
    body << "grid = " << (test::fixture_dir() / "synth-rural").string() << "\n"
         << "t_begin = 0\nt_end = 8\nmaster_seed = 5\n"
         << "[variant b]\nsubstation = digions\n[variant a]\nikvs_pct = 100\n";
    ScenarioConfig cfg = load_scenario_config(write_config("lvse_cmp.cfg", body.str()));
    cfg.out_dir = out;
    RunArtifacts artifacts = run_scenario(cfg);
    REQUIRE(artifacts.outcomes.size() == 2);
    REQUIRE_FALSE(artifacts.any_failed);

    ComparisonTable table =
        compare_variants({out / "report_b.json", out / "report_a.json"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].variant_id == "a"); // ordered by id, not input order
    CHECK(table.rows[1].variant_id == "b");
    CHECK(table.rows[0].use_case_pass.count("grid_planning") == 1);

    write_comparison(table, out / "comparison.csv", out / "comparison.json");
    CHECK(fs::exists(out / "comparison.csv"));
    CHECK(fs::exists(out / "comparison.json"));

    SUBCASE("mixing grids is rejected") {
        fs::path other_out = fs::temp_directory_path() / "lvse_cmp_other";
        fs::remove_all(other_out);
        ScenarioConfig chain_cfg =
            load_scenario_config(write_config("lvse_cmp2.cfg", chain3_config(other_out.string(), 1)));
        run_scenario(chain_cfg);
        CHECK_THROWS_WITH_AS(
            compare_variants({out / "report_a.json", other_out / "report_1.json"}),
            doctest::Contains("mix"), ValidationError);
    }
    SUBCASE("fewer than two reports is rejected") {
        CHECK_THROWS_AS(compare_variants({out / "report_a.json"}), ValidationError);
    }
}

TEST_CASE("report json round-trips through the reader") {
    fs::path out = fs::temp_directory_path() / "lvse_rt_run";
    fs::remove_all(out);
    ScenarioConfig cfg = load_scenario_config(
        write_config("lvse_rt.cfg", chain3_config(out.string(), 1)));
    RunArtifacts artifacts = run_scenario(cfg);
    const QualityReport& original = artifacts.outcomes[0].report;
    QualityReport loaded = read_report_json(artifacts.outcomes[0].report_json);
    CHECK(loaded.grid_name == original.grid_name);
    CHECK(loaded.variant_id == original.variant_id);
    CHECK(loaded.voltage_q99 == original.voltage_q99);
    CHECK(loaded.loading_q95 == original.loading_q95);
    CHECK(loaded.voltage_sample_count == original.voltage_sample_count);
    CHECK(loaded.use_cases.size() == original.use_cases.size());
}

TEST_CASE("dump flags produce the optional artifacts") {
    fs::path out = fs::temp_directory_path() / "lvse_dump_run";
    fs::remove_all(out);
    ScenarioConfig cfg = load_scenario_config(
        write_config("lvse_dump.cfg", chain3_config(out.string(), 1)));
    cfg.dumps.truth = true;
    cfg.dumps.measurements = true;
    cfg.dumps.estimates = true;
    run_scenario(cfg);
    CHECK(fs::exists(out / "pf_truth.csv"));
    CHECK(fs::exists(out / "measurements_1.csv"));
    CHECK(fs::exists(out / "se_result_1.csv"));
    CHECK(fs::exists(out / "se_diag_1.csv"));
    CHECK(fs::exists(out / "run.log"));
}

TEST_CASE("a failing variant is isolated; the others still run") {
    fs::path out = fs::temp_directory_path() / "lvse_fail_run";
    fs::remove_all(out);
    ScenarioConfig cfg = load_scenario_config(
        write_config("lvse_fail.cfg", chain3_config(out.string(), 1)));
    // out-of-range percentage surfaces when the variant is expanded
    cfg.variants.push_back({"bad", SubstationDevice::none, 150.0, 0.0, 1});

    RunArtifacts artifacts = run_scenario(cfg);
    REQUIRE(artifacts.outcomes.size() == 2);
    CHECK_FALSE(artifacts.outcomes[0].failed);
    CHECK(fs::exists(artifacts.outcomes[0].report_json));
    CHECK(artifacts.outcomes[1].failed);
    CHECK(!artifacts.outcomes[1].error.empty());
    CHECK(artifacts.any_failed);
}

TEST_CASE("the samples dump lists one row per element and timestep") {
    fs::path out = fs::temp_directory_path() / "lvse_samples_run";
    fs::remove_all(out);
    ScenarioConfig cfg = load_scenario_config(
        write_config("lvse_samples.cfg", chain3_config(out.string(), 1)));
    cfg.dumps.samples = true;
    run_scenario(cfg);
    std::string dump = slurp(out / "samples_1.csv");
    // header + 12 voltage + 8 loading rows
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 1 + 12 + 8);
}

TEST_CASE("report json echoes the variant configuration") {
    fs::path out = fs::temp_directory_path() / "lvse_echo_run";
    fs::remove_all(out);
    ScenarioConfig cfg = load_scenario_config(
        write_config("lvse_echo.cfg", chain3_config(out.string(), 1)));
    cfg.variants[0].imsys_pct = 100.0;
    RunArtifacts artifacts = run_scenario(cfg);
    QualityReport loaded = read_report_json(artifacts.outcomes[0].report_json);
    CHECK(loaded.config_echo.at("substation") == "none");
    CHECK(loaded.config_echo.at("imsys_pct") == "100");
}

TEST_CASE("seeds parse as full 64-bit values") {
    auto path = write_config("lvse_seed.cfg",
                             "grid = " + (test::fixture_dir() / "chain3").string() +
                                 "\nt_end = 4\nmaster_seed = 18446744073709551615\n"
                                 "[variant 1]\nseed = 9007199254740993\n");
    ScenarioConfig cfg = load_scenario_config(path);
    CHECK(cfg.master_seed == 18446744073709551615ull);
    CHECK(cfg.variants[0].allocation_seed == 9007199254740993ull); // not representable in double
}

TEST_CASE("a grid with transformer impedance runs end to end; the coupling branch is no line") {
    // three buses, the MV/LV coupling modeled with its own series impedance
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B2", "B3", 0.05, 0.03, 120.0}};
    std::map<ProfileId, std::vector<ProfilePoint>> series;
    series["PL"] = std::vector<ProfilePoint>(8, ProfilePoint{3.0, 1.0});
    std::vector<Prosumer> prosumers = {
        {"P1", "B3", ProsumerCategory::household, 3000.0, 0.0, "PL"}};
    TransformerRecord trafo{"B1", "B2", 100000.0, 0.01, 0.04};
    GridTopology grid(buses, lines, {}, prosumers, ProfileLibrary(series), trafo, 100000.0,
                      "trafo-z");

    fs::path dir = fs::temp_directory_path() / "lvse_trafoz";
    fs::remove_all(dir);
    save_grid(grid, dir);

    ScenarioConfig cfg;
    cfg.grid_dir = dir;
    cfg.t_begin = 0;
    cfg.t_end = 8;
    cfg.master_seed = 3;
    cfg.out_dir = dir / "out";
    cfg.variants = {{"1", SubstationDevice::none, 0.0, 0.0, 1}};

    RunArtifacts artifacts = run_scenario(cfg);
    REQUIRE_FALSE(artifacts.any_failed);
    const QualityReport& report = artifacts.outcomes[0].report;
    CHECK(report.voltage_sample_count == 3 * 8);
    CHECK(report.loading_sample_count == 1 * 8); // only L1; the coupling branch is excluded
    CHECK(report.se_nonconverged_steps == 0);
}
