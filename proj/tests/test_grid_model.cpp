#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lvse/grid_model.hpp"
#include "test_support.hpp"

using namespace lvse;
namespace fs = std::filesystem;

TEST_CASE("chain3 fixture loads with one slack and one feeder") {
    GridTopology grid = load_grid(test::fixture_dir() / "chain3");
    CHECK(grid.buses().size() == 3);
    CHECK(grid.lines().size() == 2);
    CHECK(grid.prosumers().size() == 1);
    CHECK(grid.feeder_count() == 1);
    CHECK(grid.bus("B1").kind == BusKind::slack_coupling);
    CHECK(grid.feeder_of("B3") == 0);
}

TEST_CASE("synth-rural fixture: two feeders, cabinet feeder counts {3, 2}") {
    GridTopology grid = load_grid(test::fixture_dir() / "synth-rural");
    CHECK(grid.buses().size() == 20);
    CHECK(grid.cabinets().size() == 2);
    CHECK(grid.prosumers().size() == 18);
    CHECK(grid.feeder_count() == 2);
    CHECK(grid.cabinet("C1").feeder_lines.size() == 3);
    CHECK(grid.cabinet("C2").feeder_lines.size() == 2);
    // cabinet 1 hangs off the first feeder
    CHECK(grid.feeder_of(grid.cabinet("C1").busbar) == 0);
    CHECK(grid.feeder_of("B09") == 0);
    CHECK(grid.feeder_of("B20") == 1);
}

TEST_CASE("line referencing an unknown bus is rejected by name") {
    fs::path dir = fs::temp_directory_path() / "lvse_badgrid";
    fs::create_directories(dir);
    std::ofstream(dir / "buses.csv") << "id,kind,vn_volts\nB1,slack_coupling,400\n"
                                        "B2,substation_busbar,400\n";
    std::ofstream(dir / "lines.csv") << "id,from,to,r_ohm,x_ohm,i_max_a\nL1,B1,B99,0.1,0.1,100\n";
    std::ofstream(dir / "prosumers.csv") << "id,bus,category,annual_kwh,installed_kw,profile_id\n";
    std::ofstream(dir / "profiles.csv") << "profile_id,t_index,p_kw,q_kvar\n";
    std::ofstream(dir / "grid.csv") << "base_va,slack_bus,substation_busbar\n100000,B1,B2\n";

    CHECK_THROWS_WITH_AS(load_grid(dir), doctest::Contains("unknown bus B99"), ValidationError);
}

TEST_CASE("topology invariants are validated") {
    auto buses = [] {
        return std::vector<Bus>{{"B1", BusKind::slack_coupling, 400.0},
                                {"B2", BusKind::substation_busbar, 400.0}};
    };
    TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
    ProfileLibrary profiles = test::flat_profile("PL", 1, 0.0, 0.0);

    SUBCASE("zero-impedance line") {
        std::vector<Line> lines = {{"L1", "B1", "B2", 0.0, 0.0, 100.0}};
        CHECK_THROWS_AS(GridTopology(buses(), lines, {}, {}, profiles, trafo, 1e5),
                        ValidationError);
    }
    SUBCASE("self-loop line") {
        std::vector<Line> lines = {{"L1", "B1", "B1", 0.1, 0.1, 100.0}};
        CHECK_THROWS_AS(GridTopology(buses(), lines, {}, {}, profiles, trafo, 1e5),
                        ValidationError);
    }
    SUBCASE("duplicate bus id") {
        auto b = buses();
        b.push_back({"B1", BusKind::junction, 400.0});
        CHECK_THROWS_WITH_AS(
            GridTopology(b, {{"L1", "B1", "B2", 0.1, 0.1, 100.0}}, {}, {}, profiles, trafo, 1e5),
            doctest::Contains("duplicate bus id B1"), ValidationError);
    }
    SUBCASE("disconnected bus") {
        auto b = buses();
        b.push_back({"B3", BusKind::junction, 400.0});
        CHECK_THROWS_WITH_AS(
            GridTopology(b, {{"L1", "B1", "B2", 0.1, 0.1, 100.0}}, {}, {}, profiles, trafo, 1e5),
            doctest::Contains("disconnected"), ValidationError);
    }
    SUBCASE("two slack buses") {
        auto b = buses();
        b.push_back({"B3", BusKind::slack_coupling, 400.0});
        std::vector<Line> lines = {{"L1", "B1", "B2", 0.1, 0.1, 100.0},
                                   {"L2", "B2", "B3", 0.1, 0.1, 100.0}};
        CHECK_THROWS_AS(GridTopology(b, lines, {}, {}, profiles, trafo, 1e5), ValidationError);
    }
    SUBCASE("pv plant without installed power") {
        std::vector<Prosumer> prosumers = {
            {"P1", "B2", ProsumerCategory::pv_plant, 0.0, 0.0, "PL"}};
        CHECK_THROWS_AS(GridTopology(buses(), {{"L1", "B1", "B2", 0.1, 0.1, 100.0}}, {}, prosumers,
                                     profiles, trafo, 1e5),
                        ValidationError);
    }
    SUBCASE("missing profile reference") {
        std::vector<Prosumer> prosumers = {
            {"P1", "B2", ProsumerCategory::household, 1000.0, 0.0, "NOPE"}};
        CHECK_THROWS_WITH_AS(GridTopology(buses(), {{"L1", "B1", "B2", 0.1, 0.1, 100.0}}, {},
                                          prosumers, profiles, trafo, 1e5),
                             doctest::Contains("missing profile NOPE"), ValidationError);
    }
    SUBCASE("cabinet feeder line not incident to busbar") {
        auto b = buses();
        b.push_back({"B3", BusKind::cabinet_busbar, 400.0});
        std::vector<Line> lines = {{"L1", "B1", "B2", 0.1, 0.1, 100.0},
                                   {"L2", "B2", "B3", 0.1, 0.1, 100.0}};
        std::vector<CableCabinet> cabinets = {{"C1", "B3", {"L2"}}};
        CHECK_NOTHROW(GridTopology(b, lines, cabinets, {}, profiles, trafo, 1e5));
        cabinets[0].feeder_lines = {"L1"}; // L1 does not touch B3
        CHECK_THROWS_WITH_AS(GridTopology(b, lines, cabinets, {}, profiles, trafo, 1e5),
                             doctest::Contains("not incident"), ValidationError);
    }
}

TEST_CASE("electrical distance: identity, chain sum, parallel route") {
    SUBCASE("identity") {
        GridTopology grid = test::two_bus_grid();
        CHECK(grid.electrical_distance("B2", "B2") == 0.0);
    }
    SUBCASE("chain of two impedances") {
        std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                                  {"B2", BusKind::substation_busbar, 400.0},
                                  {"B3", BusKind::junction, 400.0}};
        std::vector<Line> lines = {{"L1", "B1", "B2", 0.1, 0.05, 100.0},
                                   {"L2", "B2", "B3", 0.2, 0.1, 100.0}};
        TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
        GridTopology grid(buses, lines, {}, {}, test::flat_profile("PL", 1, 0, 0), trafo, 1e5);
        CHECK(grid.electrical_distance("B1", "B3") == doctest::Approx(0.33541).epsilon(1e-4));
        CHECK(grid.electrical_distance("B1", "B3") ==
              doctest::Approx(test::exhaustive_distance(grid, "B1", "B3")).epsilon(1e-12));
    }
    SUBCASE("shorter two-hop route beats the direct edge") {
        std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                                  {"B2", BusKind::substation_busbar, 400.0},
                                  {"B3", BusKind::junction, 400.0}};
        // direct 0.5 ohm edge vs a 0.2 + 0.2 route
        std::vector<Line> lines = {{"L1", "B1", "B2", 0.5, 0.0, 100.0},
                                   {"L2", "B1", "B3", 0.2, 0.0, 100.0},
                                   {"L3", "B3", "B2", 0.2, 0.0, 100.0}};
        TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
        GridTopology grid(buses, lines, {}, {}, test::flat_profile("PL", 1, 0, 0), trafo, 1e5);
        CHECK(grid.electrical_distance("B1", "B2") == doctest::Approx(0.4).epsilon(1e-12));
    }
}

TEST_CASE("electrical distance is a metric, checked against the exhaustive oracle") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        int n = 3 + static_cast<int>(seed % 6); // up to 8 buses
        GridTopology grid = test::random_connected_grid(n, seed);
        for (int a = 0; a < n; ++a) {
            for (int b = a; b < n; ++b) {
                BusId ba = "N" + std::to_string(a);
                BusId bb = "N" + std::to_string(b);
                double d_ab = grid.electrical_distance(ba, bb);
                double d_ba = grid.electrical_distance(bb, ba);
                CHECK(d_ab == doctest::Approx(d_ba).epsilon(1e-12)); // symmetry
                CHECK(d_ab ==
                      doctest::Approx(test::exhaustive_distance(grid, ba, bb)).epsilon(1e-12));
                if (a == b) CHECK(d_ab == 0.0);
                else CHECK(d_ab > 0.0); // strictly positive impedances
                // triangle inequality through a third bus
                BusId bc = "N" + std::to_string((a + b) % n);
                CHECK(d_ab <= grid.electrical_distance(ba, bc) +
                                  grid.electrical_distance(bc, bb) + 1e-12);
            }
        }
    }
}

TEST_CASE("removing an unrelated line does not change distances off its path") {
    // star around B1: the B1-B5 spoke cannot influence distance(B2, B4)
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::junction, 400.0},
                              {"B4", BusKind::junction, 400.0},
                              {"B5", BusKind::junction, 400.0}};
    std::vector<Line> lines = {{"L1", "B1", "B2", 0.1, 0.0, 100.0},
                               {"L2", "B1", "B3", 0.2, 0.0, 100.0},
                               {"L3", "B1", "B4", 0.3, 0.0, 100.0},
                               {"L4", "B1", "B5", 0.4, 0.0, 100.0}};
    TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
    ProfileLibrary profiles = test::flat_profile("PL", 1, 0, 0);
    GridTopology with(buses, lines, {}, {}, profiles, trafo, 1e5);
    lines.pop_back();
    buses.pop_back();
    GridTopology without(buses, lines, {}, {}, profiles, trafo, 1e5);
    CHECK(with.electrical_distance("B2", "B4") ==
          doctest::Approx(without.electrical_distance("B2", "B4")).epsilon(1e-15));
}

TEST_CASE("feeder_of rejects the substation busbar and the slack coupling") {
    GridTopology grid = load_grid(test::fixture_dir() / "chain3");
    CHECK_THROWS_AS(grid.feeder_of("B2"), ValidationError);
    CHECK_THROWS_AS(grid.feeder_of("B1"), ValidationError);
}

TEST_CASE("save and reload round-trips the topology") {
    GridTopology grid = load_grid(test::fixture_dir() / "synth-rural");
    fs::path dir = fs::temp_directory_path() / "lvse_roundtrip";
    fs::remove_all(dir);
    save_grid(grid, dir);
    GridTopology reloaded = load_grid(dir);

    REQUIRE(reloaded.buses().size() == grid.buses().size());
    REQUIRE(reloaded.lines().size() == grid.lines().size());
    REQUIRE(reloaded.prosumers().size() == grid.prosumers().size());
    for (std::size_t i = 0; i < grid.buses().size(); ++i) {
        CHECK(reloaded.buses()[i].id == grid.buses()[i].id);
        CHECK(reloaded.buses()[i].kind == grid.buses()[i].kind);
        CHECK(reloaded.buses()[i].nominal_voltage_v == grid.buses()[i].nominal_voltage_v);
    }
    for (std::size_t i = 0; i < grid.lines().size(); ++i) {
        CHECK(reloaded.lines()[i].id == grid.lines()[i].id);
        CHECK(reloaded.lines()[i].resistance_ohm == grid.lines()[i].resistance_ohm);
        CHECK(reloaded.lines()[i].reactance_ohm == grid.lines()[i].reactance_ohm);
        CHECK(reloaded.lines()[i].thermal_limit_a == grid.lines()[i].thermal_limit_a);
    }
    for (std::size_t i = 0; i < grid.prosumers().size(); ++i) {
        CHECK(reloaded.prosumers()[i].id == grid.prosumers()[i].id);
        CHECK(reloaded.prosumers()[i].annual_energy_kwh == grid.prosumers()[i].annual_energy_kwh);
    }
    const auto& original = grid.profiles().all();
    const auto& copy = reloaded.profiles().all();
    REQUIRE(original.size() == copy.size());
    for (const auto& [id, series] : original) {
        const auto& other = copy.at(id);
        REQUIRE(other.size() == series.size());
        for (std::size_t t = 0; t < series.size(); ++t) {
            CHECK(other[t].p_kw == series[t].p_kw);
            CHECK(other[t].q_kvar == series[t].q_kvar);
        }
    }
}

TEST_CASE("ideal transformer link merges the coupling buses into one node") {
    // no line joins B1 and B2; the transformer record provides the link
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B2", "B3", 0.08, 0.06, 100.0}};
    TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
    GridTopology grid(buses, lines, {}, {}, test::flat_profile("PL", 4, 0, 0), trafo, 1e5);

    CHECK(grid.coupling_merged());
    CHECK(grid.electrical_distance("B1", "B2") == 0.0);
    CHECK(grid.electrical_distance("B1", "B3") == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(grid.feeder_of("B3") == 0);

    NetworkModel net(grid);
    CHECK(net.node_count() == 2);
    CHECK(net.node_of("B1") == net.node_of("B2"));
    CHECK(net.branches().size() == 1);
}

TEST_CASE("transformer with series impedance becomes its own branch") {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B2", "B3", 0.08, 0.06, 100.0}};
    TransformerRecord trafo{"B1", "B2", 1e5, 0.012, 0.016};
    GridTopology grid(buses, lines, {}, {}, test::flat_profile("PL", 4, 0, 0), trafo, 1e5);

    CHECK_FALSE(grid.coupling_merged());
    CHECK(grid.electrical_distance("B1", "B2") == doctest::Approx(0.02).epsilon(1e-12));

    NetworkModel net(grid);
    CHECK(net.node_count() == 3);
    REQUIRE(net.branches().size() == 2);
    int trafo_branches = 0;
    for (const auto& b : net.branches())
        if (b.is_transformer) {
            ++trafo_branches;
            CHECK(b.thermal_limit_a == 0.0);
            CHECK(b.line_id.empty());
        }
    CHECK(trafo_branches == 1);
}

TEST_CASE("lines across different nominal voltages are rejected") {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 10000.0},
                              {"B2", BusKind::substation_busbar, 400.0}};
    std::vector<Line> lines = {{"L1", "B1", "B2", 0.1, 0.1, 100.0}};
    TransformerRecord trafo{"B1", "B2", 1e5, 0.0, 0.0};
    CHECK_THROWS_WITH_AS(
        GridTopology(buses, lines, {}, {}, test::flat_profile("PL", 1, 0, 0), trafo, 1e5),
        doctest::Contains("nominal voltages differ"), ValidationError);
}
