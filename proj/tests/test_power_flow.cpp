#include <doctest.h>

#include <complex>

#include "lvse/power_flow.hpp"
#include "test_support.hpp"

using namespace lvse;

TEST_CASE("ybus for a single per-unit line") {
    // Z_base = 400^2 / 160000 = 1 ohm, so 0.01+0.01j ohm is 0.01+0.01j pu
    GridTopology grid = test::two_bus_grid(0.01, 0.01);
    NetworkModel net(grid);
    const AdmittanceMatrix& y = net.ybus();
    REQUIRE(y.dimension == 2);
    CHECK(y.at(0, 0).real() == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(y.at(0, 0).imag() == doctest::Approx(-50.0).epsilon(1e-12));
    CHECK(y.at(0, 1).real() == doctest::Approx(-50.0).epsilon(1e-12));
    CHECK(y.at(0, 1).imag() == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(y.at(1, 1) == y.at(0, 0));
    CHECK(y.at(1, 0) == y.at(0, 1));
}

TEST_CASE("ybus of chain3: no direct entry between end buses, middle diagonal sums branches") {
    GridTopology grid = load_grid(test::fixture_dir() / "chain3");
    NetworkModel net(grid);
    int b1 = net.node_of("B1"), b2 = net.node_of("B2"), b3 = net.node_of("B3");
    CHECK(net.ybus().at(b1, b3) == Complex(0.0, 0.0));
    Complex y12 = -net.ybus().at(b1, b2);
    Complex y23 = -net.ybus().at(b2, b3);
    Complex diag = net.ybus().at(b2, b2);
    CHECK(diag.real() == doctest::Approx((y12 + y23).real()).epsilon(1e-12));
    CHECK(diag.imag() == doctest::Approx((y12 + y23).imag()).epsilon(1e-12));
}

TEST_CASE("no-load case solves to exactly flat voltages with zero currents") {
    GridTopology grid = test::two_bus_grid();
    NetworkModel net(grid);
    std::vector<NodePower> inj(net.node_count());
    PowerFlowSolution sol = solve_powerflow(net, inj);
    for (int i = 0; i < net.node_count(); ++i) {
        CHECK(sol.v_mag[i] == 1.0);
        CHECK(sol.v_ang[i] == 0.0);
    }
    for (const auto& f : sol.flows) {
        CHECK(f.i_from_pu == 0.0);
        CHECK(f.i_mag_a == 0.0);
    }
}

TEST_CASE("two-bus load case matches the Gauss-Seidel oracle to 1e-8") {
    GridTopology grid = test::two_bus_grid(0.01, 0.01);
    NetworkModel net(grid);
    std::vector<NodePower> inj(net.node_count());
    inj[net.node_of("B2")] = {-0.1, -0.05}; // load P = 0.1, Q = 0.05 pu

    PowerFlowSolution sol = solve_powerflow(net, inj);
    Eigen::VectorXcd oracle = test::gauss_seidel_oracle(net, inj, 1.0);

    int b2 = net.node_of("B2");
    Complex v2 = std::polar(sol.v_mag[b2], sol.v_ang[b2]);
    CHECK(std::abs(v2 - oracle[b2]) < 1e-8);
    CHECK(sol.max_mismatch_pu < 1e-8);
}

TEST_CASE("load beyond the maximum transferable power raises a solver error") {
    GridTopology grid = test::two_bus_grid(0.01, 0.01);
    NetworkModel net(grid);
    std::vector<NodePower> inj(net.node_count());
    inj[net.node_of("B2")] = {-100.0, 0.0};
    CHECK_THROWS_AS(solve_powerflow(net, inj), SolverError);
}

TEST_CASE("injection vector of the wrong size is rejected") {
    GridTopology grid = test::two_bus_grid();
    NetworkModel net(grid);
    CHECK_THROWS_AS(solve_powerflow(net, std::vector<NodePower>(5)), ValidationError);
}

TEST_CASE("timeseries over synth-rural: one week converges everywhere") {
    GridTopology grid = load_grid(test::fixture_dir() / "synth-rural");
    NetworkModel net(grid);
    TimeseriesResult result = run_timeseries(net, 0, 672, {}, 2);
    REQUIRE(result.steps.size() == 672);

    int max_iterations = 0;
    for (const auto& step : result.steps) {
        CHECK(step.max_mismatch_pu < 1e-8);
        max_iterations = std::max(max_iterations, step.iterations);
    }
    CHECK(max_iterations <= 25);
    // regression baseline: Newton-Raphson needs at most 4 iterations on this fixture
    CHECK(max_iterations <= 4);
}

TEST_CASE("timestep range beyond the profile horizon names the profile") {
    GridTopology grid = load_grid(test::fixture_dir() / "chain3");
    NetworkModel net(grid);
    CHECK_THROWS_WITH_AS(run_timeseries(net, 0, 200), doctest::Contains("covers 96 < 200"),
                         ValidationError);
}

TEST_CASE("conservation: slack injection balances loads and losses") {
    GridTopology grid = load_grid(test::fixture_dir() / "synth-rural");
    NetworkModel net(grid);
    for (std::size_t t : {0u, 77u, 300u, 671u}) {
        auto inj = injections_at(net, t);
        PowerFlowSolution sol = solve_powerflow(net, inj);

        double scheduled = 0.0; // net scheduled injection of all non-slack nodes
        for (int i = 0; i < net.node_count(); ++i)
            if (i != net.slack_node()) scheduled += inj[i].p_pu;
        double losses = 0.0;
        for (const auto& f : sol.flows) losses += f.p_from_pu + f.p_to_pu;
        double slack = sol.p_inj[net.slack_node()];
        CHECK(std::abs(slack + scheduled - losses) < 1e-6);
    }
}

TEST_CASE("pure consumption in a radial grid keeps voltages at or below the slack") {
    GridTopology grid = load_grid(test::fixture_dir() / "fourload");
    NetworkModel net(grid);
    // t = 76 lies in the evening peak of the household profiles
    auto inj = injections_at(net, 76);
    double total_load = 0.0;
    for (const auto& p : inj) total_load += p.p_pu;
    REQUIRE(total_load < 0.0);
    PowerFlowSolution sol = solve_powerflow(net, inj);
    for (int i = 0; i < net.node_count(); ++i)
        CHECK(sol.v_mag[i] <= sol.v_mag[net.slack_node()] + 1e-15);
}

TEST_CASE("per-unit and ampere conversion round-trips losslessly") {
    GridTopology grid = load_grid(test::fixture_dir() / "synth-rural");
    NetworkModel net(grid);
    auto sol = solve_powerflow(net, injections_at(net, 400));
    for (std::size_t bi = 0; bi < net.branches().size(); ++bi) {
        const Branch& br = net.branches()[bi];
        double forward = std::max(sol.flows[bi].i_from_pu, sol.flows[bi].i_to_pu);
        double amps = forward * br.i_base_a;
        CHECK(amps == sol.flows[bi].i_mag_a);
        if (forward > 0) CHECK(std::abs(amps / br.i_base_a - forward) / forward < 1e-12);
    }
}

TEST_CASE("power flow over a merged ideal coupling reports one voltage for both buses") {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B2", "B3", 0.01, 0.01, 100.0}};
    TransformerRecord trafo{"B1", "B2", 160000.0, 0.0, 0.0};
    ProfileLibrary profiles = test::flat_profile("PL", 4, 16.0, 5.0); // 0.1 + 0.03125j pu
    std::vector<Prosumer> prosumers = {
        {"P1", "B3", ProsumerCategory::other, 1000.0, 0.0, "PL"}};
    GridTopology grid(buses, lines, {}, prosumers, profiles, trafo, 160000.0, "merged");
    NetworkModel net(grid);

    auto sol = solve_powerflow(net, injections_at(net, 0));
    CHECK(sol.v_mag[net.node_of("B1")] == sol.v_mag[net.node_of("B2")]);
    CHECK(sol.v_mag[net.node_of("B3")] < 1.0);
    // the merged node balances the load plus losses
    Eigen::VectorXcd oracle = test::gauss_seidel_oracle(net, injections_at(net, 0), 1.0);
    CHECK(std::abs(std::polar(sol.v_mag[net.node_of("B3")], sol.v_ang[net.node_of("B3")]) -
                   oracle[net.node_of("B3")]) < 1e-8);
}

TEST_CASE("single-timestep series over an unloaded grid is one flat solution") {
    GridTopology grid = test::two_bus_grid(); // profile is all zero
    NetworkModel net(grid);
    TimeseriesResult result = run_timeseries(net, 0, 1);
    REQUIRE(result.steps.size() == 1);
    CHECK(result.steps[0].v_mag.minCoeff() == 1.0);
    CHECK(result.steps[0].v_mag.maxCoeff() == 1.0);
    CHECK(result.steps[0].iterations == 0);
}
