#ifndef LVSE_TEST_SUPPORT_HPP
#define LVSE_TEST_SUPPORT_HPP

#include <complex>
#include <filesystem>
#include <map>
#include <vector>

#include "lvse/grid_model.hpp"
#include "lvse/network.hpp"
#include "lvse/power_flow.hpp"
#include "lvse/rng.hpp"

namespace lvse::test {

inline std::filesystem::path fixture_dir() { return LVSE_FIXTURE_DIR; }

inline ProfileLibrary flat_profile(const ProfileId& id, std::size_t steps, double p_kw,
                                   double q_kvar) {
    std::map<ProfileId, std::vector<ProfilePoint>> series;
    series[id] = std::vector<ProfilePoint>(steps, ProfilePoint{p_kw, q_kvar});
    return ProfileLibrary(series);
}

// Two buses joined by one line; bases chosen so Z_base = 1 ohm, i.e. ohm
// values are also per-unit values. Optional load prosumer at B2.
inline GridTopology two_bus_grid(double r_ohm = 0.01, double x_ohm = 0.01, double load_kw = 0.0,
                                 double load_kvar = 0.0) {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0}};
    std::vector<Line> lines = {{"L1", "B1", "B2", r_ohm, x_ohm, 500.0}};
    std::vector<Prosumer> prosumers;
    ProfileLibrary profiles = flat_profile("PL", 4, load_kw, load_kvar);
    if (load_kw != 0.0 || load_kvar != 0.0)
        prosumers.push_back({"P1", "B2", ProsumerCategory::other, 1000.0, 0.0, "PL"});
    TransformerRecord trafo{"B1", "B2", 160000.0, 0.0, 0.0};
    return GridTopology(buses, lines, {}, prosumers, profiles, trafo, 160000.0, "two-bus");
}

// Independent fixed-point oracle for the power flow: Gauss-Seidel on the
// complex nodal equations, run to a much tighter tolerance than the solver
// under test. Injections are net per node, generation positive.
inline Eigen::VectorXcd gauss_seidel_oracle(const NetworkModel& net,
                                            const std::vector<NodePower>& injections,
                                            double slack_v, double tol = 1e-12,
                                            int max_iter = 200000) {
    int n = net.node_count();
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, Complex(1.0, 0.0));
    v[net.slack_node()] = Complex(slack_v, 0.0);
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    const auto& sparse = net.ybus().matrix;
    for (int col = 0; col < sparse.outerSize(); ++col)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(sparse, col); it; ++it)
            y(it.row(), it.col()) = it.value();

    for (int iter = 0; iter < max_iter; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == net.slack_node()) continue;
            Complex s(injections[i].p_pu, injections[i].q_pu);
            Complex sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += y(i, j) * v[j];
            Complex next = (std::conj(s / v[i]) - sum) / y(i, i);
            worst = std::max(worst, std::abs(next - v[i]));
            v[i] = next;
        }
        if (worst < tol) return v;
    }
    throw std::runtime_error("Gauss-Seidel oracle did not converge");
}

// Exhaustive shortest-path oracle over all simple paths (grids of at most
// ~8 buses).
inline double exhaustive_distance(const GridTopology& grid, const BusId& from, const BusId& to) {
    struct Edge {
        BusId a, b;
        double w;
    };
    std::vector<Edge> edges;
    for (const auto& l : grid.lines())
        edges.push_back({l.from_bus, l.to_bus, l.impedance_magnitude_ohm()});
    const auto& trafo = grid.transformer();
    double trafo_w = std::hypot(trafo.series_r_ohm, trafo.series_x_ohm);
    if (grid.coupling_merged() || trafo_w != 0.0)
        edges.push_back({trafo.slack_bus, trafo.substation_busbar, trafo_w});

    double best = std::numeric_limits<double>::infinity();
    std::vector<BusId> visited{from};
    auto dfs = [&](auto&& self, const BusId& at, double cost) -> void {
        if (cost >= best) return;
        if (at == to) {
            best = cost;
            return;
        }
        for (const auto& e : edges) {
            BusId next;
            if (e.a == at) next = e.b;
            else if (e.b == at) next = e.a;
            else continue;
            bool seen = false;
            for (const auto& b : visited)
                if (b == next) seen = true;
            if (seen) continue;
            visited.push_back(next);
            self(self, next, cost + e.w);
            visited.pop_back();
        }
    };
    dfs(dfs, from, 0.0);
    return best;
}

// Random connected grid over n buses (n >= 2): a random spanning tree plus a
// few extra edges, strictly positive impedances. Bus 0 is the slack, bus 1
// the substation busbar, joined directly by a line.
inline GridTopology random_connected_grid(int n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) {
        BusKind kind = i == 0   ? BusKind::slack_coupling
                       : i == 1 ? BusKind::substation_busbar
                                : BusKind::junction;
        buses.push_back({"N" + std::to_string(i), kind, 400.0});
    }
    std::vector<Line> lines;
    int line_no = 0;
    auto add_line = [&](int a, int b) {
        double r = 0.05 + 0.4 * rng.next_double();
        double x = 0.02 + 0.3 * rng.next_double();
        lines.push_back({"E" + std::to_string(line_no++), "N" + std::to_string(a),
                         "N" + std::to_string(b), r, x, 200.0});
    };
    add_line(0, 1);
    for (int i = 2; i < n; ++i) add_line(static_cast<int>(rng.next_below(i)), i);
    int extras = static_cast<int>(rng.next_below(3));
    for (int e = 0; e < extras && n > 2; ++e) {
        int a = static_cast<int>(rng.next_below(n));
        int b = static_cast<int>(rng.next_below(n));
        if (a == b) continue;
        bool duplicate = false;
        for (const auto& l : lines)
            if ((l.from_bus == buses[a].id && l.to_bus == buses[b].id) ||
                (l.from_bus == buses[b].id && l.to_bus == buses[a].id))
                duplicate = true;
        if (!duplicate) add_line(a, b);
    }
    TransformerRecord trafo{"N0", "N1", 100000.0, 0.0, 0.0};
    return GridTopology(buses, lines, {}, {}, flat_profile("PL", 1, 0.0, 0.0), trafo, 100000.0,
                        "random");
}

} // namespace lvse::test

#endif
