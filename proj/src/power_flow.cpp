#include "lvse/power_flow.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "lvse/csv.hpp"

namespace lvse {

namespace {

// Unknown ordering: angles then magnitudes of all non-slack nodes.
struct Unknowns {
    std::vector<int> nodes; // non-slack, ascending
    std::map<int, int> position;
};

Unknowns make_unknowns(const NetworkModel& net) {
    Unknowns u;
    for (int i = 0; i < net.node_count(); ++i)
        if (i != net.slack_node()) {
            u.position[i] = static_cast<int>(u.nodes.size());
            u.nodes.push_back(i);
        }
    return u;
}

} // namespace

PowerFlowSolution solve_powerflow(const NetworkModel& net,
                                  const std::vector<NodePower>& injections,
                                  const PowerFlowOptions& options) {
    int n = net.node_count();
    if (static_cast<int>(injections.size()) != n)
        throw ValidationError("injection vector size " + std::to_string(injections.size()) +
                              " does not match node count " + std::to_string(n));

    Unknowns unknowns = make_unknowns(net);
    int m = static_cast<int>(unknowns.nodes.size());

    Eigen::VectorXd v_mag = Eigen::VectorXd::Ones(n); // flat start
    Eigen::VectorXd v_ang = Eigen::VectorXd::Zero(n);
    v_mag[net.slack_node()] = options.slack_voltage_pu;
    v_ang[net.slack_node()] = options.slack_angle_rad;

    const auto& y = net.ybus().matrix;
    Eigen::VectorXd p_calc(n), q_calc(n);

    double previous_mismatch = std::numeric_limits<double>::infinity();
    int growth_streak = 0;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        calc_injections(net, v_mag, v_ang, p_calc, q_calc);

        Eigen::VectorXd mismatch(2 * m);
        for (int k = 0; k < m; ++k) {
            int i = unknowns.nodes[k];
            mismatch[k] = injections[i].p_pu - p_calc[i];
            mismatch[m + k] = injections[i].q_pu - q_calc[i];
        }
        double max_mismatch = mismatch.lpNorm<Eigen::Infinity>();

        if (max_mismatch < options.tolerance_pu) {
            PowerFlowSolution sol;
            sol.v_mag = v_mag;
            sol.v_ang = v_ang;
            calc_injections(net, v_mag, v_ang, sol.p_inj, sol.q_inj);
            sol.flows = compute_flows(net, v_mag, v_ang);
            sol.iterations = iter - 1;
            sol.max_mismatch_pu = max_mismatch;
            return sol;
        }

        if (max_mismatch > previous_mismatch) {
            if (++growth_streak >= 3) {
                std::ostringstream msg;
                msg << "power flow diverged: mismatch grew over 3 consecutive iterations to "
                    << max_mismatch << " pu";
                throw SolverError(msg.str());
            }
        } else {
            growth_streak = 0;
        }
        previous_mismatch = max_mismatch;

        // polar Newton-Raphson Jacobian, dense (LV grids are small)
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        for (int col = 0; col < y.outerSize(); ++col) {
            for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, col); it; ++it) {
                int i = static_cast<int>(it.row());
                int j = static_cast<int>(it.col());
                double g = it.value().real();
                double b = it.value().imag();
                double angle = v_ang[i] - v_ang[j];
                double cos_a = std::cos(angle), sin_a = std::sin(angle);

                if (i == j) continue; // diagonal terms assembled from totals below
                double vivj = v_mag[i] * v_mag[j];
                double dp_dth = vivj * (g * sin_a - b * cos_a);
                double dq_dth = -vivj * (g * cos_a + b * sin_a);
                double dp_dv = v_mag[i] * (g * cos_a + b * sin_a);
                double dq_dv = v_mag[i] * (g * sin_a - b * cos_a);

                auto row = unknowns.position.find(i);
                auto col_u = unknowns.position.find(j);
                if (row != unknowns.position.end() && col_u != unknowns.position.end()) {
                    jac(row->second, col_u->second) += dp_dth;
                    jac(m + row->second, col_u->second) += dq_dth;
                    jac(row->second, m + col_u->second) += dp_dv;
                    jac(m + row->second, m + col_u->second) += dq_dv;
                }
            }
        }
        // diagonal blocks from the injection totals
        for (int k = 0; k < m; ++k) {
            int i = unknowns.nodes[k];
            double g_ii = y.coeff(i, i).real();
            double b_ii = y.coeff(i, i).imag();
            double vi = v_mag[i];
            jac(k, k) += -q_calc[i] - b_ii * vi * vi;             // dP_i/dtheta_i
            jac(m + k, k) += p_calc[i] - g_ii * vi * vi;          // dQ_i/dtheta_i
            jac(k, m + k) += p_calc[i] / vi + g_ii * vi;          // dP_i/dV_i
            jac(m + k, m + k) += q_calc[i] / vi - b_ii * vi;      // dQ_i/dV_i
        }

        Eigen::VectorXd dx = jac.partialPivLu().solve(mismatch);
        if (!dx.allFinite())
            throw SolverError("power flow Jacobian solve produced non-finite update");
        for (int k = 0; k < m; ++k) {
            v_ang[unknowns.nodes[k]] += dx[k];
            v_mag[unknowns.nodes[k]] += dx[m + k];
            if (v_mag[unknowns.nodes[k]] <= 0)
                throw SolverError("power flow diverged: voltage magnitude collapsed at node " +
                                  std::to_string(unknowns.nodes[k]));
        }
    }

    std::ostringstream msg;
    msg << "power flow did not converge in " << options.max_iterations
        << " iterations; last mismatch " << previous_mismatch << " pu";
    throw SolverError(msg.str());
}

std::vector<NodePower> injections_at(const NetworkModel& net, std::size_t t) {
    const GridTopology& grid = net.grid();
    std::size_t horizon = grid.profiles().length();
    std::vector<NodePower> inj(net.node_count());
    double base_kw = grid.base_va() / 1000.0;
    for (const auto& p : grid.prosumers()) {
        const auto& series = grid.profiles().series(p.profile);
        if (t >= horizon || t >= series.size())
            throw ValidationError("profile " + p.profile + " covers " +
                                  std::to_string(series.size()) + " < " + std::to_string(t + 1) +
                                  " steps");
        int node = net.node_of(p.bus);
        inj[node].p_pu -= series[t].p_kw / base_kw;   // consumption positive in profiles
        inj[node].q_pu -= series[t].q_kvar / base_kw;
    }
    return inj;
}

TimeseriesResult run_timeseries(const NetworkModel& net, std::size_t t_begin, std::size_t t_end,
                                const PowerFlowOptions& options, int workers) {
    if (t_end <= t_begin) throw ValidationError("empty timestep range");
    for (const auto& p : net.grid().prosumers()) {
        const auto& series = net.grid().profiles().series(p.profile);
        if (series.size() < t_end)
            throw ValidationError("profile " + p.profile + " covers " +
                                  std::to_string(series.size()) + " < " + std::to_string(t_end) +
                                  " steps");
    }

    TimeseriesResult result;
    result.t_begin = t_begin;
    result.t_end = t_end;
    std::size_t count = t_end - t_begin;
    result.steps.resize(count);

    std::vector<std::string> errors(count);
    auto solve_range = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < count; k += stride) {
            std::size_t t = t_begin + k;
            try {
                result.steps[k] = solve_powerflow(net, injections_at(net, t), options);
            } catch (const Error& e) {
                errors[k] = e.what();
            }
        }
    };

    int thread_count = std::max(1, workers);
    if (thread_count == 1 || count == 1) {
        solve_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < thread_count; ++w)
            pool.emplace_back(solve_range, static_cast<std::size_t>(w),
                              static_cast<std::size_t>(thread_count));
        for (auto& th : pool) th.join();
    }

    for (std::size_t k = 0; k < count; ++k)
        if (!errors[k].empty())
            throw SolverError("timestep " + std::to_string(t_begin + k) + ": " + errors[k]);
    return result;
}

void dump_truth_csv(const NetworkModel& net, const TimeseriesResult& series,
                    const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    const auto& grid = net.grid();
    for (std::size_t k = 0; k < series.steps.size(); ++k) {
        std::string t = std::to_string(series.t_begin + k);
        const auto& sol = series.steps[k];
        for (const auto& b : grid.buses()) {
            int node = net.node_of(b.id);
            rows.push_back({t, b.id, "v_mag_pu", csv::format_number(sol.v_mag[node])});
            rows.push_back({t, b.id, "v_ang_rad", csv::format_number(sol.v_ang[node])});
            rows.push_back({t, b.id, "p_inj_pu", csv::format_number(sol.p_inj[node])});
            rows.push_back({t, b.id, "q_inj_pu", csv::format_number(sol.q_inj[node])});
        }
        for (std::size_t bi = 0; bi < net.branches().size(); ++bi) {
            const auto& br = net.branches()[bi];
            if (br.is_transformer) continue;
            const auto& f = sol.flows[bi];
            rows.push_back({t, br.line_id, "p_from_pu", csv::format_number(f.p_from_pu)});
            rows.push_back({t, br.line_id, "q_from_pu", csv::format_number(f.q_from_pu)});
            rows.push_back({t, br.line_id, "i_from_pu", csv::format_number(f.i_from_pu)});
            rows.push_back({t, br.line_id, "i_to_pu", csv::format_number(f.i_to_pu)});
            rows.push_back({t, br.line_id, "i_mag_a", csv::format_number(f.i_mag_a)});
        }
    }
    csv::write_file(path, {"t", "element", "quantity", "value"}, rows);
}

} // namespace lvse
