#ifndef LVSE_POWER_FLOW_HPP
#define LVSE_POWER_FLOW_HPP

#include <filesystem>
#include <vector>

#include "lvse/network.hpp"

namespace lvse {

struct PowerFlowOptions {
    double tolerance_pu = 1e-8;  // max active/reactive mismatch
    int max_iterations = 25;
    double slack_voltage_pu = 1.0;
    double slack_angle_rad = 0.0;
};

// Net scheduled injection at a node in per-unit, generation positive.
struct NodePower {
    double p_pu = 0.0;
    double q_pu = 0.0;
};

struct PowerFlowSolution {
    Eigen::VectorXd v_mag;  // per node, per-unit
    Eigen::VectorXd v_ang;  // per node, radians
    Eigen::VectorXd p_inj;  // per node, recomputed from the voltage solution
    Eigen::VectorXd q_inj;
    std::vector<BranchFlow> flows; // aligned with NetworkModel::branches()
    int iterations = 0;
    double max_mismatch_pu = 0.0;
};

// Newton-Raphson from a flat start. Throws SolverError on divergence
// (mismatch growth over 3 consecutive iterations) or iteration cap.
PowerFlowSolution solve_powerflow(const NetworkModel& net,
                                  const std::vector<NodePower>& injections,
                                  const PowerFlowOptions& options = {});

// Scheduled nodal injections at one timestep: prosumer consumptions summed
// per node and negated (withdrawal positive in the profiles, injection
// positive toward the network).
std::vector<NodePower> injections_at(const NetworkModel& net, std::size_t t);

struct TimeseriesResult {
    std::size_t t_begin = 0;
    std::size_t t_end = 0;
    std::vector<PowerFlowSolution> steps; // ordered by timestep
};

// One converged solution per timestep in [t_begin, t_end). Solver errors are
// rethrown tagged with the timestep index. Worker threads split the range;
// results are ordered by timestep regardless of worker count.
TimeseriesResult run_timeseries(const NetworkModel& net, std::size_t t_begin, std::size_t t_end,
                                const PowerFlowOptions& options = {}, int workers = 1);

// Ground-truth dump for debugging and for the evaluation oracle path:
// (t, element id, quantity, value) rows.
void dump_truth_csv(const NetworkModel& net, const TimeseriesResult& series,
                    const std::filesystem::path& path);

} // namespace lvse

#endif
