#ifndef LVSE_STATE_ESTIMATION_HPP
#define LVSE_STATE_ESTIMATION_HPP

#include <string>
#include <vector>

#include "lvse/measurement_gen.hpp"
#include "lvse/network.hpp"

namespace lvse {

// Estimator state: voltage magnitude at every node plus an angle at every
// non-slack node (the slack angle is the reference and stays zero).
struct StateVector {
    Eigen::VectorXd v_mag; // per node
    Eigen::VectorXd v_ang; // per node, slack entry fixed at 0

    static StateVector flat_start(const NetworkModel& net);
};

// One row of the measurement model: a quantity with an evaluation rule
// h_i(x), an analytic gradient and a weight 1/sigma^2.
struct ModelRow {
    Quantity quantity = Quantity::v_mag;
    int node = -1;    // injections and voltages
    int branch = -1;  // flows
    LineEnd end = LineEnd::from_end;
    double value = 0.0;
    double sigma = 0.0;
    std::string label;
};

// Measurement model over the electrical nodes. Per-prosumer injection
// measurements at one bus are composed into a single net-injection row
// (values summed, variances summed); prosumer-free nodes without injection
// data get zero-injection virtual rows; current-magnitude rows below the
// low-flow guard are dropped.
class MeasurementModel {
public:
    static MeasurementModel build(const NetworkModel& net,
                                  const std::vector<Measurement>& measurements);

    int row_count() const { return static_cast<int>(rows_.size()); }
    int state_count() const; // 2N - 1
    const std::vector<ModelRow>& rows() const { return rows_; }
    const NetworkModel& network() const { return *net_; }

    Eigen::VectorXd values() const;
    Eigen::VectorXd sigmas() const;
    Eigen::VectorXd evaluate(const StateVector& x) const;          // h(x)
    Eigen::MatrixXd jacobian(const StateVector& x) const;          // m x (2N-1)
    double objective(const StateVector& x) const;                  // sum w_i (z_i - h_i)^2

    static constexpr double kZeroInjectionSigma = 1e-5;
    static constexpr double kCurrentDropThreshold = 1e-4;

private:
    const NetworkModel* net_ = nullptr;
    std::vector<ModelRow> rows_;
    Eigen::MatrixXd y_g_; // dense conductance/susceptance, cached for row evaluation
    Eigen::MatrixXd y_b_;
};

struct WlsOptions {
    double step_tolerance = 1e-6;     // max state update, per-unit / radians
    double gradient_tolerance = 1e-6; // infinity norm of the objective gradient
    int max_iterations = 50;
    int max_step_halvings = 10;
};

struct WlsSolution {
    StateVector state;
    double objective = 0.0;
    Eigen::VectorXd residuals; // z - h(x_hat)
    int iterations = 0;
    bool converged = false;
    std::string diagnostics;
};

// Gauss-Newton on the weighted normal equations with step halving on
// objective increase. Throws SolverError("numerically unobservable") on a
// singular gain matrix; an iteration cap returns converged = false.
WlsSolution wls_solve(const MeasurementModel& model, const StateVector& initial,
                      const WlsOptions& options = {});

struct EstimatedFlows {
    Eigen::VectorXd v_mag; // per node
    Eigen::VectorXd v_ang;
    std::vector<BranchFlow> flows;
};

// Estimated bus voltages and line currents via the same derivation path as
// the power-flow post-processing.
EstimatedFlows derive_estimated_flows(const NetworkModel& net, const StateVector& state);

} // namespace lvse

#endif
