#ifndef LVSE_NETWORK_HPP
#define LVSE_NETWORK_HPP

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lvse/grid_model.hpp"

namespace lvse {

using Complex = std::complex<double>;

// One series branch of the per-unit network. Lines map one-to-one; the
// MV/LV coupling appears as an extra branch when it has nonzero impedance.
struct Branch {
    int from_node = -1;
    int to_node = -1;
    Complex y_series;        // 1/Z in per-unit
    LineId line_id;          // empty for the transformer branch
    double i_base_a = 0.0;   // ampere base at the branch voltage level
    double thermal_limit_a = 0.0; // 0 for the transformer branch
    bool is_transformer = false;
};

// Sparse nodal admittance matrix in per-unit.
struct AdmittanceMatrix {
    int dimension = 0;
    Eigen::SparseMatrix<Complex> matrix;

    Complex at(int row, int col) const { return matrix.coeff(row, col); }
};

// Per-unit electrical graph derived from a GridTopology: buses collapsed
// onto electrical nodes (an ideal transformer link makes the slack coupling
// and the substation busbar one node), branches and bases resolved.
class NetworkModel {
public:
    explicit NetworkModel(const GridTopology& grid);

    int node_count() const { return node_count_; }
    int slack_node() const { return slack_node_; }
    int node_of(const BusId& bus) const;
    const std::vector<std::vector<BusId>>& buses_of_node() const { return buses_of_node_; }
    const std::vector<Branch>& branches() const { return branches_; }
    const AdmittanceMatrix& ybus() const { return ybus_; }
    const GridTopology& grid() const { return *grid_; }
    // Branch index of a line id; transformer branch is not addressable by line id.
    int branch_of_line(const LineId& id) const;

private:
    const GridTopology* grid_;
    int node_count_ = 0;
    int slack_node_ = 0;
    std::map<BusId, int> node_of_bus_;
    std::vector<std::vector<BusId>> buses_of_node_;
    std::vector<Branch> branches_;
    std::map<LineId, int> branch_index_;
    AdmittanceMatrix ybus_;
};

// Y[i][j] = -y_series for each branch ij; diagonals sum incident branch
// admittances. Zero-impedance branches are rejected.
AdmittanceMatrix build_ybus(int node_count, const std::vector<Branch>& branches);

// Per-branch power flows and current magnitudes derived from a voltage
// state. Shared by the power flow post-processing and the estimator so
// ground truth and estimate use the identical derivation.
struct BranchFlow {
    double p_from_pu = 0.0, q_from_pu = 0.0;
    double p_to_pu = 0.0, q_to_pu = 0.0;
    double i_from_pu = 0.0, i_to_pu = 0.0;
    // max of the two end magnitudes, converted to amperes
    double i_mag_a = 0.0;
};

std::vector<BranchFlow> compute_flows(const NetworkModel& net, const Eigen::VectorXd& v_mag,
                                      const Eigen::VectorXd& v_ang);

// Net nodal injections P, Q implied by a voltage state (generation positive).
void calc_injections(const NetworkModel& net, const Eigen::VectorXd& v_mag,
                     const Eigen::VectorXd& v_ang, Eigen::VectorXd& p_out,
                     Eigen::VectorXd& q_out);

} // namespace lvse

#endif
