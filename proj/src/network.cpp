#include "lvse/network.hpp"

#include <cmath>

namespace lvse {

NetworkModel::NetworkModel(const GridTopology& grid) : grid_(&grid) {
    const auto& trafo = grid.transformer();

    // node assignment: declaration order, with the coupling pair collapsed
    // when the transformer is an ideal link
    for (const auto& b : grid.buses()) {
        if (grid.coupling_merged() && b.id == trafo.substation_busbar &&
            node_of_bus_.count(trafo.slack_bus)) {
            int node = node_of_bus_.at(trafo.slack_bus);
            node_of_bus_[b.id] = node;
            buses_of_node_[node].push_back(b.id);
            continue;
        }
        if (grid.coupling_merged() && b.id == trafo.slack_bus &&
            node_of_bus_.count(trafo.substation_busbar)) {
            int node = node_of_bus_.at(trafo.substation_busbar);
            node_of_bus_[b.id] = node;
            buses_of_node_[node].push_back(b.id);
            continue;
        }
        node_of_bus_[b.id] = node_count_;
        buses_of_node_.push_back({b.id});
        ++node_count_;
    }
    slack_node_ = node_of_bus_.at(trafo.slack_bus);

    double base_va = grid.base_va();
    for (const auto& l : grid.lines()) {
        const Bus& from = grid.bus(l.from_bus);
        double z_base = from.nominal_voltage_v * from.nominal_voltage_v / base_va;
        Complex z_pu(l.resistance_ohm / z_base, l.reactance_ohm / z_base);
        Branch br;
        br.from_node = node_of_bus_.at(l.from_bus);
        br.to_node = node_of_bus_.at(l.to_bus);
        br.y_series = 1.0 / z_pu;
        br.line_id = l.id;
        br.i_base_a = base_va / (std::sqrt(3.0) * from.nominal_voltage_v);
        br.thermal_limit_a = l.thermal_limit_a;
        branch_index_[l.id] = static_cast<int>(branches_.size());
        branches_.push_back(br);
    }

    if (!grid.coupling_merged() &&
        (trafo.series_r_ohm != 0.0 || trafo.series_x_ohm != 0.0)) {
        const Bus& lv = grid.bus(trafo.substation_busbar);
        double z_base = lv.nominal_voltage_v * lv.nominal_voltage_v / base_va;
        Branch br;
        br.from_node = node_of_bus_.at(trafo.slack_bus);
        br.to_node = node_of_bus_.at(trafo.substation_busbar);
        br.y_series = 1.0 / Complex(trafo.series_r_ohm / z_base, trafo.series_x_ohm / z_base);
        br.i_base_a = base_va / (std::sqrt(3.0) * lv.nominal_voltage_v);
        br.is_transformer = true;
        branches_.push_back(br);
    }

    ybus_ = build_ybus(node_count_, branches_);
}

int NetworkModel::node_of(const BusId& bus) const {
    auto it = node_of_bus_.find(bus);
    if (it == node_of_bus_.end()) throw ValidationError("unknown bus " + bus);
    return it->second;
}

int NetworkModel::branch_of_line(const LineId& id) const {
    auto it = branch_index_.find(id);
    if (it == branch_index_.end()) throw ValidationError("unknown line " + id);
    return it->second;
}

AdmittanceMatrix build_ybus(int node_count, const std::vector<Branch>& branches) {
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(branches.size() * 4);
    for (const auto& b : branches) {
        if (b.y_series == Complex(0.0, 0.0))
            throw ValidationError("branch " + (b.line_id.empty() ? "transformer" : b.line_id) +
                                  " has zero admittance");
        triplets.emplace_back(b.from_node, b.from_node, b.y_series);
        triplets.emplace_back(b.to_node, b.to_node, b.y_series);
        triplets.emplace_back(b.from_node, b.to_node, -b.y_series);
        triplets.emplace_back(b.to_node, b.from_node, -b.y_series);
    }
    AdmittanceMatrix y;
    y.dimension = node_count;
    y.matrix.resize(node_count, node_count);
    y.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return y;
}

std::vector<BranchFlow> compute_flows(const NetworkModel& net, const Eigen::VectorXd& v_mag,
                                      const Eigen::VectorXd& v_ang) {
    std::vector<BranchFlow> flows;
    flows.reserve(net.branches().size());
    for (const auto& b : net.branches()) {
        Complex vf = std::polar(v_mag[b.from_node], v_ang[b.from_node]);
        Complex vt = std::polar(v_mag[b.to_node], v_ang[b.to_node]);
        Complex i_from = b.y_series * (vf - vt); // series element, no shunts
        Complex i_to = -i_from;
        Complex s_from = vf * std::conj(i_from);
        Complex s_to = vt * std::conj(i_to);

        BranchFlow f;
        f.p_from_pu = s_from.real();
        f.q_from_pu = s_from.imag();
        f.p_to_pu = s_to.real();
        f.q_to_pu = s_to.imag();
        f.i_from_pu = std::abs(i_from);
        f.i_to_pu = std::abs(i_to);
        f.i_mag_a = std::max(f.i_from_pu, f.i_to_pu) * b.i_base_a;
        flows.push_back(f);
    }
    return flows;
}

void calc_injections(const NetworkModel& net, const Eigen::VectorXd& v_mag,
                     const Eigen::VectorXd& v_ang, Eigen::VectorXd& p_out,
                     Eigen::VectorXd& q_out) {
    int n = net.node_count();
    p_out = Eigen::VectorXd::Zero(n);
    q_out = Eigen::VectorXd::Zero(n);
    const auto& y = net.ybus().matrix;
    for (int col = 0; col < y.outerSize(); ++col) {
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, col); it; ++it) {
            int i = static_cast<int>(it.row());
            int j = static_cast<int>(it.col());
            double g = it.value().real();
            double bsus = it.value().imag();
            double angle = v_ang[i] - v_ang[j];
            double vivj = v_mag[i] * v_mag[j];
            p_out[i] += vivj * (g * std::cos(angle) + bsus * std::sin(angle));
            q_out[i] += vivj * (g * std::sin(angle) - bsus * std::cos(angle));
        }
    }
}

} // namespace lvse
