#include "lvse/state_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Dense>

namespace lvse {

namespace {

// Current magnitudes have an undefined gradient at zero current; rows this
// close to the singular point get a zero Jacobian row for the iteration.
constexpr double kCurrentGradientGuard = 1e-7;

int ang_col(const NetworkModel& net, int node) {
    // angle unknowns: all non-slack nodes in index order
    return node < net.slack_node() ? node : node - 1;
}

int v_col(const NetworkModel& net, int node) { return net.node_count() - 1 + node; }

struct DenseY {
    const Eigen::MatrixXd& g;
    const Eigen::MatrixXd& b;
};

struct InjectionEval {
    double p = 0.0;
    double q = 0.0;
};

InjectionEval injection_at(const DenseY& y, const Eigen::VectorXd& v, const Eigen::VectorXd& a,
                           int i) {
    InjectionEval e;
    int n = static_cast<int>(v.size());
    for (int j = 0; j < n; ++j) {
        double g = y.g(i, j), b = y.b(i, j);
        if (g == 0.0 && b == 0.0) continue;
        double angle = a[i] - a[j];
        double vivj = v[i] * v[j];
        e.p += vivj * (g * std::cos(angle) + b * std::sin(angle));
        e.q += vivj * (g * std::sin(angle) - b * std::cos(angle));
    }
    return e;
}

// dP_i/dx and dQ_i/dx rows over the full state layout.
void injection_partials(const NetworkModel& net, const DenseY& y, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& a, int i, Eigen::RowVectorXd& dp,
                        Eigen::RowVectorXd& dq) {
    int n = net.node_count();
    dp.setZero(2 * n - 1);
    dq.setZero(2 * n - 1);
    InjectionEval e = injection_at(y, v, a, i);

    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double g = y.g(i, j), b = y.b(i, j);
        if (g == 0.0 && b == 0.0) continue;
        double angle = a[i] - a[j];
        double cos_a = std::cos(angle), sin_a = std::sin(angle);
        double vivj = v[i] * v[j];
        if (j != net.slack_node()) {
            dp[ang_col(net, j)] = vivj * (g * sin_a - b * cos_a);
            dq[ang_col(net, j)] = -vivj * (g * cos_a + b * sin_a);
        }
        dp[v_col(net, j)] = v[i] * (g * cos_a + b * sin_a);
        dq[v_col(net, j)] = v[i] * (g * sin_a - b * cos_a);
    }
    if (i != net.slack_node()) {
        dp[ang_col(net, i)] = -e.q - y.b(i, i) * v[i] * v[i];
        dq[ang_col(net, i)] = e.p - y.g(i, i) * v[i] * v[i];
    }
    dp[v_col(net, i)] = e.p / v[i] + y.g(i, i) * v[i];
    dq[v_col(net, i)] = e.q / v[i] - y.b(i, i) * v[i];
}

struct FlowEval {
    double p = 0.0, q = 0.0, i_mag = 0.0;
};

FlowEval flow_at(const Branch& br, const Eigen::VectorXd& v, const Eigen::VectorXd& a,
                 LineEnd end) {
    int i = end == LineEnd::from_end ? br.from_node : br.to_node;
    int j = end == LineEnd::from_end ? br.to_node : br.from_node;
    double g = br.y_series.real(), b = br.y_series.imag();
    double angle = a[i] - a[j];
    double cos_a = std::cos(angle), sin_a = std::sin(angle);
    FlowEval f;
    f.p = v[i] * v[i] * g - v[i] * v[j] * (g * cos_a + b * sin_a);
    f.q = -v[i] * v[i] * b - v[i] * v[j] * (g * sin_a - b * cos_a);
    double d = std::sqrt(std::max(0.0, v[i] * v[i] + v[j] * v[j] - 2.0 * v[i] * v[j] * cos_a));
    f.i_mag = std::abs(br.y_series) * d;
    return f;
}

} // namespace

StateVector StateVector::flat_start(const NetworkModel& net) {
    StateVector x;
    x.v_mag = Eigen::VectorXd::Ones(net.node_count());
    x.v_ang = Eigen::VectorXd::Zero(net.node_count());
    return x;
}

int MeasurementModel::state_count() const { return 2 * net_->node_count() - 1; }

MeasurementModel MeasurementModel::build(const NetworkModel& net,
                                         const std::vector<Measurement>& measurements) {
    MeasurementModel model;
    model.net_ = &net;
    {
        int n = net.node_count();
        model.y_g_ = Eigen::MatrixXd::Zero(n, n);
        model.y_b_ = Eigen::MatrixXd::Zero(n, n);
        const auto& m = net.ybus().matrix;
        for (int col = 0; col < m.outerSize(); ++col)
            for (Eigen::SparseMatrix<Complex>::InnerIterator it(m, col); it; ++it) {
                model.y_g_(it.row(), it.col()) = it.value().real();
                model.y_b_(it.row(), it.col()) = it.value().imag();
            }
    }
    const GridTopology& grid = net.grid();

    struct Composed {
        double p_value = 0.0, p_var = 0.0;
        double q_value = 0.0, q_var = 0.0;
        bool has_p = false, has_q = false;
        std::vector<const Measurement*> i_rows;
        std::set<ProsumerId> contributors;
    };
    std::map<int, Composed> injections;

    for (const auto& m : measurements) {
        if (m.sigma_pu <= 0.0)
            throw ValidationError("measurement at " + m.element + " has non-positive sigma");
        switch (m.quantity) {
            case Quantity::v_mag: {
                ModelRow row;
                row.quantity = m.quantity;
                row.node = net.node_of(m.element);
                row.value = m.value_pu;
                row.sigma = m.sigma_pu;
                row.label = "v_mag@" + m.element;
                model.rows_.push_back(std::move(row));
                break;
            }
            case Quantity::p_flow:
            case Quantity::q_flow:
            case Quantity::i_flow: {
                if (m.quantity == Quantity::i_flow &&
                    std::abs(m.value_pu) < kCurrentDropThreshold)
                    break; // low-flow singularity guard
                ModelRow row;
                row.quantity = m.quantity;
                row.branch = net.branch_of_line(m.element);
                row.end = m.end;
                row.value = m.value_pu;
                row.sigma = m.sigma_pu;
                row.label = to_string(m.quantity) + "@" + m.element + ":" + to_string(m.end);
                model.rows_.push_back(std::move(row));
                break;
            }
            case Quantity::p_inj:
            case Quantity::q_inj:
            case Quantity::i_inj: {
                int node = net.node_of(m.element);
                Composed& c = injections[node];
                if (!m.prosumer.empty()) c.contributors.insert(m.prosumer);
                if (m.quantity == Quantity::p_inj) {
                    c.p_value += m.value_pu;
                    c.p_var += m.sigma_pu * m.sigma_pu;
                    c.has_p = true;
                } else if (m.quantity == Quantity::q_inj) {
                    c.q_value += m.value_pu;
                    c.q_var += m.sigma_pu * m.sigma_pu;
                    c.has_q = true;
                } else {
                    c.i_rows.push_back(&m);
                }
                break;
            }
        }
    }

    // Per-prosumer P/Q contributions compose into one net-injection row per
    // node (values summed, variances summed). A current magnitude survives
    // only when a single contributor accounts for the whole node injection:
    // magnitudes of distinct customers at one bus do not sum.
    for (auto& [node, c] : injections) {
        std::size_t prosumers_at_node = 0;
        for (const auto& bus : net.buses_of_node()[node])
            prosumers_at_node += grid.prosumers_at(bus).size();

        std::string bus_label = net.buses_of_node()[node].front();
        if (c.has_p) {
            ModelRow row;
            row.quantity = Quantity::p_inj;
            row.node = node;
            row.value = c.p_value;
            row.sigma = std::sqrt(c.p_var);
            row.label = "p_inj@" + bus_label;
            model.rows_.push_back(std::move(row));
        }
        if (c.has_q) {
            ModelRow row;
            row.quantity = Quantity::q_inj;
            row.node = node;
            row.value = c.q_value;
            row.sigma = std::sqrt(c.q_var);
            row.label = "q_inj@" + bus_label;
            model.rows_.push_back(std::move(row));
        }
        for (const Measurement* m : c.i_rows) {
            bool whole_node = m->prosumer.empty() ||
                              (prosumers_at_node == 1 && c.contributors.size() == 1);
            if (!whole_node) continue;
            if (std::abs(m->value_pu) < kCurrentDropThreshold) continue;
            ModelRow row;
            row.quantity = Quantity::i_inj;
            row.node = node;
            row.value = m->value_pu;
            row.sigma = m->sigma_pu;
            row.label = "i_inj@" + bus_label;
            model.rows_.push_back(std::move(row));
        }
    }

    // Zero-injection virtual measurements for prosumer-free nodes without
    // injection information. The slack node is the balancing node and is
    // excluded: its injection is the transformer import, not zero.
    for (int node = 0; node < net.node_count(); ++node) {
        if (node == net.slack_node()) continue;
        if (injections.count(node)) continue;
        bool has_prosumer = false;
        for (const auto& bus : net.buses_of_node()[node])
            if (!grid.prosumers_at(bus).empty()) has_prosumer = true;
        if (has_prosumer) continue;

        std::string bus_label = net.buses_of_node()[node].front();
        for (Quantity q : {Quantity::p_inj, Quantity::q_inj}) {
            ModelRow row;
            row.quantity = q;
            row.node = node;
            row.value = 0.0;
            row.sigma = kZeroInjectionSigma;
            row.label = to_string(q) + "@" + bus_label + " (zero injection)";
            model.rows_.push_back(std::move(row));
        }
    }

    int m_count = model.row_count();
    int needed = model.state_count();
    if (m_count < needed) {
        std::ostringstream msg;
        msg << "unobservable: m = " << m_count << " < 2N-1 = " << needed
            << ": measurement deficit " << (needed - m_count);
        throw ObservabilityError(msg.str());
    }
    return model;
}

Eigen::VectorXd MeasurementModel::values() const {
    Eigen::VectorXd z(row_count());
    for (int i = 0; i < row_count(); ++i) z[i] = rows_[i].value;
    return z;
}

Eigen::VectorXd MeasurementModel::sigmas() const {
    Eigen::VectorXd s(row_count());
    for (int i = 0; i < row_count(); ++i) s[i] = rows_[i].sigma;
    return s;
}

Eigen::VectorXd MeasurementModel::evaluate(const StateVector& x) const {
    DenseY y{y_g_, y_b_};
    Eigen::VectorXd h(row_count());
    for (int r = 0; r < row_count(); ++r) {
        const ModelRow& row = rows_[r];
        switch (row.quantity) {
            case Quantity::v_mag: h[r] = x.v_mag[row.node]; break;
            case Quantity::p_inj: h[r] = injection_at(y, x.v_mag, x.v_ang, row.node).p; break;
            case Quantity::q_inj: h[r] = injection_at(y, x.v_mag, x.v_ang, row.node).q; break;
            case Quantity::i_inj: {
                InjectionEval e = injection_at(y, x.v_mag, x.v_ang, row.node);
                h[r] = std::hypot(e.p, e.q) / x.v_mag[row.node];
                break;
            }
            case Quantity::p_flow:
                h[r] = flow_at(net_->branches()[row.branch], x.v_mag, x.v_ang, row.end).p;
                break;
            case Quantity::q_flow:
                h[r] = flow_at(net_->branches()[row.branch], x.v_mag, x.v_ang, row.end).q;
                break;
            case Quantity::i_flow:
                h[r] = flow_at(net_->branches()[row.branch], x.v_mag, x.v_ang, row.end).i_mag;
                break;
        }
    }
    return h;
}

Eigen::MatrixXd MeasurementModel::jacobian(const StateVector& x) const {
    const NetworkModel& net = *net_;
    DenseY y{y_g_, y_b_};
    int n_states = state_count();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(row_count(), n_states);
    Eigen::RowVectorXd dp(n_states), dq(n_states);
    const Eigen::VectorXd& v = x.v_mag;
    const Eigen::VectorXd& a = x.v_ang;

    for (int r = 0; r < row_count(); ++r) {
        const ModelRow& row = rows_[r];
        switch (row.quantity) {
            case Quantity::v_mag:
                jac(r, v_col(net, row.node)) = 1.0;
                break;
            case Quantity::p_inj:
                injection_partials(net, y, v, a, row.node, dp, dq);
                jac.row(r) = dp;
                break;
            case Quantity::q_inj:
                injection_partials(net, y, v, a, row.node, dp, dq);
                jac.row(r) = dq;
                break;
            case Quantity::i_inj: {
                injection_partials(net, y, v, a, row.node, dp, dq);
                InjectionEval e = injection_at(y, v, a, row.node);
                double s = std::hypot(e.p, e.q);
                if (s < kCurrentGradientGuard) break; // gradient undefined at zero current
                double vi = v[row.node];
                jac.row(r) = (e.p * dp + e.q * dq) / (s * vi);
                jac(r, v_col(net, row.node)) -= s / (vi * vi);
                break;
            }
            case Quantity::p_flow:
            case Quantity::q_flow:
            case Quantity::i_flow: {
                const Branch& br = net.branches()[row.branch];
                int i = row.end == LineEnd::from_end ? br.from_node : br.to_node;
                int j = row.end == LineEnd::from_end ? br.to_node : br.from_node;
                double g = br.y_series.real(), b = br.y_series.imag();
                double angle = a[i] - a[j];
                double cos_a = std::cos(angle), sin_a = std::sin(angle);

                if (row.quantity == Quantity::p_flow) {
                    double dth = v[i] * v[j] * (g * sin_a - b * cos_a);
                    if (i != net.slack_node()) jac(r, ang_col(net, i)) = dth;
                    if (j != net.slack_node()) jac(r, ang_col(net, j)) = -dth;
                    jac(r, v_col(net, i)) = 2.0 * v[i] * g - v[j] * (g * cos_a + b * sin_a);
                    jac(r, v_col(net, j)) = -v[i] * (g * cos_a + b * sin_a);
                } else if (row.quantity == Quantity::q_flow) {
                    double dth = -v[i] * v[j] * (g * cos_a + b * sin_a);
                    if (i != net.slack_node()) jac(r, ang_col(net, i)) = dth;
                    if (j != net.slack_node()) jac(r, ang_col(net, j)) = -dth;
                    jac(r, v_col(net, i)) = -2.0 * v[i] * b - v[j] * (g * sin_a - b * cos_a);
                    jac(r, v_col(net, j)) = -v[i] * (g * sin_a - b * cos_a);
                } else {
                    double y_abs = std::abs(br.y_series);
                    double d = std::sqrt(
                        std::max(0.0, v[i] * v[i] + v[j] * v[j] - 2.0 * v[i] * v[j] * cos_a));
                    if (y_abs * d < kCurrentGradientGuard) break;
                    jac(r, v_col(net, i)) = y_abs * (v[i] - v[j] * cos_a) / d;
                    jac(r, v_col(net, j)) = y_abs * (v[j] - v[i] * cos_a) / d;
                    double dth = y_abs * v[i] * v[j] * sin_a / d;
                    if (i != net.slack_node()) jac(r, ang_col(net, i)) = dth;
                    if (j != net.slack_node()) jac(r, ang_col(net, j)) = -dth;
                }
                break;
            }
        }
    }
    return jac;
}

double MeasurementModel::objective(const StateVector& x) const {
    Eigen::VectorXd r = values() - evaluate(x);
    double j = 0.0;
    for (int i = 0; i < row_count(); ++i) {
        double w = 1.0 / (rows_[i].sigma * rows_[i].sigma);
        j += w * r[i] * r[i];
    }
    return j;
}

WlsSolution wls_solve(const MeasurementModel& model, const StateVector& initial,
                      const WlsOptions& options) {
    const NetworkModel& net = model.network();
    int n_states = model.state_count();
    if (initial.v_mag.minCoeff() <= 0.0)
        throw ValidationError("initial state has non-positive voltage magnitude");

    StateVector x = initial;
    x.v_ang[net.slack_node()] = 0.0; // angle reference

    Eigen::VectorXd z = model.values();
    Eigen::VectorXd sig = model.sigmas();
    Eigen::VectorXd w = sig.array().square().inverse();

    auto apply = [&](const StateVector& base, const Eigen::VectorXd& dx, double alpha) {
        StateVector next = base;
        for (int node = 0; node < net.node_count(); ++node) {
            if (node != net.slack_node())
                next.v_ang[node] += alpha * dx[ang_col(net, node)];
            next.v_mag[node] += alpha * dx[v_col(net, node)];
        }
        return next;
    };

    WlsSolution sol;
    double j_current = model.objective(x);

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Eigen::VectorXd r = z - model.evaluate(x);
        Eigen::MatrixXd h = model.jacobian(x);

        Eigen::VectorXd grad = 2.0 * h.transpose() * (w.asDiagonal() * r);
        if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
            sol.converged = true;
            sol.iterations = iter - 1;
            break;
        }

        // normal-equation step computed as a QR solve of the whitened system;
        // forming H^T W H explicitly squares the condition number and the
        // zero-injection weights make that matter
        Eigen::VectorXd sqrt_w = w.array().sqrt();
        Eigen::MatrixXd h_whitened = sqrt_w.asDiagonal() * h;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h_whitened);
        if (qr.rank() < n_states)
            throw SolverError("numerically unobservable: singular gain matrix (rank " +
                              std::to_string(qr.rank()) + " of " + std::to_string(n_states) + ")");
        Eigen::VectorXd dx = qr.solve((sqrt_w.array() * r.array()).matrix());
        if (!dx.allFinite()) throw SolverError("WLS update is non-finite");

        if (dx.lpNorm<Eigen::Infinity>() < options.step_tolerance) {
            // the update is below the state resolution: converged; still
            // take it when it helps (near a zero-residual optimum the final
            // step lands at machine precision)
            StateVector refined = apply(x, dx, 1.0);
            double j_refined = model.objective(refined);
            if (j_refined <= j_current) {
                x = refined;
                j_current = j_refined;
            }
            sol.converged = true;
            sol.iterations = iter;
            break;
        }

        // step halving keeps the objective non-increasing
        double alpha = 1.0;
        StateVector candidate = apply(x, dx, alpha);
        double j_candidate = model.objective(candidate);
        int halvings = 0;
        while (j_candidate > j_current && halvings < options.max_step_halvings) {
            alpha *= 0.5;
            candidate = apply(x, dx, alpha);
            j_candidate = model.objective(candidate);
            ++halvings;
        }
        if (j_candidate > j_current) {
            sol.iterations = iter;
            sol.diagnostics = "step halving stalled";
            break;
        }

        x = candidate;
        j_current = j_candidate;
        sol.iterations = iter;

        if (alpha * dx.lpNorm<Eigen::Infinity>() < options.step_tolerance) {
            sol.converged = true;
            break;
        }
    }

    sol.state = x;
    sol.objective = j_current;
    sol.residuals = z - model.evaluate(x);
    if (!sol.converged && sol.diagnostics.empty())
        sol.diagnostics = "iteration cap reached (" + std::to_string(options.max_iterations) + ")";
    return sol;
}

EstimatedFlows derive_estimated_flows(const NetworkModel& net, const StateVector& state) {
    EstimatedFlows out;
    out.v_mag = state.v_mag;
    out.v_ang = state.v_ang;
    out.flows = compute_flows(net, state.v_mag, state.v_ang);
    return out;
}

} // namespace lvse
