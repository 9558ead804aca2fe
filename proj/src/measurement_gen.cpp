#include "lvse/measurement_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lvse/csv.hpp"

namespace lvse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kYearSteps = 35040;
constexpr double kStepHours = 0.25;
constexpr double kMinSigmaPu = 1e-4;
constexpr double kReferenceFloorPu = 1e-4;

struct Anchor {
    double hour;
    double value;
};

// Relative household day shapes, linearly interpolated.
const Anchor kWeekday[] = {{0.0, 0.32}, {5.0, 0.26},  {7.5, 0.78}, {9.0, 0.60},
                           {12.0, 0.62}, {15.0, 0.52}, {18.0, 0.88}, {19.5, 1.00},
                           {22.0, 0.62}, {24.0, 0.34}};
const Anchor kSaturday[] = {{0.0, 0.36}, {6.0, 0.28},  {9.0, 0.70}, {12.5, 0.92},
                            {15.0, 0.70}, {19.0, 0.95}, {20.0, 0.98}, {23.0, 0.45},
                            {24.0, 0.38}};
const Anchor kSunday[] = {{0.0, 0.38}, {6.0, 0.29},  {10.0, 0.75}, {13.0, 1.00},
                          {16.0, 0.72}, {19.0, 0.92}, {22.0, 0.55}, {24.0, 0.36}};

double interpolate(const Anchor* anchors, std::size_t count, double hour) {
    for (std::size_t i = 1; i < count; ++i) {
        if (hour <= anchors[i].hour) {
            double f = (hour - anchors[i - 1].hour) / (anchors[i].hour - anchors[i - 1].hour);
            return anchors[i - 1].value + f * (anchors[i].value - anchors[i - 1].value);
        }
    }
    return anchors[count - 1].value;
}

double h0_shape(std::size_t t) {
    std::size_t t_year = t % kYearSteps;
    std::size_t day = t_year / 96;
    double hour = static_cast<double>(t_year % 96) * kStepHours;
    int dow = static_cast<int>(day % 7); // day 0 is a Monday
    double base;
    if (dow == 5)
        base = interpolate(kSaturday, std::size(kSaturday), hour);
    else if (dow == 6)
        base = interpolate(kSunday, std::size(kSunday), hour);
    else
        base = interpolate(kWeekday, std::size(kWeekday), hour);
    // mild winter/summer envelope, peak around early January
    double season = 1.0 + 0.18 * std::cos(2.0 * kPi * (static_cast<double>(day) - 10.0) / 365.0);
    return base * season;
}

double h0_scale() {
    static double scale = [] {
        double energy = 0.0;
        for (std::size_t t = 0; t < kYearSteps; ++t) energy += h0_shape(t) * kStepHours;
        return 1000.0 / energy;
    }();
    return scale;
}

double tan_phi(double cos_phi) {
    if (cos_phi <= 0.0 || cos_phi > 1.0)
        throw ValidationError("cos_phi must be in (0, 1]");
    return std::tan(std::acos(cos_phi));
}

const Prosumer& pv_reference_plant(const GridTopology& grid, const PseudoConfig& cfg) {
    if (!cfg.pv_reference.empty()) return grid.prosumer(cfg.pv_reference);
    const Prosumer* best = nullptr;
    for (const auto& p : grid.prosumers()) {
        if (p.category != ProsumerCategory::pv_plant) continue;
        if (!best || p.installed_power_kw > best->installed_power_kw ||
            (p.installed_power_kw == best->installed_power_kw && p.id < best->id))
            best = &p;
    }
    if (!best) throw ValidationError("grid has no PV plant to act as pseudo reference");
    return *best;
}

double reference_for(Quantity q, double truth) {
    if (q == Quantity::v_mag) return 1.0; // nominal voltage in per-unit
    return std::max(std::abs(truth), kReferenceFloorPu);
}

double truth_for_spec(const NetworkModel& net, const MeasurementSpec& spec,
                      const PowerFlowSolution& truth, std::size_t t) {
    const GridTopology& grid = net.grid();
    switch (spec.quantity) {
        case Quantity::v_mag:
            return truth.v_mag[net.node_of(spec.element)];
        case Quantity::p_flow:
        case Quantity::q_flow:
        case Quantity::i_flow: {
            const BranchFlow& f = truth.flows[net.branch_of_line(spec.element)];
            if (spec.quantity == Quantity::p_flow)
                return spec.end == LineEnd::from_end ? f.p_from_pu : f.p_to_pu;
            if (spec.quantity == Quantity::q_flow)
                return spec.end == LineEnd::from_end ? f.q_from_pu : f.q_to_pu;
            return spec.end == LineEnd::from_end ? f.i_from_pu : f.i_to_pu;
        }
        case Quantity::p_inj:
        case Quantity::q_inj:
        case Quantity::i_inj: {
            if (spec.prosumer.empty()) {
                // whole-node injection (transformer measurement)
                int node = net.node_of(spec.element);
                if (spec.quantity == Quantity::p_inj) return truth.p_inj[node];
                if (spec.quantity == Quantity::q_inj) return truth.q_inj[node];
                double s = std::hypot(truth.p_inj[node], truth.q_inj[node]);
                return s / truth.v_mag[node];
            }
            const Prosumer& p = grid.prosumer(spec.prosumer);
            const auto& series = grid.profiles().series(p.profile);
            if (t >= series.size())
                throw ValidationError("profile " + p.profile + " covers " +
                                      std::to_string(series.size()) + " < " +
                                      std::to_string(t + 1) + " steps");
            double base_kw = grid.base_va() / 1000.0;
            double p_pu = -series[t].p_kw / base_kw; // injection convention
            double q_pu = -series[t].q_kvar / base_kw;
            if (spec.quantity == Quantity::p_inj) return p_pu;
            if (spec.quantity == Quantity::q_inj) return q_pu;
            return std::hypot(p_pu, q_pu) / truth.v_mag[net.node_of(p.bus)];
        }
    }
    throw Error("unhandled quantity");
}

} // namespace

double bundled_h0_kw(std::size_t t) { return h0_shape(t) * h0_scale(); }

double bundled_h0_annual_kwh() { return 1000.0; }

double noise_draw(double true_value, double relative_max_error_pct, double reference_magnitude,
                  RngStream& rng, bool clamp) {
    if (relative_max_error_pct <= 0.0)
        throw ValidationError("relative maximum error must be positive");
    if (reference_magnitude <= 0.0)
        throw ValidationError("reference magnitude must be positive");
    double sigma = relative_max_error_pct / 100.0 * reference_magnitude / 3.0;
    double e = sigma * rng.next_gaussian();
    if (clamp) e = std::clamp(e, -3.0 * sigma, 3.0 * sigma);
    return true_value + e;
}

std::vector<Measurement> synthesize_real(const NetworkModel& net,
                                         const std::vector<MeasurementSpec>& specs,
                                         const PowerFlowSolution& truth,
                                         std::uint64_t master_seed, std::size_t t,
                                         const PseudoConfig& cfg) {
    std::vector<Measurement> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        double value = truth_for_spec(net, spec, truth, t);
        double reference = reference_for(spec.quantity, value);
        double sigma = spec.max_error_pct / 100.0 * reference / 3.0;

        RngStream rng(substream_seed(master_seed, t, RngStream::hash_string(spec.key())));
        Measurement meas;
        meas.quantity = spec.quantity;
        meas.element = spec.element;
        meas.end = spec.end;
        meas.prosumer = spec.prosumer;
        meas.value_pu = noise_draw(value, spec.max_error_pct, reference, rng, cfg.clamp_noise);
        meas.sigma_pu = sigma;
        meas.origin = MeasurementOrigin::real;
        out.push_back(std::move(meas));
    }
    return out;
}

std::pair<double, double> pseudo_load_kw(const GridTopology& grid, const Prosumer& prosumer,
                                         std::size_t t, const PseudoConfig& cfg) {
    double h0, h0_annual;
    if (cfg.h0_profile.empty()) {
        h0 = bundled_h0_kw(t);
        h0_annual = bundled_h0_annual_kwh();
    } else {
        const auto& series = grid.profiles().series(cfg.h0_profile);
        h0 = series[t % series.size()].p_kw;
        h0_annual = 0.0;
        for (const auto& pt : series) h0_annual += pt.p_kw * kStepHours;
        // an explicit profile shorter than a year is treated as periodic
        h0_annual *= static_cast<double>(kYearSteps) / static_cast<double>(series.size());
        if (h0_annual <= 0.0)
            throw ValidationError("H0 profile " + cfg.h0_profile + " has non-positive energy");
    }
    double p = h0 * prosumer.annual_energy_kwh / h0_annual;
    return {p, p * tan_phi(cfg.cos_phi)};
}

std::pair<double, double> pseudo_pv_kw(const GridTopology& grid, const Prosumer& plant,
                                       std::size_t t, const PseudoConfig& cfg) {
    const Prosumer& reference = pv_reference_plant(grid, cfg);
    const auto& series = grid.profiles().series(reference.profile);
    if (t >= series.size())
        throw ValidationError("profile " + reference.profile + " covers " +
                              std::to_string(series.size()) + " < " + std::to_string(t + 1) +
                              " steps");
    double scale = plant.installed_power_kw / reference.installed_power_kw;
    double p = series[t].p_kw * scale;
    // sign-preserving reactive value from the constant power factor
    return {p, p * tan_phi(cfg.cos_phi)};
}

Measurement pseudo_slack_voltage(const NetworkModel& net, const PowerFlowSolution& truth,
                                 const PseudoConfig& cfg) {
    const BusId& slack = net.grid().transformer().slack_bus;
    Measurement meas;
    meas.quantity = Quantity::v_mag;
    meas.element = slack;
    meas.value_pu = truth.v_mag[net.slack_node()];
    meas.sigma_pu = cfg.sigma_slack_v_rel_pct / 100.0; // of nominal, 1 pu
    meas.origin = MeasurementOrigin::pseudo;
    return meas;
}

std::vector<Measurement> assemble_measurement_vector(const NetworkModel& net,
                                                     const std::vector<MeasurementSpec>& specs,
                                                     const PowerFlowSolution& truth,
                                                     const PseudoConfig& cfg,
                                                     std::uint64_t master_seed, std::size_t t) {
    const GridTopology& grid = net.grid();
    std::vector<Measurement> out = synthesize_real(net, specs, truth, master_seed, t, cfg);

    std::set<ProsumerId> metered;
    for (const auto& s : specs)
        if (!s.prosumer.empty()) metered.insert(s.prosumer);

    double base_kw = grid.base_va() / 1000.0;

    // mean absolute PV reference power, for the sigma floor of PV pseudos
    double pv_ref_mean_abs_kw = 0.0;
    bool have_pv = false;
    for (const auto& p : grid.prosumers())
        if (p.category == ProsumerCategory::pv_plant) have_pv = true;
    if (have_pv) {
        const Prosumer& reference = pv_reference_plant(grid, cfg);
        const auto& series = grid.profiles().series(reference.profile);
        for (const auto& pt : series) pv_ref_mean_abs_kw += std::abs(pt.p_kw);
        pv_ref_mean_abs_kw /= static_cast<double>(series.size());
    }

    for (const auto& p : grid.prosumers()) {
        if (metered.count(p.id)) continue;

        double p_kw, q_kvar, rel_pct, mean_abs_kw;
        if (p.category == ProsumerCategory::pv_plant) {
            std::tie(p_kw, q_kvar) = pseudo_pv_kw(grid, p, t, cfg);
            rel_pct = cfg.sigma_pv_rel_pct;
            mean_abs_kw =
                pv_ref_mean_abs_kw * p.installed_power_kw /
                pv_reference_plant(grid, cfg).installed_power_kw;
        } else {
            std::tie(p_kw, q_kvar) = pseudo_load_kw(grid, p, t, cfg);
            rel_pct = cfg.sigma_load_rel_pct;
            mean_abs_kw = p.annual_energy_kwh / 8760.0; // H0 scaling preserves the annual energy
        }

        double floor_pu =
            std::max(cfg.sigma_floor_frac_of_mean * mean_abs_kw / base_kw, kMinSigmaPu);
        double tphi = tan_phi(cfg.cos_phi);

        Measurement mp;
        mp.quantity = Quantity::p_inj;
        mp.element = p.bus;
        mp.prosumer = p.id;
        mp.value_pu = -p_kw / base_kw;
        mp.sigma_pu = std::max(rel_pct / 100.0 * std::abs(mp.value_pu) / 3.0, floor_pu);
        mp.origin = MeasurementOrigin::pseudo;
        out.push_back(mp);

        Measurement mq;
        mq.quantity = Quantity::q_inj;
        mq.element = p.bus;
        mq.prosumer = p.id;
        mq.value_pu = -q_kvar / base_kw;
        mq.sigma_pu = std::max(rel_pct / 100.0 * std::abs(mq.value_pu) / 3.0, floor_pu * tphi);
        mq.origin = MeasurementOrigin::pseudo;
        out.push_back(mq);
    }

    out.push_back(pseudo_slack_voltage(net, truth, cfg));
    return out;
}

void dump_measurements_csv(const std::vector<std::vector<Measurement>>& per_timestep,
                           std::size_t t_begin, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < per_timestep.size(); ++k) {
        for (const auto& m : per_timestep[k]) {
            std::string location = m.element;
            if (!m.prosumer.empty()) location += "/" + m.prosumer;
            if (m.quantity == Quantity::p_flow || m.quantity == Quantity::q_flow ||
                m.quantity == Quantity::i_flow)
                location += "@" + to_string(m.end);
            rows.push_back({std::to_string(t_begin + k), to_string(m.quantity), location,
                            csv::format_number(m.value_pu), csv::format_number(m.sigma_pu),
                            m.origin == MeasurementOrigin::real ? "real" : "pseudo"});
        }
    }
    csv::write_file(path, {"t", "quantity", "location", "value", "sigma", "origin"}, rows);
}

} // namespace lvse
