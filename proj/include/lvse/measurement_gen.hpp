#ifndef LVSE_MEASUREMENT_GEN_HPP
#define LVSE_MEASUREMENT_GEN_HPP

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "lvse/power_flow.hpp"
#include "lvse/rng.hpp"
#include "lvse/sensor_allocation.hpp"

namespace lvse {

enum class MeasurementOrigin { real, pseudo };

// One entry of the measurement vector fed to the estimator. Values are in
// per-unit; injections follow the network convention (generation positive).
struct Measurement {
    Quantity quantity = Quantity::v_mag;
    std::string element;
    LineEnd end = LineEnd::from_end;
    ProsumerId prosumer; // injection attribution; empty = whole bus
    double value_pu = 0.0;
    double sigma_pu = 0.0;
    MeasurementOrigin origin = MeasurementOrigin::real;
};

struct PseudoConfig {
    double cos_phi = 0.95;
    // Relative spreads of the pseudo values, interpreted like the device
    // table: sigma = rel/100 * |value| / 3, floored per prosumer at
    // sigma_floor_frac_of_mean of its mean absolute pseudo power.
    double sigma_load_rel_pct = 50.0;
    double sigma_pv_rel_pct = 20.0;
    double sigma_floor_frac_of_mean = 0.10;
    // Slack voltage pseudo measurement: sigma as a fraction of nominal.
    double sigma_slack_v_rel_pct = 0.1;
    bool clamp_noise = true; // clamp real-measurement noise at +-3 sigma
    // Override for the household scaling profile; empty selects the bundled
    // synthetic H0 approximation.
    ProfileId h0_profile;
    // Override for the PV reference plant; empty selects the plant with the
    // highest installed power (ties by ascending id).
    ProsumerId pv_reference;
};

// Bundled household scaling profile: weekday/weekend day shape with a
// seasonal envelope, 15-minute steps, normalized to 1000 kWh over a
// 35040-step year. A stand-in for licensed standard load profile data.
double bundled_h0_kw(std::size_t t);
double bundled_h0_annual_kwh(); // 1000 by construction

// Gaussian draw around a true value. sigma = (relative_max_error/100) *
// reference_magnitude / 3 per the 3-sigma reading of the device error
// bounds; the draw is clamped to +-3 sigma when clamp is set.
double noise_draw(double true_value, double relative_max_error_pct, double reference_magnitude,
                  RngStream& rng, bool clamp = true);

// Noisy measurement per spec from the power-flow truth at one timestep.
// Reference magnitude is nominal (1 pu) for voltages and the instantaneous
// true magnitude floored at 1e-4 pu for P, Q, I.
std::vector<Measurement> synthesize_real(const NetworkModel& net,
                                         const std::vector<MeasurementSpec>& specs,
                                         const PowerFlowSolution& truth,
                                         std::uint64_t master_seed, std::size_t t,
                                         const PseudoConfig& cfg = {});

// H0-scaled load pseudo value: P = h0(t) * annual_energy / E_h0_year,
// Q = P * tan(arccos cos_phi). Consumption positive.
std::pair<double, double> pseudo_load_kw(const GridTopology& grid, const Prosumer& prosumer,
                                         std::size_t t, const PseudoConfig& cfg);

// PV pseudo value: the reference plant's true profile scaled by the
// installed-power ratio; Q from the constant power factor. Generation
// negative (consumption convention).
std::pair<double, double> pseudo_pv_kw(const GridTopology& grid, const Prosumer& plant,
                                       std::size_t t, const PseudoConfig& cfg);

// Exact slack-bus voltage magnitude taken from the power flow (the
// overlying MV grid is treated as fully observable), with a small sigma.
Measurement pseudo_slack_voltage(const NetworkModel& net, const PowerFlowSolution& truth,
                                 const PseudoConfig& cfg);

// Full measurement vector for one timestep: real measurements for the
// specs, a pseudo (P, Q) injection pair for every prosumer not covered by
// an iMSys, and the slack voltage pseudo measurement.
std::vector<Measurement> assemble_measurement_vector(const NetworkModel& net,
                                                     const std::vector<MeasurementSpec>& specs,
                                                     const PowerFlowSolution& truth,
                                                     const PseudoConfig& cfg,
                                                     std::uint64_t master_seed, std::size_t t);

void dump_measurements_csv(const std::vector<std::vector<Measurement>>& per_timestep,
                           std::size_t t_begin, const std::filesystem::path& path);

} // namespace lvse

#endif
