#ifndef LVSE_SENSOR_ALLOCATION_HPP
#define LVSE_SENSOR_ALLOCATION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lvse/grid_model.hpp"

namespace lvse {

enum class DeviceKind { digi_ons, i_ons, ikvs, imsys };
enum class SubstationDevice { none, digions, ions };

std::string to_string(DeviceKind k);
std::string to_string(SubstationDevice d);
SubstationDevice substation_device_from_string(const std::string& s);

// One rollout strategy: which substation device, what share of cabinets get
// an iKVS and what share of connection points get an iMSys. Percentages are
// relative to the maximum installable count.
struct EquipmentVariant {
    std::string id;
    SubstationDevice substation = SubstationDevice::none;
    double ikvs_pct = 0.0;   // [0, 100], of cable cabinets
    double imsys_pct = 0.0;  // [0, 100], of prosumer connection points
    std::uint64_t allocation_seed = 0;
};

enum class Quantity { v_mag, p_inj, q_inj, i_inj, p_flow, q_flow, i_flow };
enum class LineEnd { from_end, to_end };

std::string to_string(Quantity q);
std::string to_string(LineEnd e);

// One quantity a device observes: a bus voltage, a line-end flow or a bus
// injection. Injection specs carry the metered prosumer where the device
// meters a single customer rather than the whole bus.
struct MeasurementSpec {
    Quantity quantity = Quantity::v_mag;
    std::string element;              // bus id, or line id for flows
    LineEnd end = LineEnd::from_end;  // flows only
    ProsumerId prosumer;              // injection attribution; empty = whole bus
    double max_error_pct = 0.0;       // maximum tolerated error, 3-sigma bound
    DeviceKind device = DeviceKind::imsys;

    // Identity for de-duplication and noise substreams (device and error excluded).
    std::string key() const;
};

// Cabinet selection: target count is round-half-up(pct/100 * cabinets).
// Priority tiers fill in order: (1) one leader per distinct electrical
// distance to the substation busbar, farthest first; (2) one leader per
// distinct feeder count among the rest, highest first; (3) seeded uniform
// random over the remainder. Ties within a tier break by ascending id.
std::vector<CabinetId> allocate_ikvs(const GridTopology& grid, double pct, std::uint64_t seed);

// Prosumer selection: (1) annual consumption above 6000 kWh, descending;
// (2) electric vehicles by ascending id; (3) seeded uniform random.
std::vector<ProsumerId> allocate_imsys(const GridTopology& grid, double pct, std::uint64_t seed);

// Expands a variant into concrete measurement specs (device catalog plus
// allocation), de-duplicated on (quantity, location); the smaller maximum
// error wins a conflict. Output is canonically sorted.
std::vector<MeasurementSpec> expand_to_specs(const GridTopology& grid,
                                             const EquipmentVariant& variant);

void dump_allocation_csv(const GridTopology& grid, const EquipmentVariant& variant,
                         const std::filesystem::path& path);

} // namespace lvse

#endif
