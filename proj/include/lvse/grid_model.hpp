#ifndef LVSE_GRID_MODEL_HPP
#define LVSE_GRID_MODEL_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lvse/common.hpp"

namespace lvse {

enum class BusKind {
    slack_coupling,
    substation_busbar,
    cabinet_busbar,
    junction,
    connection_point,
};

enum class ProsumerCategory {
    household,
    pv_plant,
    electric_vehicle,
    heat_pump,
    other,
};

std::string to_string(BusKind k);
std::string to_string(ProsumerCategory c);
BusKind bus_kind_from_string(const std::string& s);
ProsumerCategory prosumer_category_from_string(const std::string& s);

struct Bus {
    BusId id;
    BusKind kind = BusKind::junction;
    double nominal_voltage_v = 0.0;
};

struct Line {
    LineId id;
    BusId from_bus;
    BusId to_bus;
    double resistance_ohm = 0.0;
    double reactance_ohm = 0.0;
    double thermal_limit_a = 0.0; // I_th,max

    double impedance_magnitude_ohm() const;
};

struct CableCabinet {
    CabinetId id;
    BusId busbar;
    std::vector<LineId> feeder_lines; // incident to busbar
};

struct Prosumer {
    ProsumerId id;
    BusId bus;
    ProsumerCategory category = ProsumerCategory::household;
    double annual_energy_kwh = 0.0; // consumption
    double installed_power_kw = 0.0; // generation capacity, 0 for pure loads
    ProfileId profile;
};

struct ProfilePoint {
    double p_kw = 0.0;   // consumption positive, generation negative
    double q_kvar = 0.0;
};

// Fixed-length (P, Q) series at 15-minute resolution, one per profile id.
// All series in a study share the same length.
class ProfileLibrary {
public:
    ProfileLibrary() = default;
    explicit ProfileLibrary(std::map<ProfileId, std::vector<ProfilePoint>> series);

    bool contains(const ProfileId& id) const;
    const std::vector<ProfilePoint>& series(const ProfileId& id) const;
    std::size_t length() const { return length_; } // T
    bool empty() const { return series_.empty(); }
    const std::map<ProfileId, std::vector<ProfilePoint>>& all() const { return series_; }

private:
    std::map<ProfileId, std::vector<ProfilePoint>> series_;
    std::size_t length_ = 0;
};

struct TransformerRecord {
    BusId slack_bus;          // MV point of common coupling, kind slack_coupling
    BusId substation_busbar;  // LV busbar, kind substation_busbar
    double rating_va = 0.0;
    // Optional series impedance of the MV/LV coupling. When zero and no line
    // joins the two buses, the coupling is an ideal link (the buses form one
    // electrical node).
    double series_r_ohm = 0.0;
    double series_x_ohm = 0.0;
};

// Immutable, validated electrical model of one low-voltage grid.
// Safe to share read-only across parallel workers.
class GridTopology {
public:
    GridTopology(std::vector<Bus> buses, std::vector<Line> lines,
                 std::vector<CableCabinet> cabinets, std::vector<Prosumer> prosumers,
                 ProfileLibrary profiles, TransformerRecord transformer, double base_va,
                 std::string name = {});

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const std::vector<CableCabinet>& cabinets() const { return cabinets_; }
    const std::vector<Prosumer>& prosumers() const { return prosumers_; }
    const ProfileLibrary& profiles() const { return profiles_; }
    const TransformerRecord& transformer() const { return transformer_; }
    double base_va() const { return base_va_; }
    const std::string& name() const { return name_; }

    bool has_bus(const BusId& id) const;
    const Bus& bus(const BusId& id) const;
    const Line& line(const LineId& id) const;
    const Prosumer& prosumer(const ProsumerId& id) const;
    const CableCabinet& cabinet(const CabinetId& id) const;
    std::vector<const Line*> lines_at(const BusId& bus) const;
    std::vector<const Prosumer*> prosumers_at(const BusId& bus) const;

    // Shortest-path distance where each edge weighs the line's impedance
    // magnitude |R + jX|; the transformer coupling contributes its own
    // impedance magnitude (zero for an ideal link). Zero for from == to.
    double electrical_distance(const BusId& from, const BusId& to) const;

    // Feeder index of a bus: connected components left after removing the
    // substation busbar, the slack-side component excluded, ordered by
    // smallest contained bus id. Throws for the substation busbar, the
    // slack coupling, and buses on the slack side.
    int feeder_of(const BusId& bus) const;
    int feeder_count() const { return feeder_count_; }

    // True when the transformer is an ideal link and the two coupling buses
    // are one electrical node.
    bool coupling_merged() const { return coupling_merged_; }

private:
    void validate();
    void compute_feeders();

    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::vector<CableCabinet> cabinets_;
    std::vector<Prosumer> prosumers_;
    ProfileLibrary profiles_;
    TransformerRecord transformer_;
    double base_va_ = 0.0;
    std::string name_;

    std::map<BusId, std::size_t> bus_index_;
    std::map<LineId, std::size_t> line_index_;
    std::map<ProsumerId, std::size_t> prosumer_index_;
    std::map<CabinetId, std::size_t> cabinet_index_;
    std::map<BusId, int> feeder_of_bus_;
    int feeder_count_ = 0;
    bool coupling_merged_ = false;
};

// Loads buses.csv, lines.csv, cabinets.csv, prosumers.csv, profiles.csv and
// grid.csv from a directory. Every validation failure names the offending
// record.
GridTopology load_grid(const std::filesystem::path& dir);

// Inverse of load_grid; load_grid(save_grid(g)) reproduces g.
void save_grid(const GridTopology& grid, const std::filesystem::path& dir);

} // namespace lvse

#endif
