#include "lvse/sensor_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lvse/csv.hpp"
#include "lvse/rng.hpp"

namespace lvse {

std::string to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::digi_ons: return "digiONS";
        case DeviceKind::i_ons: return "iONS";
        case DeviceKind::ikvs: return "iKVS";
        case DeviceKind::imsys: return "iMSys";
    }
    return "?";
}

std::string to_string(SubstationDevice d) {
    switch (d) {
        case SubstationDevice::none: return "none";
        case SubstationDevice::digions: return "digions";
        case SubstationDevice::ions: return "ions";
    }
    return "?";
}

SubstationDevice substation_device_from_string(const std::string& s) {
    if (s == "none" || s.empty() || s == "-") return SubstationDevice::none;
    if (s == "digions") return SubstationDevice::digions;
    if (s == "ions") return SubstationDevice::ions;
    throw ValidationError("unknown substation device '" + s + "'");
}

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::v_mag: return "v_mag";
        case Quantity::p_inj: return "p_inj";
        case Quantity::q_inj: return "q_inj";
        case Quantity::i_inj: return "i_inj";
        case Quantity::p_flow: return "p_flow";
        case Quantity::q_flow: return "q_flow";
        case Quantity::i_flow: return "i_flow";
    }
    return "?";
}

std::string to_string(LineEnd e) { return e == LineEnd::from_end ? "from" : "to"; }

std::string MeasurementSpec::key() const {
    return to_string(quantity) + "|" + element + "|" +
           (quantity == Quantity::p_flow || quantity == Quantity::q_flow ||
                    quantity == Quantity::i_flow
                ? to_string(end)
                : std::string("-")) +
           "|" + prosumer;
}

namespace {

std::size_t target_count(double pct, std::size_t maximum) {
    if (pct < 0.0 || pct > 100.0)
        throw ValidationError("percentage " + std::to_string(pct) + " outside [0, 100]");
    return static_cast<std::size_t>(std::floor(pct / 100.0 * static_cast<double>(maximum) + 0.5));
}

// Deterministic Fisher-Yates with the project RNG.
template <typename T>
void shuffle_ids(std::vector<T>& ids, std::uint64_t seed) {
    RngStream rng(RngStream::mix(seed, 0x616c6c6fULL));
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.next_below(i)]);
}

} // namespace

std::vector<CabinetId> allocate_ikvs(const GridTopology& grid, double pct, std::uint64_t seed) {
    std::size_t target = target_count(pct, grid.cabinets().size());

    struct Entry {
        CabinetId id;
        double distance;
        std::size_t feeders;
    };
    std::vector<Entry> entries;
    const BusId& busbar = grid.transformer().substation_busbar;
    for (const auto& c : grid.cabinets())
        entries.push_back({c.id, grid.electrical_distance(c.busbar, busbar), c.feeder_lines.size()});

    std::vector<CabinetId> selected;
    std::set<CabinetId> chosen;
    auto take = [&](const CabinetId& id) {
        if (chosen.insert(id).second) selected.push_back(id);
    };

    // Tier 1: one leader per distinct electrical distance, farthest first
    // (ties for a rank break by ascending id). Equal-distance followers are
    // left for the later tiers.
    {
        std::map<double, std::vector<CabinetId>, std::greater<>> by_distance;
        for (const auto& e : entries) by_distance[e.distance].push_back(e.id);
        for (auto& [dist, ids] : by_distance) {
            if (selected.size() >= target) break;
            std::sort(ids.begin(), ids.end());
            take(ids.front());
        }
    }

    // Tier 2: among the rest, one leader per distinct feeder count, highest first.
    {
        std::map<std::size_t, std::vector<CabinetId>, std::greater<>> by_feeders;
        for (const auto& e : entries)
            if (!chosen.count(e.id)) by_feeders[e.feeders].push_back(e.id);
        for (auto& [feeders, ids] : by_feeders) {
            if (selected.size() >= target) break;
            std::sort(ids.begin(), ids.end());
            take(ids.front());
        }
    }

    // Tier 3: seeded uniform order over the remainder.
    if (selected.size() < target) {
        std::vector<CabinetId> rest;
        for (const auto& e : entries)
            if (!chosen.count(e.id)) rest.push_back(e.id);
        std::sort(rest.begin(), rest.end());
        shuffle_ids(rest, seed);
        for (const auto& id : rest) {
            if (selected.size() >= target) break;
            take(id);
        }
    }
    return selected;
}

std::vector<ProsumerId> allocate_imsys(const GridTopology& grid, double pct, std::uint64_t seed) {
    std::size_t target = target_count(pct, grid.prosumers().size());

    std::vector<ProsumerId> selected;
    std::set<ProsumerId> chosen;
    auto take = [&](const ProsumerId& id) {
        if (chosen.insert(id).second) selected.push_back(id);
    };

    // Tier 1: annual consumption above the 6000 kWh obligation threshold,
    // descending by consumption (ties by ascending id).
    {
        std::vector<const Prosumer*> big;
        for (const auto& p : grid.prosumers())
            if (p.annual_energy_kwh > 6000.0) big.push_back(&p);
        std::sort(big.begin(), big.end(), [](const Prosumer* a, const Prosumer* b) {
            if (a->annual_energy_kwh != b->annual_energy_kwh)
                return a->annual_energy_kwh > b->annual_energy_kwh;
            return a->id < b->id;
        });
        for (const auto* p : big) {
            if (selected.size() >= target) break;
            take(p->id);
        }
    }

    // Tier 2: electric vehicles by ascending id.
    {
        std::vector<ProsumerId> evs;
        for (const auto& p : grid.prosumers())
            if (p.category == ProsumerCategory::electric_vehicle && !chosen.count(p.id))
                evs.push_back(p.id);
        std::sort(evs.begin(), evs.end());
        for (const auto& id : evs) {
            if (selected.size() >= target) break;
            take(id);
        }
    }

    // Tier 3: seeded uniform order over the rest.
    if (selected.size() < target) {
        std::vector<ProsumerId> rest;
        for (const auto& p : grid.prosumers())
            if (!chosen.count(p.id)) rest.push_back(p.id);
        std::sort(rest.begin(), rest.end());
        shuffle_ids(rest, seed);
        for (const auto& id : rest) {
            if (selected.size() >= target) break;
            take(id);
        }
    }
    return selected;
}

namespace {

// Maximum tolerated errors per device class (percent of reference).
struct ErrorTable {
    double v, i, p, q;
};

ErrorTable errors_for(DeviceKind kind) {
    switch (kind) {
        case DeviceKind::digi_ons:
        case DeviceKind::i_ons:
        case DeviceKind::ikvs: return {0.5, 1.0, 0.5, 1.0};
        case DeviceKind::imsys: return {0.5, 1.0, 1.0, 2.0};
    }
    return {0.5, 1.0, 0.5, 1.0};
}

LineEnd end_at(const Line& line, const BusId& bus) {
    return line.from_bus == bus ? LineEnd::from_end : LineEnd::to_end;
}

void add_flow_specs(std::vector<MeasurementSpec>& out, const Line& line, const BusId& at_bus,
                    DeviceKind device) {
    ErrorTable err = errors_for(device);
    LineEnd end = end_at(line, at_bus);
    out.push_back({Quantity::p_flow, line.id, end, {}, err.p, device});
    out.push_back({Quantity::q_flow, line.id, end, {}, err.q, device});
    out.push_back({Quantity::i_flow, line.id, end, {}, err.i, device});
}

} // namespace

std::vector<MeasurementSpec> expand_to_specs(const GridTopology& grid,
                                             const EquipmentVariant& variant) {
    std::vector<MeasurementSpec> specs;
    const auto& trafo = grid.transformer();

    if (variant.substation != SubstationDevice::none) {
        DeviceKind device = variant.substation == SubstationDevice::digions ? DeviceKind::digi_ons
                                                                            : DeviceKind::i_ons;
        ErrorTable err = errors_for(device);
        // transformer P, Q, I: the whole-node injection at the coupling point
        specs.push_back({Quantity::p_inj, trafo.slack_bus, LineEnd::from_end, {}, err.p, device});
        specs.push_back({Quantity::q_inj, trafo.slack_bus, LineEnd::from_end, {}, err.q, device});
        specs.push_back({Quantity::i_inj, trafo.slack_bus, LineEnd::from_end, {}, err.i, device});
        specs.push_back(
            {Quantity::v_mag, trafo.substation_busbar, LineEnd::from_end, {}, err.v, device});

        if (device == DeviceKind::digi_ons) {
            for (const Line* l : grid.lines_at(trafo.substation_busbar)) {
                // the coupling line toward the MV side is not a feeder
                if (l->from_bus == trafo.slack_bus || l->to_bus == trafo.slack_bus) continue;
                add_flow_specs(specs, *l, trafo.substation_busbar, device);
            }
        }
    }

    for (const auto& cab_id : allocate_ikvs(grid, variant.ikvs_pct, variant.allocation_seed)) {
        const CableCabinet& cab = grid.cabinet(cab_id);
        ErrorTable err = errors_for(DeviceKind::ikvs);
        specs.push_back(
            {Quantity::v_mag, cab.busbar, LineEnd::from_end, {}, err.v, DeviceKind::ikvs});
        for (const auto& lid : cab.feeder_lines)
            add_flow_specs(specs, grid.line(lid), cab.busbar, DeviceKind::ikvs);
    }

    for (const auto& pid : allocate_imsys(grid, variant.imsys_pct, variant.allocation_seed)) {
        const Prosumer& p = grid.prosumer(pid);
        ErrorTable err = errors_for(DeviceKind::imsys);
        specs.push_back({Quantity::p_inj, p.bus, LineEnd::from_end, pid, err.p, DeviceKind::imsys});
        specs.push_back({Quantity::q_inj, p.bus, LineEnd::from_end, pid, err.q, DeviceKind::imsys});
        specs.push_back({Quantity::i_inj, p.bus, LineEnd::from_end, pid, err.i, DeviceKind::imsys});
        specs.push_back({Quantity::v_mag, p.bus, LineEnd::from_end, {}, err.v, DeviceKind::imsys});
    }

    // de-dup on (quantity, location); the smaller maximum error wins
    std::map<std::string, MeasurementSpec> unique;
    for (const auto& s : specs) {
        auto [it, inserted] = unique.emplace(s.key(), s);
        if (!inserted && s.max_error_pct < it->second.max_error_pct) it->second = s;
    }
    std::vector<MeasurementSpec> out;
    out.reserve(unique.size());
    for (auto& [key, s] : unique) out.push_back(std::move(s));
    return out;
}

void dump_allocation_csv(const GridTopology& grid, const EquipmentVariant& variant,
                         const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    if (variant.substation != SubstationDevice::none)
        rows.push_back({variant.substation == SubstationDevice::digions ? "digiONS" : "iONS",
                        grid.transformer().substation_busbar});
    for (const auto& id : allocate_ikvs(grid, variant.ikvs_pct, variant.allocation_seed))
        rows.push_back({"iKVS", id});
    for (const auto& id : allocate_imsys(grid, variant.imsys_pct, variant.allocation_seed))
        rows.push_back({"iMSys", id});
    csv::write_file(path, {"device_kind", "location_id"}, rows);
}

} // namespace lvse
