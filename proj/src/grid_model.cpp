#include "lvse/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "lvse/csv.hpp"

namespace lvse {

std::string to_string(BusKind k) {
    switch (k) {
        case BusKind::slack_coupling: return "slack_coupling";
        case BusKind::substation_busbar: return "substation_busbar";
        case BusKind::cabinet_busbar: return "cabinet_busbar";
        case BusKind::junction: return "junction";
        case BusKind::connection_point: return "connection_point";
    }
    return "?";
}

std::string to_string(ProsumerCategory c) {
    switch (c) {
        case ProsumerCategory::household: return "household";
        case ProsumerCategory::pv_plant: return "pv_plant";
        case ProsumerCategory::electric_vehicle: return "electric_vehicle";
        case ProsumerCategory::heat_pump: return "heat_pump";
        case ProsumerCategory::other: return "other";
    }
    return "?";
}

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "slack_coupling") return BusKind::slack_coupling;
    if (s == "substation_busbar") return BusKind::substation_busbar;
    if (s == "cabinet_busbar") return BusKind::cabinet_busbar;
    if (s == "junction") return BusKind::junction;
    if (s == "connection_point") return BusKind::connection_point;
    throw ValidationError("unknown bus kind '" + s + "'");
}

ProsumerCategory prosumer_category_from_string(const std::string& s) {
    if (s == "household") return ProsumerCategory::household;
    if (s == "pv_plant") return ProsumerCategory::pv_plant;
    if (s == "electric_vehicle") return ProsumerCategory::electric_vehicle;
    if (s == "heat_pump") return ProsumerCategory::heat_pump;
    if (s == "other") return ProsumerCategory::other;
    throw ValidationError("unknown prosumer category '" + s + "'");
}

double Line::impedance_magnitude_ohm() const {
    return std::hypot(resistance_ohm, reactance_ohm);
}

ProfileLibrary::ProfileLibrary(std::map<ProfileId, std::vector<ProfilePoint>> series)
    : series_(std::move(series)) {
    for (const auto& [id, s] : series_) {
        if (s.empty()) throw ValidationError("profile " + id + " is empty");
        if (length_ == 0) length_ = s.size();
        if (s.size() != length_)
            throw ValidationError("profile " + id + " has length " + std::to_string(s.size()) +
                                  ", expected " + std::to_string(length_));
    }
}

bool ProfileLibrary::contains(const ProfileId& id) const { return series_.count(id) > 0; }

const std::vector<ProfilePoint>& ProfileLibrary::series(const ProfileId& id) const {
    auto it = series_.find(id);
    if (it == series_.end()) throw ValidationError("unknown profile " + id);
    return it->second;
}

GridTopology::GridTopology(std::vector<Bus> buses, std::vector<Line> lines,
                           std::vector<CableCabinet> cabinets, std::vector<Prosumer> prosumers,
                           ProfileLibrary profiles, TransformerRecord transformer, double base_va,
                           std::string name)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      cabinets_(std::move(cabinets)),
      prosumers_(std::move(prosumers)),
      profiles_(std::move(profiles)),
      transformer_(std::move(transformer)),
      base_va_(base_va),
      name_(std::move(name)) {
    validate();
    compute_feeders();
}

bool GridTopology::has_bus(const BusId& id) const { return bus_index_.count(id) > 0; }

const Bus& GridTopology::bus(const BusId& id) const {
    auto it = bus_index_.find(id);
    if (it == bus_index_.end()) throw ValidationError("unknown bus " + id);
    return buses_[it->second];
}

const Line& GridTopology::line(const LineId& id) const {
    auto it = line_index_.find(id);
    if (it == line_index_.end()) throw ValidationError("unknown line " + id);
    return lines_[it->second];
}

const Prosumer& GridTopology::prosumer(const ProsumerId& id) const {
    auto it = prosumer_index_.find(id);
    if (it == prosumer_index_.end()) throw ValidationError("unknown prosumer " + id);
    return prosumers_[it->second];
}

const CableCabinet& GridTopology::cabinet(const CabinetId& id) const {
    auto it = cabinet_index_.find(id);
    if (it == cabinet_index_.end()) throw ValidationError("unknown cabinet " + id);
    return cabinets_[it->second];
}

std::vector<const Line*> GridTopology::lines_at(const BusId& bus) const {
    std::vector<const Line*> out;
    for (const auto& l : lines_)
        if (l.from_bus == bus || l.to_bus == bus) out.push_back(&l);
    return out;
}

std::vector<const Prosumer*> GridTopology::prosumers_at(const BusId& bus) const {
    std::vector<const Prosumer*> out;
    for (const auto& p : prosumers_)
        if (p.bus == bus) out.push_back(&p);
    return out;
}

void GridTopology::validate() {
    if (base_va_ <= 0) throw ValidationError("base_va must be positive");

    int slack_count = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        if (b.id.empty()) throw ValidationError("bus with empty id");
        if (!bus_index_.emplace(b.id, i).second)
            throw ValidationError("duplicate bus id " + b.id);
        if (b.nominal_voltage_v <= 0)
            throw ValidationError("bus " + b.id + ": nominal voltage must be positive");
        if (b.kind == BusKind::slack_coupling) ++slack_count;
    }
    if (slack_count != 1)
        throw ValidationError("grid must have exactly one slack_coupling bus, found " +
                              std::to_string(slack_count));

    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const Line& l = lines_[i];
        if (!line_index_.emplace(l.id, i).second)
            throw ValidationError("duplicate line id " + l.id);
        if (!has_bus(l.from_bus)) throw ValidationError("line " + l.id + ": unknown bus " + l.from_bus);
        if (!has_bus(l.to_bus)) throw ValidationError("line " + l.id + ": unknown bus " + l.to_bus);
        if (l.from_bus == l.to_bus)
            throw ValidationError("line " + l.id + ": from and to bus are both " + l.from_bus);
        if (l.resistance_ohm < 0)
            throw ValidationError("line " + l.id + ": negative resistance");
        if (l.resistance_ohm == 0 && l.reactance_ohm == 0)
            throw ValidationError("line " + l.id + ": zero impedance");
        if (l.thermal_limit_a <= 0)
            throw ValidationError("line " + l.id + ": thermal current limit must be positive");
        if (bus(l.from_bus).nominal_voltage_v != bus(l.to_bus).nominal_voltage_v)
            throw ValidationError("line " + l.id + ": endpoint nominal voltages differ");
    }

    if (!has_bus(transformer_.slack_bus))
        throw ValidationError("transformer: unknown slack bus " + transformer_.slack_bus);
    if (!has_bus(transformer_.substation_busbar))
        throw ValidationError("transformer: unknown substation busbar " +
                              transformer_.substation_busbar);
    if (bus(transformer_.slack_bus).kind != BusKind::slack_coupling)
        throw ValidationError("transformer: bus " + transformer_.slack_bus +
                              " is not of kind slack_coupling");
    if (bus(transformer_.substation_busbar).kind != BusKind::substation_busbar)
        throw ValidationError("transformer: bus " + transformer_.substation_busbar +
                              " is not of kind substation_busbar");
    if (transformer_.series_r_ohm < 0)
        throw ValidationError("transformer: negative series resistance");

    // The coupling is merged into one electrical node when the transformer is
    // an ideal link and no line provides the connection.
    bool direct_line = false;
    for (const auto& l : lines_) {
        if ((l.from_bus == transformer_.slack_bus && l.to_bus == transformer_.substation_busbar) ||
            (l.to_bus == transformer_.slack_bus && l.from_bus == transformer_.substation_busbar))
            direct_line = true;
    }
    coupling_merged_ = !direct_line && transformer_.series_r_ohm == 0 &&
                       transformer_.series_x_ohm == 0;

    for (std::size_t i = 0; i < cabinets_.size(); ++i) {
        const CableCabinet& c = cabinets_[i];
        if (!cabinet_index_.emplace(c.id, i).second)
            throw ValidationError("duplicate cabinet id " + c.id);
        if (!has_bus(c.busbar)) throw ValidationError("cabinet " + c.id + ": unknown bus " + c.busbar);
        if (c.feeder_lines.empty())
            throw ValidationError("cabinet " + c.id + ": no feeder lines");
        std::set<LineId> seen;
        for (const auto& lid : c.feeder_lines) {
            const Line& l = line(lid); // throws for unknown ids
            if (l.from_bus != c.busbar && l.to_bus != c.busbar)
                throw ValidationError("cabinet " + c.id + ": line " + lid +
                                      " is not incident to busbar " + c.busbar);
            if (!seen.insert(lid).second)
                throw ValidationError("cabinet " + c.id + ": duplicate feeder line " + lid);
        }
    }

    for (std::size_t i = 0; i < prosumers_.size(); ++i) {
        const Prosumer& p = prosumers_[i];
        if (!prosumer_index_.emplace(p.id, i).second)
            throw ValidationError("duplicate prosumer id " + p.id);
        if (!has_bus(p.bus)) throw ValidationError("prosumer " + p.id + ": unknown bus " + p.bus);
        if (p.annual_energy_kwh < 0)
            throw ValidationError("prosumer " + p.id + ": negative annual energy");
        if (p.installed_power_kw < 0)
            throw ValidationError("prosumer " + p.id + ": negative installed power");
        if (p.category == ProsumerCategory::pv_plant && p.installed_power_kw <= 0)
            throw ValidationError("prosumer " + p.id + ": pv_plant requires installed power > 0");
        if (p.category == ProsumerCategory::household && p.annual_energy_kwh <= 0)
            throw ValidationError("prosumer " + p.id + ": household requires annual energy > 0");
        if (!profiles_.contains(p.profile))
            throw ValidationError("prosumer " + p.id + ": missing profile " + p.profile);
    }

    // connectivity over lines plus the transformer coupling (the coupling
    // contributes an edge only when it is an ideal link between otherwise
    // unconnected buses or carries its own impedance)
    std::map<BusId, std::vector<BusId>> adjacency;
    for (const auto& l : lines_) {
        adjacency[l.from_bus].push_back(l.to_bus);
        adjacency[l.to_bus].push_back(l.from_bus);
    }
    if (coupling_merged_ || transformer_.series_r_ohm != 0.0 ||
        transformer_.series_x_ohm != 0.0) {
        adjacency[transformer_.slack_bus].push_back(transformer_.substation_busbar);
        adjacency[transformer_.substation_busbar].push_back(transformer_.slack_bus);
    }

    std::set<BusId> visited;
    std::queue<BusId> frontier;
    frontier.push(transformer_.slack_bus);
    visited.insert(transformer_.slack_bus);
    while (!frontier.empty()) {
        BusId b = frontier.front();
        frontier.pop();
        for (const auto& n : adjacency[b])
            if (visited.insert(n).second) frontier.push(n);
    }
    for (const auto& b : buses_)
        if (!visited.count(b.id))
            throw ValidationError("grid is disconnected: bus " + b.id +
                                  " is not reachable from the slack coupling");
}

double GridTopology::electrical_distance(const BusId& from, const BusId& to) const {
    bus(from);
    bus(to);
    if (from == to) return 0.0;

    struct Edge {
        BusId neighbor;
        double weight;
    };
    std::map<BusId, std::vector<Edge>> adjacency;
    for (const auto& l : lines_) {
        double w = l.impedance_magnitude_ohm();
        adjacency[l.from_bus].push_back({l.to_bus, w});
        adjacency[l.to_bus].push_back({l.from_bus, w});
    }
    double trafo_w = std::hypot(transformer_.series_r_ohm, transformer_.series_x_ohm);
    if (coupling_merged_ || trafo_w != 0.0) {
        adjacency[transformer_.slack_bus].push_back({transformer_.substation_busbar, trafo_w});
        adjacency[transformer_.substation_busbar].push_back({transformer_.slack_bus, trafo_w});
    }

    std::map<BusId, double> dist;
    using Item = std::pair<double, BusId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[from] = 0.0;
    heap.push({0.0, from});
    while (!heap.empty()) {
        auto [d, b] = heap.top();
        heap.pop();
        if (d > dist[b]) continue;
        if (b == to) return d;
        for (const auto& e : adjacency[b]) {
            double nd = d + e.weight;
            auto it = dist.find(e.neighbor);
            if (it == dist.end() || nd < it->second) {
                dist[e.neighbor] = nd;
                heap.push({nd, e.neighbor});
            }
        }
    }
    throw Error("no path between " + from + " and " + to); // unreachable: grid is connected
}

void GridTopology::compute_feeders() {
    const BusId& busbar = transformer_.substation_busbar;

    // the transformer coupling has the busbar as one end, so it vanishes too
    std::map<BusId, std::vector<BusId>> adjacency;
    for (const auto& l : lines_) {
        if (l.from_bus == busbar || l.to_bus == busbar) continue;
        adjacency[l.from_bus].push_back(l.to_bus);
        adjacency[l.to_bus].push_back(l.from_bus);
    }

    std::set<BusId> assigned;
    std::vector<std::pair<BusId, std::vector<BusId>>> components; // (smallest id, members)
    for (const auto& b : buses_) {
        if (b.id == busbar || assigned.count(b.id)) continue;
        std::vector<BusId> members;
        std::queue<BusId> frontier;
        frontier.push(b.id);
        assigned.insert(b.id);
        while (!frontier.empty()) {
            BusId cur = frontier.front();
            frontier.pop();
            members.push_back(cur);
            for (const auto& n : adjacency[cur])
                if (assigned.insert(n).second) frontier.push(n);
        }
        BusId smallest = *std::min_element(members.begin(), members.end());
        components.emplace_back(smallest, std::move(members));
    }

    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    int index = 0;
    for (const auto& [smallest, members] : components) {
        bool slack_side =
            std::find(members.begin(), members.end(), transformer_.slack_bus) != members.end();
        if (slack_side) continue;
        for (const auto& m : members) feeder_of_bus_[m] = index;
        ++index;
    }
    feeder_count_ = index;
}

int GridTopology::feeder_of(const BusId& b) const {
    const Bus& record = bus(b);
    if (record.id == transformer_.substation_busbar)
        throw ValidationError("feeder_of: " + b + " is the substation busbar");
    if (record.id == transformer_.slack_bus)
        throw ValidationError("feeder_of: " + b + " is the slack coupling");
    auto it = feeder_of_bus_.find(b);
    if (it == feeder_of_bus_.end())
        throw ValidationError("feeder_of: " + b + " is on the slack side of the substation");
    return it->second;
}

GridTopology load_grid(const std::filesystem::path& dir) {
    auto buses_table = csv::read_file(dir / "buses.csv");
    std::vector<Bus> buses;
    for (std::size_t r = 0; r < buses_table.row_count(); ++r) {
        Bus b;
        b.id = buses_table.cell(r, "id");
        try {
            b.kind = bus_kind_from_string(buses_table.cell(r, "kind"));
        } catch (const ValidationError& e) {
            throw ValidationError(buses_table.where(r) + ": " + e.what());
        }
        b.nominal_voltage_v = buses_table.number(r, "vn_volts");
        buses.push_back(std::move(b));
    }

    auto lines_table = csv::read_file(dir / "lines.csv");
    std::vector<Line> lines;
    for (std::size_t r = 0; r < lines_table.row_count(); ++r) {
        Line l;
        l.id = lines_table.cell(r, "id");
        l.from_bus = lines_table.cell(r, "from");
        l.to_bus = lines_table.cell(r, "to");
        l.resistance_ohm = lines_table.number(r, "r_ohm");
        l.reactance_ohm = lines_table.number(r, "x_ohm");
        l.thermal_limit_a = lines_table.number(r, "i_max_a");
        lines.push_back(std::move(l));
    }

    std::vector<CableCabinet> cabinets;
    if (std::filesystem::exists(dir / "cabinets.csv")) {
        auto table = csv::read_file(dir / "cabinets.csv");
        for (std::size_t r = 0; r < table.row_count(); ++r) {
            CableCabinet c;
            c.id = table.cell(r, "id");
            c.busbar = table.cell(r, "busbar");
            for (auto& part : csv::split(table.cell(r, "feeder_lines"), ';'))
                if (!part.empty()) c.feeder_lines.push_back(std::move(part));
            cabinets.push_back(std::move(c));
        }
    }

    auto prosumers_table = csv::read_file(dir / "prosumers.csv");
    std::vector<Prosumer> prosumers;
    for (std::size_t r = 0; r < prosumers_table.row_count(); ++r) {
        Prosumer p;
        p.id = prosumers_table.cell(r, "id");
        p.bus = prosumers_table.cell(r, "bus");
        try {
            p.category = prosumer_category_from_string(prosumers_table.cell(r, "category"));
        } catch (const ValidationError& e) {
            throw ValidationError(prosumers_table.where(r) + ": " + e.what());
        }
        p.annual_energy_kwh = prosumers_table.number(r, "annual_kwh");
        p.installed_power_kw = prosumers_table.number(r, "installed_kw");
        p.profile = prosumers_table.cell(r, "profile_id");
        prosumers.push_back(std::move(p));
    }

    auto profiles_table = csv::read_file(dir / "profiles.csv");
    std::map<ProfileId, std::vector<std::pair<long long, ProfilePoint>>> raw;
    for (std::size_t r = 0; r < profiles_table.row_count(); ++r) {
        ProfileId id = profiles_table.cell(r, "profile_id");
        long long t = profiles_table.integer(r, "t_index");
        if (t < 0) throw ValidationError(profiles_table.where(r) + ": negative t_index");
        raw[id].push_back(
            {t, {profiles_table.number(r, "p_kw"), profiles_table.number(r, "q_kvar")}});
    }
    std::map<ProfileId, std::vector<ProfilePoint>> series;
    for (auto& [id, points] : raw) {
        std::sort(points.begin(), points.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<ProfilePoint> s;
        s.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].first != static_cast<long long>(i))
                throw ValidationError("profile " + id + ": t_index " + std::to_string(i) +
                                      " missing or duplicated");
            s.push_back(points[i].second);
        }
        series.emplace(id, std::move(s));
    }

    auto grid_table = csv::read_file(dir / "grid.csv");
    if (grid_table.row_count() != 1)
        throw ValidationError("grid.csv: expected exactly one data row");
    double base_va = grid_table.number(0, "base_va");
    TransformerRecord trafo;
    trafo.slack_bus = grid_table.cell(0, "slack_bus");
    trafo.substation_busbar = grid_table.cell(0, "substation_busbar");
    trafo.rating_va = grid_table.has_column("trafo_rating_va")
                          ? grid_table.number(0, "trafo_rating_va")
                          : base_va;
    trafo.series_r_ohm =
        grid_table.has_column("trafo_r_ohm") ? grid_table.number(0, "trafo_r_ohm") : 0.0;
    trafo.series_x_ohm =
        grid_table.has_column("trafo_x_ohm") ? grid_table.number(0, "trafo_x_ohm") : 0.0;

    return GridTopology(std::move(buses), std::move(lines), std::move(cabinets),
                        std::move(prosumers), ProfileLibrary(std::move(series)), std::move(trafo),
                        base_va, dir.filename().string());
}

void save_grid(const GridTopology& grid, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::vector<std::vector<std::string>> rows;
    for (const auto& b : grid.buses())
        rows.push_back({b.id, to_string(b.kind), csv::format_number(b.nominal_voltage_v)});
    csv::write_file(dir / "buses.csv", {"id", "kind", "vn_volts"}, rows);

    rows.clear();
    for (const auto& l : grid.lines())
        rows.push_back({l.id, l.from_bus, l.to_bus, csv::format_number(l.resistance_ohm),
                        csv::format_number(l.reactance_ohm), csv::format_number(l.thermal_limit_a)});
    csv::write_file(dir / "lines.csv", {"id", "from", "to", "r_ohm", "x_ohm", "i_max_a"}, rows);

    rows.clear();
    for (const auto& c : grid.cabinets()) {
        std::string joined;
        for (std::size_t i = 0; i < c.feeder_lines.size(); ++i)
            joined += (i ? ";" : "") + c.feeder_lines[i];
        rows.push_back({c.id, c.busbar, joined});
    }
    csv::write_file(dir / "cabinets.csv", {"id", "busbar", "feeder_lines"}, rows);

    rows.clear();
    for (const auto& p : grid.prosumers())
        rows.push_back({p.id, p.bus, to_string(p.category), csv::format_number(p.annual_energy_kwh),
                        csv::format_number(p.installed_power_kw), p.profile});
    csv::write_file(dir / "prosumers.csv",
                    {"id", "bus", "category", "annual_kwh", "installed_kw", "profile_id"}, rows);

    rows.clear();
    for (const auto& [id, s] : grid.profiles().all())
        for (std::size_t t = 0; t < s.size(); ++t)
            rows.push_back({id, std::to_string(t), csv::format_number(s[t].p_kw),
                            csv::format_number(s[t].q_kvar)});
    csv::write_file(dir / "profiles.csv", {"profile_id", "t_index", "p_kw", "q_kvar"}, rows);

    const auto& tr = grid.transformer();
    csv::write_file(dir / "grid.csv",
                    {"base_va", "slack_bus", "substation_busbar", "trafo_rating_va", "trafo_r_ohm",
                     "trafo_x_ohm"},
                    {{csv::format_number(grid.base_va()), tr.slack_bus, tr.substation_busbar,
                      csv::format_number(tr.rating_va), csv::format_number(tr.series_r_ohm),
                      csv::format_number(tr.series_x_ohm)}});
}

} // namespace lvse
