// Writes the bundled fixture grids (chain3, fourload, synth-rural) as CSV
// directories. Profiles are synthesized deterministically so the fixtures
// can be regenerated bit-identically.
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <vector>

#include "lvse/grid_model.hpp"
#include "lvse/rng.hpp"

using namespace lvse;

namespace {

struct Anchor {
    double hour, value;
};

double interp(const std::vector<Anchor>& anchors, double hour) {
    for (std::size_t i = 1; i < anchors.size(); ++i)
        if (hour <= anchors[i].hour) {
            double f = (hour - anchors[i - 1].hour) / (anchors[i].hour - anchors[i - 1].hour);
            return anchors[i - 1].value + f * (anchors[i].value - anchors[i - 1].value);
        }
    return anchors.back().value;
}

double tan_from_cos(double cos_phi) { return std::tan(std::acos(cos_phi)); }

// Household day shape, deliberately not the H0 approximation used for the
// pseudo values: midday plateau, late evening peak.
const std::vector<Anchor> kHouseDay = {{0, 0.30}, {6, 0.22},  {8, 0.65},  {12, 0.70},
                                       {14, 0.55}, {17, 0.75}, {20, 1.00}, {23, 0.45},
                                       {24, 0.32}};

std::vector<ProfilePoint> household_profile(std::size_t steps, double annual_kwh, double cos_phi,
                                            std::uint64_t seed) {
    RngStream rng(seed);
    double energy_factor = 0.9 + 0.2 * rng.next_double(); // truth differs from the declared annual
    double smooth = 1.0;
    std::vector<double> p(steps, 0.0);
    int spike_left = 0;
    double spike_kw = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t day = (t / 96) % 7;
        double hour = static_cast<double>(t % 96) * 0.25;
        double shape = interp(kHouseDay, hour);
        if (day >= 5 && hour > 9 && hour < 18) shape *= 1.25; // weekend midday
        smooth = 0.85 * smooth + 0.15 * (0.6 + 0.8 * rng.next_double());
        if (spike_left == 0 && shape > 0.5 && rng.next_double() < 0.04) {
            spike_left = 1 + static_cast<int>(rng.next_below(6)); // cooking / appliances
            spike_kw = 0.8 + 1.6 * rng.next_double();
        }
        p[t] = shape * smooth + (spike_left > 0 ? spike_kw : 0.0);
        if (spike_left > 0) --spike_left;
    }
    double energy = 0.0;
    for (double v : p) energy += v * 0.25;
    double weeks = static_cast<double>(steps) / 672.0;
    double scale = annual_kwh * energy_factor * weeks / 52.18 / energy;
    std::vector<ProfilePoint> out(steps);
    double tphi = tan_from_cos(cos_phi);
    for (std::size_t t = 0; t < steps; ++t) out[t] = {p[t] * scale, p[t] * scale * tphi};
    return out;
}

// Shared daily weather so all plants in one grid correlate strongly.
std::vector<double> pv_weather(std::size_t days, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> w(days);
    for (auto& v : w) v = 0.15 + 0.85 * rng.next_double();
    return w;
}

std::vector<ProfilePoint> pv_profile(std::size_t steps, double installed_kw,
                                     const std::vector<double>& weather, double deviation,
                                     std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<ProfilePoint> out(steps);
    double tphi = tan_from_cos(0.97);
    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t day = t / 96;
        double hour = static_cast<double>(t % 96) * 0.25;
        double bell = 0.0;
        if (hour > 6.0 && hour < 18.0) bell = std::pow(std::sin((hour - 6.0) / 12.0 * 3.14159265), 1.5);
        double plant_noise = 1.0 + deviation * (2.0 * rng.next_double() - 1.0);
        double p = -installed_kw * 0.85 * bell * weather[day % weather.size()] * plant_noise;
        out[t] = {p, p * tphi};
    }
    return out;
}

std::vector<ProfilePoint> ev_profile(std::size_t steps, double charge_kw, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<ProfilePoint> out(steps, {0.0, 0.0});
    double tphi = tan_from_cos(0.99);
    std::size_t days = (steps + 95) / 96;
    for (std::size_t day = 0; day < days; ++day) {
        if (rng.next_double() > 0.55) continue; // charges roughly 4 days a week
        std::size_t start = day * 96 + 70 + rng.next_below(10); // from ~17:30
        std::size_t duration = 6 + rng.next_below(5);           // 1.5 to 2.5 hours
        for (std::size_t t = start; t < start + duration && t < steps; ++t)
            out[t] = {charge_kw, charge_kw * tphi};
    }
    return out;
}

std::vector<ProfilePoint> heat_pump_profile(std::size_t steps, double block_kw,
                                            std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<ProfilePoint> out(steps);
    double tphi = tan_from_cos(0.92);
    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t day = t / 96;
        double hour = static_cast<double>(t % 96) * 0.25;
        double demand = (hour < 8.0 || hour > 16.5) ? 1.0 : 0.35; // colder mornings and nights
        double day_factor = 0.6 + 0.4 * ((day * 2654435761u) % 97) / 96.0;
        double jitter = 0.8 + 0.4 * rng.next_double();
        double p = block_kw * demand * day_factor * jitter;
        out[t] = {p, p * tphi};
    }
    return out;
}

std::vector<ProfilePoint> commercial_profile(std::size_t steps, double peak_kw,
                                             std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<ProfilePoint> out(steps);
    double tphi = tan_from_cos(0.90);
    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t day = (t / 96) % 7;
        double hour = static_cast<double>(t % 96) * 0.25;
        double shape = 0.15;
        if (day < 5 && hour >= 7.0 && hour <= 19.0)
            shape = 0.3 + 0.7 * std::min(1.0, std::min(hour - 7.0, 19.0 - hour) / 2.0);
        double p = peak_kw * shape * (0.9 + 0.2 * rng.next_double());
        out[t] = {p, p * tphi};
    }
    return out;
}

GridTopology make_chain3() {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B1", "B2", 0.002, 0.008, 400.0},
                               {"L2", "B2", "B3", 0.08, 0.05, 160.0}};
    std::vector<Prosumer> prosumers = {
        {"P1", "B3", ProsumerCategory::household, 4500.0, 0.0, "H1"}};
    std::map<ProfileId, std::vector<ProfilePoint>> profiles;
    profiles["H1"] = household_profile(96, 4500.0, 0.96, 101);
    TransformerRecord trafo{"B1", "B2", 160000.0, 0.0, 0.0};
    return GridTopology(buses, lines, {}, prosumers, ProfileLibrary(profiles), trafo, 160000.0,
                        "chain3");
}

GridTopology make_fourload() {
    std::vector<Bus> buses = {{"B1", BusKind::slack_coupling, 400.0},
                              {"B2", BusKind::substation_busbar, 400.0},
                              {"B3", BusKind::connection_point, 400.0},
                              {"B4", BusKind::connection_point, 400.0},
                              {"B5", BusKind::connection_point, 400.0},
                              {"B6", BusKind::connection_point, 400.0}};
    std::vector<Line> lines = {{"L1", "B1", "B2", 0.002, 0.008, 400.0},
                               {"L2", "B2", "B3", 0.06, 0.04, 160.0},
                               {"L3", "B3", "B4", 0.06, 0.04, 160.0},
                               {"L4", "B4", "B5", 0.05, 0.035, 120.0},
                               {"L5", "B5", "B6", 0.05, 0.035, 120.0}};
    std::vector<Prosumer> prosumers = {
        {"K1", "B3", ProsumerCategory::household, 8000.0, 0.0, "F1"},
        {"K2", "B4", ProsumerCategory::household, 7000.0, 0.0, "F2"},
        {"K3", "B5", ProsumerCategory::household, 2000.0, 0.0, "F3"},
        {"K4", "B6", ProsumerCategory::electric_vehicle, 3000.0, 0.0, "F4"}};
    std::map<ProfileId, std::vector<ProfilePoint>> profiles;
    profiles["F1"] = household_profile(96, 8000.0, 0.95, 201);
    profiles["F2"] = household_profile(96, 7000.0, 0.97, 202);
    profiles["F3"] = household_profile(96, 2000.0, 0.94, 203);
    profiles["F4"] = ev_profile(96, 7.0, 204);
    TransformerRecord trafo{"B1", "B2", 100000.0, 0.0, 0.0};
    return GridTopology(buses, lines, {}, prosumers, ProfileLibrary(profiles), trafo, 100000.0,
                        "fourload");
}

GridTopology make_synth_rural() {
    constexpr std::size_t kSteps = 672; // one week

    std::vector<Bus> buses;
    auto add_bus = [&](const std::string& id, BusKind kind) { buses.push_back({id, kind, 400.0}); };
    add_bus("B01", BusKind::slack_coupling);
    add_bus("B02", BusKind::substation_busbar);
    add_bus("B03", BusKind::junction);
    add_bus("B04", BusKind::junction);
    add_bus("B05", BusKind::cabinet_busbar);
    for (int i = 6; i <= 10; ++i)
        add_bus("B" + std::string(i < 10 ? "0" : "") + std::to_string(i),
                BusKind::connection_point);
    add_bus("B11", BusKind::junction);
    add_bus("B12", BusKind::cabinet_busbar);
    for (int i = 13; i <= 20; ++i) add_bus("B" + std::to_string(i), BusKind::connection_point);

    // spine impedances put cabinet C1 at 0.9 ohm and C2 at 0.4 ohm from the
    // substation busbar
    std::vector<Line> lines = {
        {"L01", "B01", "B02", 0.004, 0.016, 400.0},
        {"L02", "B02", "B03", 0.24, 0.18, 170.0},
        {"L03", "B03", "B04", 0.24, 0.18, 170.0},
        {"L04", "B04", "B05", 0.24, 0.18, 170.0},
        {"L05", "B05", "B06", 0.12, 0.08, 120.0},
        {"L06", "B05", "B07", 0.12, 0.08, 120.0},
        {"L07", "B05", "B08", 0.10, 0.07, 120.0},
        {"L08", "B06", "B09", 0.15, 0.10, 100.0},
        {"L09", "B07", "B10", 0.15, 0.10, 100.0},
        {"L10", "B02", "B11", 0.16, 0.12, 170.0},
        {"L11", "B11", "B12", 0.16, 0.12, 170.0},
        {"L12", "B12", "B13", 0.12, 0.08, 120.0},
        {"L13", "B12", "B14", 0.12, 0.08, 120.0},
        {"L14", "B13", "B15", 0.15, 0.10, 100.0},
        {"L15", "B14", "B16", 0.15, 0.10, 100.0},
        {"L16", "B15", "B17", 0.12, 0.08, 100.0},
        {"L17", "B16", "B18", 0.12, 0.08, 100.0},
        {"L18", "B17", "B19", 0.10, 0.07, 100.0},
        {"L19", "B18", "B20", 0.10, 0.07, 100.0},
    };

    std::vector<CableCabinet> cabinets = {{"C1", "B05", {"L05", "L06", "L07"}},
                                          {"C2", "B12", {"L12", "L13"}}};

    struct Spec {
        std::string id, bus;
        ProsumerCategory cat;
        double annual, installed;
    };
    std::vector<Spec> specs = {
        {"P01", "B06", ProsumerCategory::household, 3200, 0},
        {"P02", "B06", ProsumerCategory::electric_vehicle, 2600, 0},
        {"P03", "B07", ProsumerCategory::household, 4100, 0},
        {"P04", "B08", ProsumerCategory::household, 2300, 0},
        {"P05", "B08", ProsumerCategory::heat_pump, 5200, 0},
        {"P06", "B09", ProsumerCategory::household, 7500, 0},
        {"P07", "B10", ProsumerCategory::household, 5100, 0},
        {"P08", "B13", ProsumerCategory::household, 2900, 0},
        {"P09", "B14", ProsumerCategory::household, 3600, 0},
        {"P10", "B14", ProsumerCategory::electric_vehicle, 3100, 0},
        {"P11", "B15", ProsumerCategory::household, 1800, 0},
        {"P12", "B16", ProsumerCategory::pv_plant, 0, 12},
        {"P13", "B16", ProsumerCategory::household, 4400, 0},
        {"P14", "B17", ProsumerCategory::household, 2700, 0},
        {"P15", "B18", ProsumerCategory::other, 5600, 0},
        {"P16", "B19", ProsumerCategory::household, 3900, 0},
        {"P17", "B20", ProsumerCategory::pv_plant, 0, 6},
        {"P18", "B20", ProsumerCategory::household, 6800, 0},
    };

    auto weather = pv_weather(8, 4242);
    std::vector<Prosumer> prosumers;
    std::map<ProfileId, std::vector<ProfilePoint>> profiles;
    int n = 0;
    for (const auto& s : specs) {
        ++n;
        ProfileId pid = "PR" + std::string(n < 10 ? "0" : "") + std::to_string(n);
        prosumers.push_back({s.id, s.bus, s.cat, s.annual, s.installed, pid});
        std::uint64_t seed = 3000 + static_cast<std::uint64_t>(n);
        switch (s.cat) {
            case ProsumerCategory::household:
                profiles[pid] = household_profile(kSteps, s.annual, 0.93 + 0.003 * n, seed);
                break;
            case ProsumerCategory::electric_vehicle:
                profiles[pid] = ev_profile(kSteps, 7.0, seed);
                break;
            case ProsumerCategory::heat_pump:
                profiles[pid] = heat_pump_profile(kSteps, 2.5, seed);
                break;
            case ProsumerCategory::pv_plant:
                profiles[pid] = pv_profile(kSteps, s.installed, weather, 0.08, seed);
                break;
            case ProsumerCategory::other:
                profiles[pid] = commercial_profile(kSteps, 2.2, seed);
                break;
        }
    }

    TransformerRecord trafo{"B01", "B02", 250000.0, 0.0, 0.0};
    return GridTopology(buses, lines, cabinets, prosumers, ProfileLibrary(profiles), trafo,
                        250000.0, "synth-rural");
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_fixtures <output root>\n";
        return 1;
    }
    std::filesystem::path root = argv[1];
    try {
        save_grid(make_chain3(), root / "chain3");
        save_grid(make_fourload(), root / "fourload");
        save_grid(make_synth_rural(), root / "synth-rural");
    } catch (const lvse::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "fixtures written to " << root << "\n";
    return 0;
}
