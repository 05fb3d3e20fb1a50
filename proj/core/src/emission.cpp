#include "ecoroute/emission.hpp"

#include "ecoroute/csvio.hpp"

#include <algorithm>
#include <cmath>

namespace ecoroute {

std::string to_string(Pollutant p) {
    return p == Pollutant::GHG ? "GHG" : "NOx";
}

std::string to_string(VehicleClass c) {
    return c == VehicleClass::PassengerCar ? "passenger_car" : "truck";
}

Pollutant pollutant_from_string(const std::string& s) {
    if (s == "GHG") return Pollutant::GHG;
    if (s == "NOx") return Pollutant::NOx;
    throw ValidationError("unknown pollutant: " + s);
}

VehicleClass vehicle_class_from_string(const std::string& s) {
    if (s == "passenger_car") return VehicleClass::PassengerCar;
    if (s == "truck") return VehicleClass::Truck;
    throw ValidationError("unknown vehicle class: " + s);
}

double vehicle_specific_power(double v, double a) {
    return v * (1.1 * a + 0.132) + 0.000302 * v * v * v;
}

int classify_opmode(double speed_ms, double accel_ms2) {
    if (accel_ms2 <= kBrakingAccelThreshold) return 0;
    if (speed_ms < kIdleSpeedThreshold) return 1;
    int speed_band = speed_ms < 11.2 ? 0 : (speed_ms < 22.3 ? 1 : 2);
    double vsp = vehicle_specific_power(speed_ms, accel_ms2);
    int vsp_band;
    if (vsp < 0.0) vsp_band = 0;
    else if (vsp < 3.0) vsp_band = 1;
    else if (vsp < 6.0) vsp_band = 2;
    else if (vsp < 9.0) vsp_band = 3;
    else if (vsp < 12.0) vsp_band = 4;
    else vsp_band = 5;
    return 2 + 6 * speed_band + vsp_band;
}

std::string opmode_description(int opmode) {
    if (opmode == 0) return "braking";
    if (opmode == 1) return "idle";
    static const char* speed_names[] = {"low-speed", "mid-speed", "high-speed"};
    static const char* vsp_names[] = {"vsp<0", "vsp0-3", "vsp3-6", "vsp6-9", "vsp9-12", "vsp>=12"};
    int k = opmode - 2;
    return std::string(speed_names[k / 6]) + " " + vsp_names[k % 6];
}

void EmissionRateTable::set_rate(VehicleClass c, int from_year, int to_year,
                                 int opmode, Pollutant p, double g_per_s) {
    if (opmode < 0 || opmode >= kOpModeCount)
        throw ValidationError("opmode out of range: " + std::to_string(opmode));
    if (from_year > to_year)
        throw ValidationError("year bin reversed: " + std::to_string(from_year) + "-" +
                              std::to_string(to_year));
    if (g_per_s < 0.0)
        throw ValidationError("negative emission rate");
    auto& bins = tables_[c];
    BinTable* bt = nullptr;
    for (auto& b : bins)
        if (b.bin.from_year == from_year && b.bin.to_year == to_year) bt = &b;
    if (!bt) {
        BinTable fresh;
        fresh.bin = {from_year, to_year};
        for (auto& row : fresh.rates) {
            row[0] = -1.0;
            row[1] = -1.0;
        }
        bins.push_back(fresh);
        bt = &bins.back();
    }
    bt->rates[opmode][static_cast<int>(p)] = g_per_s;
}

const EmissionRateTable::BinTable* EmissionRateTable::find_bin(VehicleClass c,
                                                               int model_year) const {
    auto it = tables_.find(c);
    if (it == tables_.end()) return nullptr;
    for (const auto& b : it->second)
        if (model_year >= b.bin.from_year && model_year <= b.bin.to_year) return &b;
    return nullptr;
}

double EmissionRateTable::rate(VehicleClass c, int model_year, int opmode,
                               Pollutant p) const {
    const BinTable* bt = find_bin(c, model_year);
    if (!bt)
        throw ValidationError("rate table has no year bin for " + to_string(c) +
                              " model year " + std::to_string(model_year));
    double r = bt->rates[opmode][static_cast<int>(p)];
    if (r < 0.0)
        throw ValidationError("rate table missing entry: " + to_string(c) + " opmode " +
                              std::to_string(opmode) + " " + to_string(p));
    return r;
}

double EmissionRateTable::steady_rate(VehicleClass c, int model_year, double speed_ms,
                                      Pollutant p) const {
    return rate(c, model_year, classify_opmode(speed_ms, 0.0), p);
}

double EmissionRateTable::per_km_factor(VehicleClass c, int model_year, double speed_kmh,
                                        Pollutant p) const {
    double v = speed_kmh / 3.6;
    return steady_rate(c, model_year, v, p) / v * 1000.0;
}

void EmissionRateTable::validate() const {
    if (tables_.empty()) throw ValidationError("rate table is empty");
    for (const auto& [cls, bins] : tables_) {
        if (bins.empty())
            throw ValidationError("rate table has no bins for " + to_string(cls));
        for (const auto& b : bins) {
            for (int op = 0; op < kOpModeCount; ++op) {
                for (int p = 0; p < 2; ++p) {
                    if (b.rates[op][p] < 0.0)
                        throw ValidationError(
                            "rate table missing entry: " + to_string(cls) + " years " +
                            std::to_string(b.bin.from_year) + "-" + std::to_string(b.bin.to_year) +
                            " opmode " + std::to_string(op) + " " +
                            to_string(static_cast<Pollutant>(p)));
                }
            }
            for (const auto& other : bins) {
                if (&other == &b) continue;
                if (b.bin.from_year <= other.bin.to_year && other.bin.from_year <= b.bin.to_year)
                    throw ValidationError("overlapping year bins for " + to_string(cls));
            }
        }
    }
}

bool EmissionRateTable::covers_year(VehicleClass c, int model_year) const {
    return find_bin(c, model_year) != nullptr;
}

std::vector<EmissionRateTable::YearBin> EmissionRateTable::bins(VehicleClass c) const {
    std::vector<YearBin> out;
    auto it = tables_.find(c);
    if (it == tables_.end()) return out;
    for (const auto& b : it->second) out.push_back(b.bin);
    std::sort(out.begin(), out.end(),
              [](const YearBin& a, const YearBin& b) { return a.from_year < b.from_year; });
    return out;
}

EmissionRateTable load_rate_table(const std::string& path) {
    CsvReader reader(path);
    EmissionRateTable table;
    std::vector<std::string> f;
    while (reader.next_row(f)) {
        if (f.size() < 6) reader.fail("expected vehicle_class,year_from,year_to,opmode,pollutant,g_per_s");
        try {
            table.set_rate(vehicle_class_from_string(f[0]),
                           static_cast<int>(reader.field_int(f, 1)),
                           static_cast<int>(reader.field_int(f, 2)),
                           static_cast<int>(reader.field_int(f, 3)),
                           pollutant_from_string(f[4]), reader.field_double(f, 5));
        } catch (const ValidationError& e) {
            reader.fail(e.what());
        }
    }
    table.validate();
    return table;
}

void save_rate_table(const EmissionRateTable& table, const std::string& path) {
    std::string out = "vehicle_class,year_from,year_to,opmode,pollutant,g_per_s\n";
    for (VehicleClass c : {VehicleClass::PassengerCar, VehicleClass::Truck}) {
        for (const auto& bin : table.bins(c)) {
            for (int op = 0; op < kOpModeCount; ++op) {
                for (Pollutant p : {Pollutant::GHG, Pollutant::NOx}) {
                    out += join_row({to_string(c), std::to_string(bin.from_year),
                                     std::to_string(bin.to_year), std::to_string(op),
                                     to_string(p),
                                     format_double(table.rate(c, bin.from_year, op, p))});
                }
            }
        }
    }
    write_file(path, out);
}

EmissionRateTable default_rate_table() {
    // Base rates for a 2009-2018 passenger car. The GHG cruise bins yield
    // per-km factors of 141/129/123/105/135/147/159/174 g/km at steady
    // 40/50/60/70/80/90/100/110 km/h: unimodal with the minimum at 70.
    // Idle and low-speed acceleration bins sit near the cruise rates so a
    // second spent in a queue costs about as much as a second of driving.
    static const double ghg_base[kOpModeCount] = {
        1.20, 3.20,                               // braking, queue idle/creep
        1.40, 2.00, 2.20, 2.40, 2.60, 2.90,       // low speed band
        1.45, 1.792, 2.050, 3.00, 3.40, 4.10,     // mid speed band
        1.50, 1.92, 2.52, 3.675, 4.417, 5.317};   // high speed band
    // NOx: low at idle, high under low-speed acceleration (stop-and-go), and
    // strictly rising with cruise speed above 60 km/h.
    static const double nox_base[kOpModeCount] = {
        0.0010, 0.0050,
        0.0012, 0.0030, 0.0035, 0.0040, 0.0050, 0.0060,
        0.0014, 0.0016, 0.0024, 0.0040, 0.0045, 0.0060,
        0.0016, 0.0030, 0.0048, 0.0072, 0.0105, 0.0150};

    struct BinSpec {
        int from, to;
        double ghg_mult, nox_mult;
    };
    static const BinSpec bins[] = {
        {1988, 1998, 1.25, 2.0},
        {1999, 2008, 1.10, 1.4},
        {2009, 2018, 1.00, 1.0},
    };

    EmissionRateTable table;
    for (VehicleClass c : {VehicleClass::PassengerCar, VehicleClass::Truck}) {
        double cls_ghg = c == VehicleClass::Truck ? 2.2 : 1.0;
        double cls_nox = c == VehicleClass::Truck ? 3.0 : 1.0;
        for (const auto& b : bins) {
            for (int op = 0; op < kOpModeCount; ++op) {
                table.set_rate(c, b.from, b.to, op, Pollutant::GHG,
                               ghg_base[op] * cls_ghg * b.ghg_mult);
                table.set_rate(c, b.from, b.to, op, Pollutant::NOx,
                               nox_base[op] * cls_nox * b.nox_mult);
            }
        }
    }
    table.validate();
    return table;
}

SectionMean section_mean_rate(const std::vector<double>& per_vehicle_rates) {
    SectionMean m;
    m.vehicle_count = static_cast<int>(per_vehicle_rates.size());
    if (per_vehicle_rates.empty()) return m;
    double sum = 0.0;
    for (double r : per_vehicle_rates) sum += r;
    m.rate_g_per_veh_s = sum / static_cast<double>(per_vehicle_rates.size());
    m.empty = false;
    return m;
}

double link_mean_rate(const std::vector<std::vector<double>>& section_interval_means) {
    if (section_interval_means.empty()) return 0.0;
    double section_sum = 0.0;
    for (const auto& intervals : section_interval_means) {
        if (intervals.empty()) continue;
        double s = 0.0;
        for (double v : intervals) s += v;
        section_sum += s / static_cast<double>(intervals.size());
    }
    return section_sum / static_cast<double>(section_interval_means.size());
}

double link_mean_emission(double rate_g_per_veh_s, double travel_time_s) {
    return rate_g_per_veh_s * travel_time_s;
}

LinkEmissionBuckets::LinkEmissionBuckets(int section_count)
    : sections_(section_count),
      ghg_cols_(section_count),
      nox_cols_(section_count),
      occupied_(section_count) {}

void LinkEmissionBuckets::add_second(int section, int vehicle_id, double ghg_g,
                                     double nox_g) {
    auto& acc = sections_[section][vehicle_id];
    acc.ghg_g += ghg_g;
    acc.nox_g += nox_g;
    acc.seconds += 1;
}

void LinkEmissionBuckets::close_intermediate() {
    for (std::size_t p = 0; p < sections_.size(); ++p) {
        auto& vehicles = sections_[p];
        std::vector<double> ghg_rates, nox_rates;
        ghg_rates.reserve(vehicles.size());
        nox_rates.reserve(vehicles.size());
        for (const auto& [veh, acc] : vehicles) {
            ghg_rates.push_back(acc.ghg_g / acc.seconds);
            nox_rates.push_back(acc.nox_g / acc.seconds);
        }
        SectionMean ghg = section_mean_rate(ghg_rates);
        SectionMean nox = section_mean_rate(nox_rates);
        ghg_cols_[p].push_back(ghg.rate_g_per_veh_s);
        nox_cols_[p].push_back(nox.rate_g_per_veh_s);
        occupied_[p].push_back(!ghg.empty);
        vehicles.clear();
    }
}

LinkEmissionBuckets::IntervalRates LinkEmissionBuckets::close_interval() {
    IntervalRates out;
    out.ghg_g_per_veh_s = link_mean_rate(ghg_cols_);
    out.nox_g_per_veh_s = link_mean_rate(nox_cols_);
    for (const auto& col : occupied_)
        for (bool occ : col)
            if (occ) out.any_data = true;
    for (auto& c : ghg_cols_) c.clear();
    for (auto& c : nox_cols_) c.clear();
    for (auto& c : occupied_) c.clear();
    return out;
}

} // namespace ecoroute
