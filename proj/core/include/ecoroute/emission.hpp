#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ecoroute {

enum class Pollutant { GHG, NOx };
enum class VehicleClass { PassengerCar, Truck };

std::string to_string(Pollutant p);
std::string to_string(VehicleClass c);
Pollutant pollutant_from_string(const std::string& s);
VehicleClass vehicle_class_from_string(const std::string& s);

// Operating-mode binning from instantaneous speed and acceleration:
//   op 0            braking            a <= -0.894 m/s^2
//   op 1            idle               v < 0.45 m/s
//   op 2 + 6*s + b  cruise/accel       s: speed band (v < 11.2, < 22.3, rest)
//                                      b: VSP band (<0, 0-3, 3-6, 6-9, 9-12, >=12 kW/ton)
// Classification is total: every (v,a) maps to exactly one id.
inline constexpr int kOpModeCount = 20;
inline constexpr double kBrakingAccelThreshold = -0.894; // m/s^2
inline constexpr double kIdleSpeedThreshold = 0.45;      // m/s

// VSP in kW/ton for a generic light-duty vehicle; v in m/s, a in m/s^2.
double vehicle_specific_power(double v, double a);

int classify_opmode(double speed_ms, double accel_ms2);
std::string opmode_description(int opmode);

// (vehicle class, model-year bin, opmode, pollutant) -> emission rate in g/s.
// Coverage is validated at load time so lookups never fail at query time.
class EmissionRateTable {
public:
    struct YearBin {
        int from_year = 0;
        int to_year = 0;
    };

    void set_rate(VehicleClass c, int from_year, int to_year, int opmode,
                  Pollutant p, double g_per_s);

    double rate(VehicleClass c, int model_year, int opmode, Pollutant p) const;

    // Rate at steady cruise (a = 0) at the given speed.
    double steady_rate(VehicleClass c, int model_year, double speed_ms, Pollutant p) const;

    // Per-distance emission factor (g/km) at steady cruise.
    double per_km_factor(VehicleClass c, int model_year, double speed_kmh, Pollutant p) const;

    // Throws ValidationError when any (class, bin) lacks an opmode/pollutant
    // entry, a rate is negative, or bins for a class overlap.
    void validate() const;

    bool covers_year(VehicleClass c, int model_year) const;
    std::vector<YearBin> bins(VehicleClass c) const;

private:
    struct BinTable {
        YearBin bin;
        // [opmode][pollutant]; -1 marks "not set".
        double rates[kOpModeCount][2];
    };
    const BinTable* find_bin(VehicleClass c, int model_year) const;
    std::map<VehicleClass, std::vector<BinTable>> tables_;
};

// File format: vehicle_class,year_from,year_to,opmode,pollutant,g_per_s
EmissionRateTable load_rate_table(const std::string& path);
void save_rate_table(const EmissionRateTable& table, const std::string& path);

// Bundled synthetic table. Shaped so the per-km GHG factor over a steady
// 10-110 km/h sweep is unimodal with its minimum at 70 km/h, and NOx rates
// rise strictly with speed above 60 km/h.
EmissionRateTable default_rate_table();

// One second of one vehicle's emissions, attributed to a link section.
struct EmissionSample {
    int vehicle_id;
    int t;
    int link;
    int section;
    double ghg_g_per_s;
    double nox_g_per_s;
};

// Space-mean rate over the vehicles present on one section during one
// intermediate interval: mean of per-vehicle rates. An empty section is
// defined as 0 with the empty flag set.
struct SectionMean {
    double rate_g_per_veh_s = 0.0;
    bool empty = true;
    int vehicle_count = 0;
};
SectionMean section_mean_rate(const std::vector<double>& per_vehicle_rates);

// Nested space mean: average each section over its intermediate intervals,
// then average the section values. values[p][w] = section p, interval w.
double link_mean_rate(const std::vector<std::vector<double>>& section_interval_means);

// Average emission per vehicle on a link over an interval: rate x travel time.
double link_mean_emission(double rate_g_per_veh_s, double travel_time_s);

// Per-link accumulator feeding the two-clock aggregation: vehicle-seconds are
// added as they happen, intermediate closes apply the per-section space mean,
// interval closes apply the nested mean.
class LinkEmissionBuckets {
public:
    explicit LinkEmissionBuckets(int section_count);

    void add_second(int section, int vehicle_id, double ghg_g, double nox_g);

    // Close the current intermediate interval: compute per-section means and
    // append them as one column.
    void close_intermediate();

    struct IntervalRates {
        double ghg_g_per_veh_s = 0.0;
        double nox_g_per_veh_s = 0.0;
        bool any_data = false;
    };

    // Close the routing interval over all collected intermediate columns and
    // reset for the next interval.
    IntervalRates close_interval();

    int section_count() const { return static_cast<int>(sections_.size()); }

private:
    struct VehicleAccum {
        double ghg_g = 0.0;
        double nox_g = 0.0;
        int seconds = 0;
    };
    // Per section: per-vehicle accumulation in the open intermediate interval.
    std::vector<std::map<int, VehicleAccum>> sections_;
    // Collected intermediate columns, per pollutant: [section][interval].
    std::vector<std::vector<double>> ghg_cols_;
    std::vector<std::vector<double>> nox_cols_;
    std::vector<std::vector<bool>> occupied_;
};

} // namespace ecoroute
