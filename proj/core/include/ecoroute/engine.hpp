#pragma once

#include "ecoroute/dynamics.hpp"
#include "ecoroute/emission.hpp"
#include "ecoroute/linkstate.hpp"
#include "ecoroute/network.hpp"
#include "ecoroute/routing.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecoroute {

struct DemandEntry {
    NodeIndex origin = -1;
    NodeIndex dest = -1;
    double interval_start_s = 0.0;
    double interval_length_s = 300.0;
    double expected_count = 0.0;
};

struct DemandProfile {
    std::vector<DemandEntry> entries;

    double total_expected() const;
    // Counts >= 0, origin != dest, every OD pair routable.
    void validate(const RoadNetwork& net) const;
};

// File format: origin,dest,interval_start_s,interval_length_s,expected_count
DemandProfile load_demand(const RoadNetwork& net, const std::string& path);
void save_demand(const RoadNetwork& net, const DemandProfile& demand, const std::string& path);

struct FleetRow {
    VehicleClass vehicle_class = VehicleClass::PassengerCar;
    int year_from = 2009;
    int year_to = 2018;
    double share = 1.0;
};

struct FleetComposition {
    std::vector<FleetRow> rows;

    void validate(const EmissionRateTable& rates) const;
    // Highest-share row (first on ties); its class and middle year stand in
    // for "a typical vehicle" in free-flow emission estimates.
    const FleetRow& representative() const;
};

// File format: vehicle_class,year_from,year_to,share
FleetComposition load_fleet(const std::string& path);
void save_fleet(const FleetComposition& fleet, const std::string& path);
FleetComposition default_fleet();

enum class RoutingMode { PretripDynamic, E2ecav };

struct ScenarioConfig {
    std::string scenario_id = "S2";
    VehicleKind fleet_kind = VehicleKind::CAV;
    RoutingMode routing_mode = RoutingMode::E2ecav;
    ObjectiveSpec objective = ObjectiveSpec::travel_time();
    std::uint64_t seed = 1;
    int routing_interval_s = 60;       // delta_j
    int intermediate_interval_s = 20;  // delta_omega
    int warmup_s = 300;
    DisseminationMode dissemination = DisseminationMode::Idealized;
    int gossip_hops = 1;
    int gridlock_horizon_s = 1800;
    double stale_cost_factor = 1.0;
    DynamicsConfig dynamics;

    // Table 2 wiring: S1 pretrip+TT on HDVs, S2 TT, S3 R1, S4 TT*, S5 R2 on CAVs.
    static ScenarioConfig standard(const std::string& scenario_id, std::uint64_t seed);

    void validate() const;
};

struct Arrival {
    int index = -1;
    double depart_s = 0.0;
    NodeIndex origin = -1;
    NodeIndex dest = -1;
    VehicleClass vehicle_class = VehicleClass::PassengerCar;
    int model_year = 2015;
};

// Poisson counts per (OD, interval), uniform departure times within the
// interval, fleet identity per vehicle; fully determined by the seed via the
// "arrivals" and "fleet" streams.
std::vector<Arrival> generate_arrivals(const DemandProfile& demand,
                                       const FleetComposition& fleet,
                                       std::uint64_t seed);

struct TripRecord {
    int vehicle_id = -1;
    VehicleKind kind = VehicleKind::HDV;
    VehicleClass vehicle_class = VehicleClass::PassengerCar;
    int model_year = 2015;
    NodeIndex origin = -1;
    NodeIndex dest = -1;
    double depart_s = 0.0; // scheduled departure
    double enter_s = 0.0;  // actual network entry
    double arrive_s = 0.0;
    double tt_s = 0.0;     // arrive - depart
    double vkt_km = 0.0;
    std::int64_t ghg_ng = 0; // integer nanograms; exact cross-aggregation sums
    std::int64_t nox_ng = 0;
    double mean_speed_kmh = 0.0;
    bool warmup = false;

    double ghg_g() const { return static_cast<double>(ghg_ng) * 1e-9; }
    double nox_g() const { return static_cast<double>(nox_ng) * 1e-9; }
};

struct IntervalLogRow {
    LinkIndex link = -1;
    int interval_index = -1;
    int t_start_s = 0;
    int t_end_s = 0;
    LinkStateReport report;
    // Raw substrate for metrics, non-warm-up vehicles only.
    std::int64_t ghg_ng = 0;
    std::int64_t nox_ng = 0;
    double vehicle_seconds = 0.0;
    double distance_m = 0.0;
    int vehicles_at_close = 0;
};

struct DecisionRow {
    int vehicle_id = -1;
    int t_s = 0;
    NodeIndex at_node = -1;
    LinkIndex chosen_link = -1;
    std::string objective;
};

class GridlockError : public std::runtime_error {
public:
    GridlockError(const std::string& what, std::string dump_json)
        : std::runtime_error(what), dump(std::move(dump_json)) {}
    std::string dump;
};

struct RunResult {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::vector<TripRecord> trips;
    std::vector<IntervalLogRow> interval_log;
    std::vector<DecisionRow> decisions;
    std::int64_t total_ghg_ng = 0; // non-warm-up raw sum over every sample
    std::int64_t total_nox_ng = 0;
    int vehicles_scheduled = 0;
    int vehicles_arrived = 0;
    int final_time_s = 0;
};

struct TrajectorySink {
    // vehicle_id, t, link, position, speed, accel, opmode, ghg g/s, nox g/s
    std::function<void(int, int, LinkIndex, double, double, double, int, double, double)> on_sample;
};

// Full deterministic scenario run; all injected vehicles arrive or a
// GridlockError carrying a diagnostic dump is thrown.
RunResult run_scenario(const RoadNetwork& net, const DemandProfile& demand,
                       const EmissionRateTable& rates, const FleetComposition& fleet,
                       const ScenarioConfig& cfg, const TrajectorySink* trajectory = nullptr);

// Synthetic grid stand-in for the unpublished downtown topology: two-way
// streets on a rows x cols lattice with a 40/60/80 km/h speed mix, an
// optional fast corridor row and an optional mid-corridor lane-drop
// bottleneck. With the defaults, the corridor is the free-flow shortcut for
// every row, so demand concentrates on it exactly where the lane drop bites.
struct GridGeometry {
    double block_length_m = 250.0;
    double row_speed_kmh = 40.0;
    double col_speed_kmh = 60.0;
    int row_lanes = 2;
    int col_lanes = 1;
    int section_count = 3;
    int corridor_row = -1;            // -1 disables the fast corridor
    double corridor_speed_kmh = 80.0;
    int corridor_lanes = 2;
    bool bottleneck = false;          // one corridor segment drops to 1 lane / 40 km/h
};

RoadNetwork generate_grid_network(int rows, int cols, const GridGeometry& geo);

// West-to-east demand over the grid with a light north-south cross flow.
// expected counts are per 300 s interval over [0, horizon).
DemandProfile make_grid_demand(const RoadNetwork& net, int rows, int cols,
                               double west_east_per_interval, double cross_per_interval,
                               int horizon_s);

// Writes trips.csv, link_intervals.csv, decisions.csv, summary.json into dir.
void write_run_outputs(const std::string& dir, const RoadNetwork& net, const RunResult& result,
                       const ScenarioConfig& cfg, std::uint64_t network_hash,
                       std::uint64_t demand_hash);

std::string scenario_config_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(const std::string& json_text);

} // namespace ecoroute
