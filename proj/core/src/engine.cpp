#include "ecoroute/engine.hpp"

#include "ecoroute/csvio.hpp"
#include "ecoroute/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

namespace ecoroute {

using nlohmann::json;

namespace {
// Jammed links report a floored space-mean speed so travel-time costs stay
// finite; 0.05 m/s turns a 250 m link into an ~83 min cost.
constexpr double kMinSpaceMeanSpeed = 0.05;
// Free-flow emission estimates carry a surcharge over the steady cruise rate:
// even uncongested driving stops at intersections, so a naive steady-speed
// estimate would make every unvisited link look cleaner than any visited one
// and push the emission objectives onto ever-fresh detours.
constexpr double kFreeFlowEmissionOverhead = 1.35;
} // namespace

double DemandProfile::total_expected() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.expected_count;
    return sum;
}

void DemandProfile::validate(const RoadNetwork& net) const {
    for (const auto& e : entries) {
        if (e.origin < 0 || e.origin >= static_cast<NodeIndex>(net.nodes().size()) ||
            e.dest < 0 || e.dest >= static_cast<NodeIndex>(net.nodes().size()))
            throw ValidationError("demand references unknown node");
        if (e.origin == e.dest)
            throw ValidationError("demand OD pair with origin == destination: " +
                                  net.node(e.origin).id);
        if (e.expected_count < 0.0)
            throw ValidationError("demand expected_count must be >= 0");
        if (e.interval_length_s <= 0.0)
            throw ValidationError("demand interval length must be > 0");
        if (!net.reachable(e.origin, e.dest))
            throw ValidationError("demand OD pair unreachable: " + net.node(e.origin).id +
                                  " -> " + net.node(e.dest).id);
    }
}

DemandProfile load_demand(const RoadNetwork& net, const std::string& path) {
    CsvReader reader(path);
    DemandProfile demand;
    std::vector<std::string> f;
    while (reader.next_row(f)) {
        if (f.size() < 5)
            reader.fail("expected origin,dest,interval_start_s,interval_length_s,expected_count");
        DemandEntry e;
        auto o = net.find_node(f[0]);
        auto d = net.find_node(f[1]);
        if (!o) reader.fail("unknown origin node: " + f[0]);
        if (!d) reader.fail("unknown destination node: " + f[1]);
        e.origin = *o;
        e.dest = *d;
        e.interval_start_s = reader.field_double(f, 2);
        e.interval_length_s = reader.field_double(f, 3);
        e.expected_count = reader.field_double(f, 4);
        demand.entries.push_back(e);
    }
    return demand;
}

void save_demand(const RoadNetwork& net, const DemandProfile& demand, const std::string& path) {
    std::string out = "origin,dest,interval_start_s,interval_length_s,expected_count\n";
    for (const auto& e : demand.entries) {
        out += join_row({net.node(e.origin).id, net.node(e.dest).id,
                         format_double(e.interval_start_s), format_double(e.interval_length_s),
                         format_double(e.expected_count)});
    }
    write_file(path, out);
}

void FleetComposition::validate(const EmissionRateTable& rates) const {
    if (rows.empty()) throw ValidationError("fleet composition is empty");
    double total = 0.0;
    for (const auto& r : rows) {
        if (r.share <= 0.0) throw ValidationError("fleet share must be > 0");
        if (r.year_from > r.year_to) throw ValidationError("fleet year range reversed");
        for (int y = r.year_from; y <= r.year_to; ++y)
            if (!rates.covers_year(r.vehicle_class, y))
                throw ValidationError("rate table does not cover " + to_string(r.vehicle_class) +
                                      " model year " + std::to_string(y));
        total += r.share;
    }
    if (total <= 0.0) throw ValidationError("fleet shares sum to zero");
}

const FleetRow& FleetComposition::representative() const {
    if (rows.empty()) throw ValidationError("fleet composition is empty");
    const FleetRow* best = &rows[0];
    for (const auto& r : rows)
        if (r.share > best->share) best = &r;
    return *best;
}

FleetComposition load_fleet(const std::string& path) {
    CsvReader reader(path);
    FleetComposition fleet;
    std::vector<std::string> f;
    while (reader.next_row(f)) {
        if (f.size() < 4) reader.fail("expected vehicle_class,year_from,year_to,share");
        FleetRow r;
        try {
            r.vehicle_class = vehicle_class_from_string(f[0]);
        } catch (const ValidationError& e) {
            reader.fail(e.what());
        }
        r.year_from = static_cast<int>(reader.field_int(f, 1));
        r.year_to = static_cast<int>(reader.field_int(f, 2));
        r.share = reader.field_double(f, 3);
        fleet.rows.push_back(r);
    }
    return fleet;
}

void save_fleet(const FleetComposition& fleet, const std::string& path) {
    std::string out = "vehicle_class,year_from,year_to,share\n";
    for (const auto& r : fleet.rows) {
        out += join_row({to_string(r.vehicle_class), std::to_string(r.year_from),
                         std::to_string(r.year_to), format_double(r.share)});
    }
    write_file(path, out);
}

FleetComposition default_fleet() {
    FleetComposition fleet;
    fleet.rows.push_back(FleetRow{VehicleClass::PassengerCar, 1988, 1998, 0.10});
    fleet.rows.push_back(FleetRow{VehicleClass::PassengerCar, 1999, 2008, 0.30});
    fleet.rows.push_back(FleetRow{VehicleClass::PassengerCar, 2009, 2018, 0.55});
    fleet.rows.push_back(FleetRow{VehicleClass::Truck, 1999, 2008, 0.02});
    fleet.rows.push_back(FleetRow{VehicleClass::Truck, 2009, 2018, 0.03});
    return fleet;
}

ScenarioConfig ScenarioConfig::standard(const std::string& scenario_id, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.scenario_id = scenario_id;
    cfg.seed = seed;
    if (scenario_id == "S1") {
        cfg.fleet_kind = VehicleKind::HDV;
        cfg.routing_mode = RoutingMode::PretripDynamic;
        cfg.objective = ObjectiveSpec::travel_time();
    } else if (scenario_id == "S2") {
        cfg.fleet_kind = VehicleKind::CAV;
        cfg.routing_mode = RoutingMode::E2ecav;
        cfg.objective = ObjectiveSpec::travel_time();
    } else if (scenario_id == "S3") {
        cfg.fleet_kind = VehicleKind::CAV;
        cfg.routing_mode = RoutingMode::E2ecav;
        cfg.objective = ObjectiveSpec::ghg_only();
    } else if (scenario_id == "S4") {
        cfg.fleet_kind = VehicleKind::CAV;
        cfg.routing_mode = RoutingMode::E2ecav;
        cfg.objective = ObjectiveSpec::travel_time_idling();
    } else if (scenario_id == "S5") {
        cfg.fleet_kind = VehicleKind::CAV;
        cfg.routing_mode = RoutingMode::E2ecav;
        cfg.objective = ObjectiveSpec::multi_objective();
    } else {
        throw ValidationError("unknown scenario id: " + scenario_id +
                              " (expected S1..S5)");
    }
    return cfg;
}

void ScenarioConfig::validate() const {
    objective.validate();
    if (routing_interval_s <= 0 || intermediate_interval_s <= 0)
        throw ValidationError("update intervals must be > 0");
    if (routing_interval_s % intermediate_interval_s != 0)
        throw ValidationError("routing interval must be a multiple of the intermediate interval");
    if (warmup_s < 0) throw ValidationError("warmup must be >= 0");
    if (gridlock_horizon_s <= 0) throw ValidationError("gridlock horizon must be > 0");
    if (routing_mode == RoutingMode::PretripDynamic && fleet_kind != VehicleKind::HDV)
        throw ValidationError("pre-trip dynamic routing is the HDV scheme");
    if (routing_mode == RoutingMode::PretripDynamic && objective.name != "TT")
        throw ValidationError("pre-trip dynamic routing uses the TT objective");
    if (dissemination == DisseminationMode::HopGossip && gossip_hops < 1)
        throw ValidationError("gossip hop count must be >= 1");
}

std::vector<Arrival> generate_arrivals(const DemandProfile& demand,
                                       const FleetComposition& fleet, std::uint64_t seed) {
    Rng arrivals_rng = Rng::stream(seed, "arrivals");
    Rng fleet_rng = Rng::stream(seed, "fleet");

    double share_total = 0.0;
    for (const auto& r : fleet.rows) share_total += r.share;

    std::vector<Arrival> out;
    for (const auto& e : demand.entries) {
        std::uint64_t n = arrivals_rng.next_poisson(e.expected_count);
        for (std::uint64_t k = 0; k < n; ++k) {
            Arrival a;
            a.depart_s = e.interval_start_s + arrivals_rng.next_double() * e.interval_length_s;
            a.origin = e.origin;
            a.dest = e.dest;
            double pick = fleet_rng.next_double() * share_total;
            double acc = 0.0;
            const FleetRow* row = &fleet.rows.back();
            for (const auto& r : fleet.rows) {
                acc += r.share;
                if (pick < acc) {
                    row = &r;
                    break;
                }
            }
            a.vehicle_class = row->vehicle_class;
            a.model_year = row->year_from +
                           static_cast<int>(fleet_rng.next_below(
                               static_cast<std::uint64_t>(row->year_to - row->year_from + 1)));
            out.push_back(a);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Arrival& a, const Arrival& b) { return a.depart_s < b.depart_s; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
}

namespace {

// Walks a shortest-path tree from dest back to the source's first outgoing link.
LinkIndex first_link_on_path(const Router::Tree& tree, NodeIndex dest) {
    if (std::isinf(tree.cost_min[dest]))
        throw RoutingError("destination unreachable");
    NodeIndex cur = dest;
    while (tree.parent_node[cur] != tree.source) cur = tree.parent_node[cur];
    return tree.parent_link[cur];
}

struct LinkAccum {
    double dist_m = 0.0;      // all vehicles (space-mean speed substrate)
    double veh_s = 0.0;
    std::int64_t ghg_ng = 0;  // non-warm-up vehicles (metrics substrate)
    std::int64_t nox_ng = 0;
    double metric_veh_s = 0.0;
    double metric_dist_m = 0.0;
    double idle_sum_s = 0.0;
    int idle_count = 0;
};

} // namespace

RunResult run_scenario(const RoadNetwork& net, const DemandProfile& demand,
                       const EmissionRateTable& rates, const FleetComposition& fleet,
                       const ScenarioConfig& cfg, const TrajectorySink* trajectory) {
    cfg.validate();
    demand.validate(net);
    rates.validate();
    fleet.validate(rates);

    const int dj = cfg.routing_interval_s;
    const int dw = cfg.intermediate_interval_s;
    const std::size_t link_count = net.links().size();

    Router router(net);

    // Free-flow synthetic reports seed every view; a representative fleet
    // vehicle provides the free-flow emission estimate so that silence never
    // reads as "free" to the GHG objectives.
    const FleetRow& rep = fleet.representative();
    const int rep_year = (rep.year_from + rep.year_to) / 2;
    std::vector<LinkStateReport> initial(link_count);
    for (std::size_t l = 0; l < link_count; ++l) {
        const Link& link = net.link(static_cast<LinkIndex>(l));
        LinkStateReport& r = initial[l];
        r.link = static_cast<LinkIndex>(l);
        r.interval_index = -1;
        r.space_mean_speed_ms = link.speed_limit_ms();
        r.travel_time_s = link.free_flow_time_s();
        r.idling_penalty_s = 0.0;
        r.ghg_rate_g_per_veh_s =
            kFreeFlowEmissionOverhead *
            rates.steady_rate(rep.vehicle_class, rep_year, link.speed_limit_ms(), Pollutant::GHG);
        r.nox_rate_g_per_veh_s =
            kFreeFlowEmissionOverhead *
            rates.steady_rate(rep.vehicle_class, rep_year, link.speed_limit_ms(), Pollutant::NOx);
        r.density_ratio = 0.0;
        r.stale = true;
    }
    std::vector<std::pair<double, double>> last_rates(link_count);
    for (std::size_t l = 0; l < link_count; ++l)
        last_rates[l] = {initial[l].ghg_rate_g_per_veh_s, initial[l].nox_rate_g_per_veh_s};

    StateBus bus(net, cfg.dissemination, cfg.gossip_hops, initial);
    V2iRegistry v2i;

    RunResult result;
    result.scenario_id = cfg.scenario_id;
    result.seed = cfg.seed;

    // Per-interval routing-tree cache, invalidated on publish.
    std::vector<std::unique_ptr<Router::Tree>> tree_cache(net.nodes().size());
    auto tree_for = [&](NodeIndex at) -> const Router::Tree& {
        if (!tree_cache[at]) {
            tree_cache[at] = std::make_unique<Router::Tree>(
                router.shortest_tree(bus.view(at), cfg.objective, at, cfg.stale_cost_factor));
        }
        return *tree_cache[at];
    };

    World* world_ptr = nullptr;
    auto chooser = [&](VehicleState& v, NodeIndex at) -> LinkIndex {
        int now = world_ptr ? world_ptr->time() : 0;
        if (cfg.routing_mode == RoutingMode::PretripDynamic) {
            if (v.current_link < 0) {
                // Entry: freeze the travel-time shortest path under current
                // conditions; no en-route updates afterwards.
                RouteDecision d = router.pretrip_route(bus.view(at), at, v.dest);
                v.fixed_path = d.full_path;
                v.path_pos = 0;
                result.decisions.push_back(
                    DecisionRow{v.spec.id, now, at, d.next_link, cfg.objective.name});
                return d.next_link;
            }
            if (v.path_pos + 1 >= v.fixed_path.size())
                throw RoutingError("pre-trip path exhausted before destination");
            return v.fixed_path[v.path_pos + 1];
        }
        // E2ECAV: the vehicle announces its destination, the intersection
        // answers with the next hop under its current view.
        v2i.announce(v.spec.id, v.spec.kind == VehicleKind::CAV, at, v.dest);
        LinkIndex next = first_link_on_path(tree_for(at), v.dest);
        result.decisions.push_back(DecisionRow{v.spec.id, now, at, next, cfg.objective.name});
        return next;
    };

    World world(net, cfg.dynamics, chooser);
    world_ptr = &world;

    std::vector<Arrival> arrivals = generate_arrivals(demand, fleet, cfg.seed);
    for (const Arrival& a : arrivals) {
        VehicleSpec spec;
        spec.kind = cfg.fleet_kind;
        spec.vehicle_class = a.vehicle_class;
        spec.model_year = a.model_year;
        spec.idm = cfg.fleet_kind == VehicleKind::HDV ? cfg.dynamics.hdv : cfg.dynamics.cav;
        world.schedule(spec, a.origin, a.dest, a.depart_s, a.depart_s < cfg.warmup_s);
    }
    result.vehicles_scheduled = world.vehicles_scheduled();

    std::vector<LinkAccum> acc(link_count);
    std::vector<LinkEmissionBuckets> buckets;
    buckets.reserve(link_count);
    for (std::size_t l = 0; l < link_count; ++l)
        buckets.emplace_back(net.link(static_cast<LinkIndex>(l)).section_count);

    std::vector<std::int64_t> trip_ghg(world.vehicles_scheduled(), 0);
    std::vector<std::int64_t> trip_nox(world.vehicles_scheduled(), 0);

    auto close_interval_rows = [&](int t_end, bool publish) {
        int interval_index = t_end / dj - (t_end % dj == 0 ? 1 : 0);
        int t_start = t_end % dj == 0 ? t_end - dj : (t_end / dj) * dj;
        std::vector<LinkStateReport> reports(link_count);
        for (std::size_t l = 0; l < link_count; ++l) {
            const Link& link = net.link(static_cast<LinkIndex>(l));
            LinkAccum& a = acc[l];
            LinkStateReport r;
            r.link = static_cast<LinkIndex>(l);
            r.interval_index = interval_index;
            bool empty = a.veh_s <= 0.0;
            if (empty) {
                r.space_mean_speed_ms = link.speed_limit_ms();
            } else {
                r.space_mean_speed_ms = std::max(a.dist_m / a.veh_s, kMinSpaceMeanSpeed);
            }
            r.travel_time_s = link.length_m / r.space_mean_speed_ms;
            r.idling_penalty_s = a.idle_count > 0 ? a.idle_sum_s / a.idle_count : 0.0;
            LinkEmissionBuckets::IntervalRates er = buckets[l].close_interval();
            if (er.any_data) {
                r.ghg_rate_g_per_veh_s = er.ghg_g_per_veh_s;
                r.nox_rate_g_per_veh_s = er.nox_g_per_veh_s;
                last_rates[l] = {er.ghg_g_per_veh_s, er.nox_g_per_veh_s};
            } else {
                // Stale: hold the last known rates but relax them toward the
                // free-flow estimate, half of the gap per idle
                // interval. Silence is never read as "free", yet a link that
                // cleared long ago stops repelling the emission objectives.
                last_rates[l].first += 0.5 * (initial[l].ghg_rate_g_per_veh_s - last_rates[l].first);
                last_rates[l].second += 0.5 * (initial[l].nox_rate_g_per_veh_s - last_rates[l].second);
                r.ghg_rate_g_per_veh_s = last_rates[l].first;
                r.nox_rate_g_per_veh_s = last_rates[l].second;
            }
            r.density_ratio = world.density_ratio(static_cast<LinkIndex>(l));
            r.stale = empty;

            IntervalLogRow row;
            row.link = static_cast<LinkIndex>(l);
            row.interval_index = interval_index;
            row.t_start_s = t_start;
            row.t_end_s = t_end;
            row.report = r;
            row.ghg_ng = a.ghg_ng;
            row.nox_ng = a.nox_ng;
            row.vehicle_seconds = a.metric_veh_s;
            row.distance_m = a.metric_dist_m;
            row.vehicles_at_close = world.link_vehicle_count(static_cast<LinkIndex>(l));
            result.interval_log.push_back(row);
            reports[l] = r;
            a = LinkAccum{};
        }
        if (publish) {
            bus.publish(interval_index, std::move(reports));
            for (auto& t : tree_cache) t.reset();
        }
    };

    int quiet_ticks = 0;
    while (!world.finished()) {
        const int t = world.time();
        TickEvents ev = world.tick();

        for (const IdlingSample& s : ev.idling) {
            acc[s.link].idle_sum_s += s.waited_s;
            acc[s.link].idle_count += 1;
        }

        auto sample_vehicle = [&](int vid) {
            const VehicleState& v = world.vehicles()[vid];
            const Link& link = net.link(v.current_link);
            int op = classify_opmode(v.speed_ms, v.accel_ms2);
            double ghg_gps = rates.rate(v.spec.vehicle_class, v.spec.model_year, op, Pollutant::GHG);
            double nox_gps = rates.rate(v.spec.vehicle_class, v.spec.model_year, op, Pollutant::NOx);
            std::int64_t ghg_ng = std::llround(ghg_gps * 1e9);
            std::int64_t nox_ng = std::llround(nox_gps * 1e9);
            trip_ghg[vid] += ghg_ng;
            trip_nox[vid] += nox_ng;

            int section = std::min(link.section_count - 1,
                                   static_cast<int>(v.position_m /
                                                    (link.length_m / link.section_count)));
            buckets[v.current_link].add_second(section, vid, ghg_gps, nox_gps);

            LinkAccum& a = acc[v.current_link];
            a.dist_m += v.moved_m_last_tick;
            a.veh_s += 1.0;
            if (!v.warmup) {
                a.ghg_ng += ghg_ng;
                a.nox_ng += nox_ng;
                a.metric_veh_s += 1.0;
                a.metric_dist_m += v.moved_m_last_tick;
                result.total_ghg_ng += ghg_ng;
                result.total_nox_ng += nox_ng;
            }
            if (trajectory && trajectory->on_sample)
                trajectory->on_sample(vid, t, v.current_link, v.position_m, v.speed_ms,
                                      v.accel_ms2, op, ghg_gps, nox_gps);
        };

        // Vehicles that crossed their final stopline this tick still drove a
        // last second; sample it before closing the trip.
        for (const ExitEvent& ex : ev.exited) {
            sample_vehicle(ex.vehicle_id);
            const VehicleState& v = world.vehicles()[ex.vehicle_id];
            TripRecord trip;
            trip.vehicle_id = ex.vehicle_id;
            trip.kind = v.spec.kind;
            trip.vehicle_class = v.spec.vehicle_class;
            trip.model_year = v.spec.model_year;
            trip.origin = v.origin;
            trip.dest = v.dest;
            trip.depart_s = v.scheduled_depart_s;
            trip.enter_s = v.entered_network_at;
            trip.arrive_s = ex.at_time;
            // In-network travel time. Scheduled departures can stall outside
            // the network when an entry link is full; that wait is a loading
            // artifact, not driving, and is visible as arrive - depart.
            trip.tt_s = trip.arrive_s - trip.enter_s;
            trip.vkt_km = v.odometer_m / 1000.0;
            trip.ghg_ng = trip_ghg[ex.vehicle_id];
            trip.nox_ng = trip_nox[ex.vehicle_id];
            trip.mean_speed_kmh = trip.tt_s > 0 ? trip.vkt_km / (trip.tt_s / 3600.0) : 0.0;
            trip.warmup = v.warmup;
            result.trips.push_back(trip);
            v2i.forget(ex.vehicle_id);
        }

        for (int vid : world.active_vehicles()) sample_vehicle(vid);

        const int now = world.time();
        if (now % dw == 0)
            for (auto& b : buckets) b.close_intermediate();
        if (now % dj == 0) close_interval_rows(now, true);

        if (!world.finished()) {
            quiet_ticks = ev.any_activity ? 0 : quiet_ticks + 1;
            if (quiet_ticks >= cfg.gridlock_horizon_s) {
                json dump;
                dump["time_s"] = now;
                dump["vehicles_in_network"] = world.vehicles_in_network();
                dump["vehicles_arrived"] = world.vehicles_arrived();
                dump["pending_entries"] = world.pending_entries();
                json links = json::array();
                for (std::size_t l = 0; l < link_count; ++l) {
                    if (world.link_vehicle_count(static_cast<LinkIndex>(l)) == 0) continue;
                    json jl;
                    jl["link"] = net.link(static_cast<LinkIndex>(l)).id;
                    jl["vehicles"] = world.link_vehicle_count(static_cast<LinkIndex>(l));
                    jl["density_ratio"] = world.density_ratio(static_cast<LinkIndex>(l));
                    links.push_back(jl);
                }
                dump["occupied_links"] = links;
                throw GridlockError("gridlock: no activity for " +
                                        std::to_string(cfg.gridlock_horizon_s) +
                                        " s at t=" + std::to_string(now),
                                    dump.dump(2));
            }
        }
    }

    // Flush the trailing partial interval so the log covers every sample.
    const int end = world.time();
    if (end % dw != 0)
        for (auto& b : buckets) b.close_intermediate();
    if (end % dj != 0) close_interval_rows(end, false);

    result.vehicles_arrived = world.vehicles_arrived();
    result.final_time_s = end;
    std::sort(result.trips.begin(), result.trips.end(),
              [](const TripRecord& a, const TripRecord& b) { return a.vehicle_id < b.vehicle_id; });
    return result;
}

RoadNetwork generate_grid_network(int rows, int cols, const GridGeometry& geo) {
    if (rows < 2 || cols < 2)
        throw ValidationError("grid needs rows >= 2 and cols >= 2");
    RoadNetwork net;
    auto name = [](int r, int c) {
        auto pad = [](int x) {
            std::string s = std::to_string(x);
            return s.size() < 2 ? "0" + s : s;
        };
        return "n" + pad(r) + "_" + pad(c);
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            net.add_node(name(r, c));

    const int bottleneck_col = cols / 2 - 1;
    for (int r = 0; r < rows; ++r) {
        bool corridor = r == geo.corridor_row;
        double speed = corridor ? geo.corridor_speed_kmh : geo.row_speed_kmh;
        int lanes = corridor ? geo.corridor_lanes : geo.row_lanes;
        for (int c = 0; c + 1 < cols; ++c) {
            bool drop = geo.bottleneck && corridor && c == bottleneck_col;
            // The lane-drop applies to the eastbound direction only.
            net.add_link(name(r, c), name(r, c + 1), geo.block_length_m,
                         drop ? std::min(40.0, speed) : speed, drop ? 1 : lanes,
                         geo.section_count);
            net.add_link(name(r, c + 1), name(r, c), geo.block_length_m, speed, lanes,
                         geo.section_count);
        }
    }
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r + 1 < rows; ++r) {
            net.add_link(name(r, c), name(r + 1, c), geo.block_length_m, geo.col_speed_kmh,
                         geo.col_lanes, geo.section_count);
            net.add_link(name(r + 1, c), name(r, c), geo.block_length_m, geo.col_speed_kmh,
                         geo.col_lanes, geo.section_count);
        }
    }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            net.set_node_coords(name(r, c), c * geo.block_length_m, r * geo.block_length_m);
    net.validate(Connectivity::Strong);
    return net;
}

DemandProfile make_grid_demand(const RoadNetwork& net, int rows, int cols,
                               double west_east_per_interval, double cross_per_interval,
                               int horizon_s) {
    auto name = [](int r, int c) {
        auto pad = [](int x) {
            std::string s = std::to_string(x);
            return s.size() < 2 ? "0" + s : s;
        };
        return "n" + pad(r) + "_" + pad(c);
    };
    DemandProfile demand;
    const int interval = 300;
    for (int start = 0; start < horizon_s; start += interval) {
        for (int r = 0; r < rows; ++r) {
            DemandEntry e;
            e.origin = net.node_index(name(r, 0));
            e.dest = net.node_index(name(r, cols - 1));
            e.interval_start_s = start;
            e.interval_length_s = interval;
            e.expected_count = west_east_per_interval;
            demand.entries.push_back(e);
        }
        for (int c = 1; c + 1 < cols; c += 2) {
            DemandEntry e;
            e.origin = net.node_index(name(0, c));
            e.dest = net.node_index(name(rows - 1, c));
            e.interval_start_s = start;
            e.interval_length_s = interval;
            e.expected_count = cross_per_interval;
            demand.entries.push_back(e);
        }
    }
    return demand;
}

void write_run_outputs(const std::string& dir, const RoadNetwork& net, const RunResult& result,
                       const ScenarioConfig& cfg, std::uint64_t network_hash,
                       std::uint64_t demand_hash) {
    std::filesystem::create_directories(dir);

    std::string trips =
        "vehicle_id,kind,vehicle_class,model_year,origin,dest,depart_s,enter_s,arrive_s,"
        "tt_s,vkt_km,ghg_g,nox_g,mean_speed_kmh,warmup\n";
    for (const TripRecord& tr : result.trips) {
        trips += join_row({std::to_string(tr.vehicle_id), to_string(tr.kind),
                           to_string(tr.vehicle_class), std::to_string(tr.model_year),
                           net.node(tr.origin).id, net.node(tr.dest).id,
                           format_double(tr.depart_s), format_double(tr.enter_s),
                           format_double(tr.arrive_s), format_double(tr.tt_s),
                           format_double(tr.vkt_km), format_double(tr.ghg_g()),
                           format_double(tr.nox_g()), format_double(tr.mean_speed_kmh),
                           tr.warmup ? "1" : "0"});
    }
    write_file(dir + "/trips.csv", trips);

    std::string intervals =
        "link_id,interval,t_start_s,t_end_s,u_ms,t_hat_s,pi_hat_s,ghg_rate_g_veh_s,"
        "nox_rate_g_veh_s,density_ratio,stale,ghg_g,nox_g,vehicle_seconds,distance_m,"
        "vehicles_at_close\n";
    for (const IntervalLogRow& row : result.interval_log) {
        intervals += join_row(
            {net.link(row.link).id, std::to_string(row.interval_index),
             std::to_string(row.t_start_s), std::to_string(row.t_end_s),
             format_double(row.report.space_mean_speed_ms), format_double(row.report.travel_time_s),
             format_double(row.report.idling_penalty_s),
             format_double(row.report.ghg_rate_g_per_veh_s),
             format_double(row.report.nox_rate_g_per_veh_s),
             format_double(row.report.density_ratio), row.report.stale ? "1" : "0",
             format_double(static_cast<double>(row.ghg_ng) * 1e-9),
             format_double(static_cast<double>(row.nox_ng) * 1e-9),
             format_double(row.vehicle_seconds), format_double(row.distance_m),
             std::to_string(row.vehicles_at_close)});
    }
    write_file(dir + "/link_intervals.csv", intervals);

    std::string decisions = "vehicle_id,t_s,node_id,chosen_link,objective\n";
    for (const DecisionRow& d : result.decisions) {
        decisions += join_row({std::to_string(d.vehicle_id), std::to_string(d.t_s),
                               net.node(d.at_node).id, net.link(d.chosen_link).id, d.objective});
    }
    write_file(dir + "/decisions.csv", decisions);

    json cfg_json = json::parse(scenario_config_to_json(cfg));
    cfg_json["network_hash"] = network_hash;
    cfg_json["demand_hash"] = demand_hash;
    write_file(dir + "/scenario_config.json", cfg_json.dump(2) + "\n");
}

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["scenario_id"] = cfg.scenario_id;
    j["fleet_kind"] = to_string(cfg.fleet_kind);
    j["routing_mode"] = cfg.routing_mode == RoutingMode::PretripDynamic ? "pretrip_dynamic" : "e2ecav";
    j["objective"] = cfg.objective.name;
    j["weight_time"] = cfg.objective.weight_time;
    j["weight_idling"] = cfg.objective.weight_idling;
    j["weight_co2_min_per_g"] = cfg.objective.weight_co2_min_per_g;
    j["seed"] = cfg.seed;
    j["routing_interval_s"] = cfg.routing_interval_s;
    j["intermediate_interval_s"] = cfg.intermediate_interval_s;
    j["warmup_s"] = cfg.warmup_s;
    j["dissemination"] =
        cfg.dissemination == DisseminationMode::Idealized ? "idealized" : "hop_gossip";
    j["gossip_hops"] = cfg.gossip_hops;
    j["gridlock_horizon_s"] = cfg.gridlock_horizon_s;
    j["stale_cost_factor"] = cfg.stale_cost_factor;
    j["service_rate"] = cfg.dynamics.service_rate;
    j["approach_zone_m"] = cfg.dynamics.approach_zone_m;
    j["vehicle_length_m"] = cfg.dynamics.vehicle_length_m;
    j["emergency_decel"] = cfg.dynamics.emergency_decel;
    auto idm = [](const IdmParams& p) {
        json o;
        o["max_accel"] = p.max_accel;
        o["comfortable_decel"] = p.comfortable_decel;
        o["reaction_headway_s"] = p.reaction_headway_s;
        o["min_gap_m"] = p.min_gap_m;
        o["accel_exponent"] = p.accel_exponent;
        return o;
    };
    j["idm_hdv"] = idm(cfg.dynamics.hdv);
    j["idm_cav"] = idm(cfg.dynamics.cav);
    return j.dump(2) + "\n";
}

ScenarioConfig scenario_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    ScenarioConfig cfg;
    cfg.scenario_id = j.at("scenario_id").get<std::string>();
    std::string kind = j.at("fleet_kind").get<std::string>();
    cfg.fleet_kind = kind == "HDV" ? VehicleKind::HDV : VehicleKind::CAV;
    std::string mode = j.at("routing_mode").get<std::string>();
    cfg.routing_mode =
        mode == "pretrip_dynamic" ? RoutingMode::PretripDynamic : RoutingMode::E2ecav;
    cfg.objective = ObjectiveSpec::from_name(j.at("objective").get<std::string>());
    if (j.contains("weight_time")) cfg.objective.weight_time = j["weight_time"].get<double>();
    if (j.contains("weight_idling")) cfg.objective.weight_idling = j["weight_idling"].get<double>();
    if (j.contains("weight_co2_min_per_g"))
        cfg.objective.weight_co2_min_per_g = j["weight_co2_min_per_g"].get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.routing_interval_s = j.at("routing_interval_s").get<int>();
    cfg.intermediate_interval_s = j.at("intermediate_interval_s").get<int>();
    cfg.warmup_s = j.at("warmup_s").get<int>();
    std::string diss = j.at("dissemination").get<std::string>();
    cfg.dissemination =
        diss == "idealized" ? DisseminationMode::Idealized : DisseminationMode::HopGossip;
    cfg.gossip_hops = j.at("gossip_hops").get<int>();
    cfg.gridlock_horizon_s = j.at("gridlock_horizon_s").get<int>();
    cfg.stale_cost_factor = j.value("stale_cost_factor", 1.0);
    cfg.dynamics.service_rate = j.value("service_rate", 1.0);
    cfg.dynamics.approach_zone_m = j.value("approach_zone_m", 30.0);
    cfg.dynamics.vehicle_length_m = j.value("vehicle_length_m", 5.0);
    cfg.dynamics.emergency_decel = j.value("emergency_decel", 6.0);
    auto idm = [](const json& o, IdmParams p) {
        p.max_accel = o.value("max_accel", p.max_accel);
        p.comfortable_decel = o.value("comfortable_decel", p.comfortable_decel);
        p.reaction_headway_s = o.value("reaction_headway_s", p.reaction_headway_s);
        p.min_gap_m = o.value("min_gap_m", p.min_gap_m);
        p.accel_exponent = o.value("accel_exponent", p.accel_exponent);
        return p;
    };
    if (j.contains("idm_hdv")) cfg.dynamics.hdv = idm(j["idm_hdv"], cfg.dynamics.hdv);
    if (j.contains("idm_cav")) cfg.dynamics.cav = idm(j["idm_cav"], cfg.dynamics.cav);
    return cfg;
}

} // namespace ecoroute
