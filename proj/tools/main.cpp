#include "ecoroute/csvio.hpp"
#include "ecoroute/engine.hpp"
#include "ecoroute/manifest.hpp"
#include "ecoroute/metrics.hpp"
#include "ecoroute/network.hpp"
#include "ecoroute/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace ecoroute;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntimeAbort = 2;

struct InputPaths {
    std::string network;
    std::string demand;
    std::string rates;
    std::string fleet;
    std::string nodes;
};

struct LoadedInputs {
    RoadNetwork net;
    DemandProfile demand;
    EmissionRateTable rates;
    FleetComposition fleet;
};

LoadedInputs load_inputs(const InputPaths& paths) {
    LoadedInputs in;
    in.net = load_network(paths.network, Connectivity::Weak);
    if (!paths.nodes.empty()) load_node_coords(in.net, paths.nodes);
    in.demand = load_demand(in.net, paths.demand);
    in.demand.validate(in.net);
    in.rates = load_rate_table(paths.rates);
    in.fleet = load_fleet(paths.fleet);
    in.fleet.validate(in.rates);
    return in;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split_list(s)) {
        auto dash = part.find('-');
        if (dash != std::string::npos && dash > 0) {
            std::uint64_t lo = std::stoull(part.substr(0, dash));
            std::uint64_t hi = std::stoull(part.substr(dash + 1));
            for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
        } else {
            seeds.push_back(std::stoull(part));
        }
    }
    if (seeds.empty()) throw ValidationError("no seeds given");
    return seeds;
}

int cmd_validate(const InputPaths& paths) {
    int failures = 0;
    auto check = [&](const std::string& label, auto&& fn) {
        try {
            fn();
            std::cout << "ok    " << label << "\n";
        } catch (const std::exception& e) {
            std::cout << "FAIL  " << label << ": " << e.what() << "\n";
            ++failures;
        }
    };

    RoadNetwork net;
    bool net_ok = false;
    check("network " + paths.network, [&] {
        net = load_network(paths.network, Connectivity::Weak);
        net_ok = true;
    });
    if (net_ok && !paths.nodes.empty())
        check("nodes " + paths.nodes, [&] { load_node_coords(net, paths.nodes); });

    EmissionRateTable rates;
    bool rates_ok = false;
    if (!paths.rates.empty())
        check("rates " + paths.rates, [&] {
            rates = load_rate_table(paths.rates);
            rates_ok = true;
        });
    if (!paths.fleet.empty())
        check("fleet " + paths.fleet, [&] {
            FleetComposition fleet = load_fleet(paths.fleet);
            if (rates_ok) fleet.validate(rates);
        });
    if (net_ok && !paths.demand.empty())
        check("demand " + paths.demand, [&] {
            DemandProfile demand = load_demand(net, paths.demand);
            demand.validate(net);
        });

    if (failures) {
        std::cout << failures << " validation failure(s)\n";
        return kExitValidation;
    }
    std::cout << "all inputs valid\n";
    return kExitOk;
}

struct RunTask {
    std::string scenario_id;
    std::uint64_t seed;
    std::string dir;
};

int cmd_run(const InputPaths& paths, const std::string& scenarios_arg,
            const std::string& seeds_arg, const std::string& out_dir,
            const std::string& dissemination, int gridlock_horizon, int dj, int dw,
            int warmup, double service_rate, double stale_penalty,
            const std::string& config_path, bool trajectories, int jobs) {
    LoadedInputs in = load_inputs(paths);

    std::vector<std::string> scenario_ids = scenarios_arg == "all"
                                                ? std::vector<std::string>{"S1", "S2", "S3", "S4", "S5"}
                                                : split_list(scenarios_arg);
    std::vector<std::uint64_t> seeds = parse_seeds(seeds_arg);

    std::uint64_t network_hash = hash_file(paths.network);
    std::uint64_t demand_hash = hash_file(paths.demand);

    auto make_config = [&](const std::string& id, std::uint64_t seed) {
        ScenarioConfig cfg;
        if (!config_path.empty()) {
            cfg = scenario_config_from_json(read_file(config_path));
            cfg.scenario_id = id.empty() ? cfg.scenario_id : id;
            cfg.seed = seed;
        } else {
            cfg = ScenarioConfig::standard(id, seed);
        }
        if (dissemination == "idealized") {
            cfg.dissemination = DisseminationMode::Idealized;
        } else if (dissemination.rfind("gossip:", 0) == 0) {
            cfg.dissemination = DisseminationMode::HopGossip;
            cfg.gossip_hops = std::stoi(dissemination.substr(7));
        } else if (!dissemination.empty()) {
            throw ValidationError("dissemination must be 'idealized' or 'gossip:<k>'");
        }
        if (gridlock_horizon > 0) cfg.gridlock_horizon_s = gridlock_horizon;
        if (dj > 0) cfg.routing_interval_s = dj;
        if (dw > 0) cfg.intermediate_interval_s = dw;
        if (warmup >= 0) cfg.warmup_s = warmup;
        if (service_rate > 0) cfg.dynamics.service_rate = service_rate;
        if (stale_penalty > 0) cfg.stale_cost_factor = stale_penalty;
        cfg.validate();
        return cfg;
    };

    std::vector<RunTask> tasks;
    for (const auto& id : scenario_ids)
        for (std::uint64_t seed : seeds)
            tasks.push_back(RunTask{id, seed, out_dir + "/" + id + "_seed" + std::to_string(seed)});

    std::atomic<std::size_t> next{0};
    std::atomic<bool> aborted{false};
    std::mutex io_mutex;
    std::string abort_message;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || aborted.load()) return;
            const RunTask& task = tasks[i];
            ScenarioConfig cfg = make_config(task.scenario_id, task.seed);
            fs::create_directories(task.dir);

            RunManifest manifest;
            manifest.scenario_config_json = scenario_config_to_json(cfg);
            manifest.inputs = {{"network", paths.network, network_hash},
                               {"demand", paths.demand, demand_hash},
                               {"rates", paths.rates, hash_file(paths.rates)},
                               {"fleet", paths.fleet, hash_file(paths.fleet)}};
            if (!paths.nodes.empty())
                manifest.inputs.push_back({"nodes", paths.nodes, hash_file(paths.nodes)});
            manifest.seeds = {task.seed};
            manifest.out_dir = task.dir;
            write_file(task.dir + "/manifest.json", manifest.to_json());

            try {
                std::string traj_buffer;
                TrajectorySink sink;
                if (trajectories) {
                    traj_buffer = "vehicle_id,t_s,link_id,position_m,speed_ms,accel_ms2,opmode,"
                                  "ghg_g_per_s,nox_g_per_s\n";
                    sink.on_sample = [&](int vid, int t, LinkIndex l, double pos, double speed,
                                         double accel, int op, double ghg, double nox) {
                        traj_buffer += join_row(
                            {std::to_string(vid), std::to_string(t), in.net.link(l).id,
                             format_double(pos), format_double(speed), format_double(accel),
                             std::to_string(op), format_double(ghg), format_double(nox)});
                    };
                }
                RunResult result =
                    run_scenario(in.net, in.demand, in.rates, in.fleet, cfg,
                                 trajectories ? &sink : nullptr);
                write_run_outputs(task.dir, in.net, result, cfg, network_hash, demand_hash);
                if (trajectories) write_file(task.dir + "/trajectories.csv", traj_buffer);
                ScenarioSummary summary;
                bool any_metered = false;
                for (const auto& t : result.trips) any_metered |= !t.warmup;
                if (any_metered) summary = summarize(result.trips, cfg.scenario_id);
                summary.scenario_id = cfg.scenario_id;
                summary.seed = task.seed;
                summary.network_hash = network_hash;
                summary.demand_hash = demand_hash;
                write_file(task.dir + "/summary.json", summary_to_json(summary));

                std::lock_guard<std::mutex> lock(io_mutex);
                std::cout << task.scenario_id << " seed=" << task.seed << " done: trips="
                          << summary.trip_count << " mean_tt=" << summary.tt_s.mean
                          << "s total_ghg=" << summary.ghg_g.total / 1000.0 << "kg end="
                          << result.final_time_s << "s\n";
            } catch (const GridlockError& e) {
                write_file(task.dir + "/gridlock_dump.json", e.dump);
                std::lock_guard<std::mutex> lock(io_mutex);
                abort_message = std::string(e.what()) + " (dump: " + task.dir +
                                "/gridlock_dump.json)";
                aborted.store(true);
                return;
            }
        }
    };

    int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    if (aborted.load()) {
        std::cerr << "aborted: " << abort_message << "\n";
        return kExitRuntimeAbort;
    }
    return kExitOk;
}

std::vector<TripRecord> read_trips_csv(const std::string& path) {
    CsvReader reader(path);
    const auto& header = reader.header();
    std::vector<TripRecord> trips;
    std::vector<std::string> f;

    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError(path + ": missing column " + name);
    };
    // Header is read lazily; pull the first row to populate it.
    if (!reader.next_row(f)) throw ValidationError(path + ": no trips");
    std::size_t c_tt = col("tt_s"), c_vkt = col("vkt_km"), c_speed = col("mean_speed_kmh"),
                c_ghg = col("ghg_g"), c_nox = col("nox_g"), c_warmup = col("warmup"),
                c_id = col("vehicle_id");
    do {
        TripRecord t;
        t.vehicle_id = static_cast<int>(reader.field_int(f, c_id));
        t.tt_s = reader.field_double(f, c_tt);
        t.vkt_km = reader.field_double(f, c_vkt);
        t.mean_speed_kmh = reader.field_double(f, c_speed);
        t.ghg_ng = std::llround(reader.field_double(f, c_ghg) * 1e9);
        t.nox_ng = std::llround(reader.field_double(f, c_nox) * 1e9);
        t.warmup = reader.field_int(f, c_warmup) != 0;
        trips.push_back(t);
    } while (reader.next_row(f));
    return trips;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& baseline,
                const std::string& out_path) {
    std::map<std::string, ScenarioTrips> groups;
    for (const auto& dir : run_dirs) {
        ScenarioSummary s = summary_from_json(read_file(dir + "/summary.json"));
        auto& g = groups[s.scenario_id];
        if (g.trips.empty()) {
            g.scenario_id = s.scenario_id;
            g.network_hash = s.network_hash;
            g.demand_hash = s.demand_hash;
        } else if (g.network_hash != s.network_hash || g.demand_hash != s.demand_hash) {
            throw ValidationError("run " + dir + " used different network/demand inputs");
        }
        for (auto& t : read_trips_csv(dir + "/trips.csv")) g.trips.push_back(t);
    }
    std::vector<ScenarioTrips> list;
    list.reserve(groups.size());
    for (auto& [id, g] : groups) list.push_back(std::move(g));

    ComparisonReport report = compare_scenarios(list, baseline);
    std::string csv = comparison_to_csv(report);
    if (!out_path.empty()) {
        write_file(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    } else {
        std::cout << csv;
    }

    std::cout << "\npercent change vs " << baseline << ":\n";
    for (const auto& r : report.percent) {
        std::cout << "  " << r.scenario << " " << r.metric << ": " << format_double(r.percent_change)
                  << "%\n";
    }
    return kExitOk;
}

int cmd_gen_grid(int rows, int cols, const std::string& out_dir, bool bottleneck,
                 double block_length, int corridor_row, double we_demand, double cross_demand,
                 int horizon) {
    GridGeometry geo;
    geo.block_length_m = block_length;
    geo.corridor_row = corridor_row;
    geo.bottleneck = bottleneck;
    RoadNetwork net = generate_grid_network(rows, cols, geo);
    DemandProfile demand = make_grid_demand(net, rows, cols, we_demand, cross_demand, horizon);
    demand.validate(net);

    fs::create_directories(out_dir);
    save_network(net, out_dir + "/network.csv");
    save_node_coords(net, out_dir + "/nodes.csv");
    save_demand(net, demand, out_dir + "/demand.csv");
    save_rate_table(default_rate_table(), out_dir + "/rates.csv");
    save_fleet(default_fleet(), out_dir + "/fleet.csv");
    std::cout << "grid bundle written to " << out_dir << " (" << net.nodes().size() << " nodes, "
              << net.links().size() << " links, expected demand "
              << format_double(demand.total_expected()) << " vehicles)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ecoroute: deterministic eco-routing traffic microsimulation"};
    app.require_subcommand(1);

    InputPaths paths;

    auto* validate = app.add_subcommand("validate", "Validate input files");
    validate->add_option("--network", paths.network, "network csv")->required();
    validate->add_option("--demand", paths.demand, "demand csv");
    validate->add_option("--rates", paths.rates, "emission rate table csv");
    validate->add_option("--fleet", paths.fleet, "fleet composition csv");
    validate->add_option("--nodes", paths.nodes, "node coordinates csv");

    auto* run = app.add_subcommand("run", "Run a scenario batch");
    std::string scenarios = "all", seeds = "1", out_dir = "runs", dissemination, config_path;
    int gridlock_horizon = 0, dj = 0, dw = 0, warmup = -1, jobs = 1;
    double service_rate = 0.0, stale_penalty = 0.0;
    bool trajectories = false;
    run->add_option("--network", paths.network)->required();
    run->add_option("--demand", paths.demand)->required();
    run->add_option("--rates", paths.rates)->required();
    run->add_option("--fleet", paths.fleet)->required();
    run->add_option("--nodes", paths.nodes, "optional node coordinates");
    run->add_option("--scenario", scenarios, "comma list of S1..S5, or 'all'");
    run->add_option("--seeds", seeds, "comma list and/or ranges, e.g. 1,2,5-8");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--dissemination", dissemination, "idealized | gossip:<k>");
    run->add_option("--gridlock-horizon", gridlock_horizon, "abort after this many quiet seconds");
    run->add_option("--dj", dj, "routing update interval (s)");
    run->add_option("--dw", dw, "intermediate update interval (s)");
    run->add_option("--warmup", warmup, "warm-up period (s)");
    run->add_option("--service-rate", service_rate, "intersection crossings per second");
    run->add_option("--stale-penalty", stale_penalty, "cost factor applied to stale reports");
    run->add_option("--config", config_path, "scenario config json (overrides --scenario wiring)");
    run->add_flag("--trajectories", trajectories, "dump per-tick trajectories");
    run->add_option("--jobs", jobs, "concurrent runs");

    auto* compare = app.add_subcommand("compare", "Compare completed runs");
    std::vector<std::string> run_dirs;
    std::string baseline = "S1", report_path;
    compare->add_option("dirs", run_dirs, "run directories")->required()->expected(-1);
    compare->add_option("--baseline", baseline, "baseline scenario id");
    compare->add_option("--out", report_path, "report csv path");

    auto* gen = app.add_subcommand("gen-grid", "Generate a synthetic grid fixture bundle");
    int rows = 4, cols = 6, horizon = 1200, corridor_row = 1;
    double block_length = 250.0, we_demand = 25.0, cross_demand = 8.0;
    bool bottleneck = false;
    gen->add_option("--rows", rows);
    gen->add_option("--cols", cols);
    gen->add_option("--out", out_dir)->required();
    gen->add_flag("--bottleneck", bottleneck, "drop one corridor segment to 1 lane / 40 km/h");
    gen->add_option("--block-length", block_length);
    gen->add_option("--corridor-row", corridor_row, "row index of the fast corridor, -1 disables");
    gen->add_option("--we-demand", we_demand, "west-east vehicles per row per 300 s");
    gen->add_option("--cross-demand", cross_demand, "north-south vehicles per stream per 300 s");
    gen->add_option("--horizon", horizon, "demand horizon (s)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(paths);
        if (run->parsed())
            return cmd_run(paths, scenarios, seeds, out_dir, dissemination, gridlock_horizon, dj,
                           dw, warmup, service_rate, stale_penalty, config_path, trajectories,
                           jobs);
        if (compare->parsed()) return cmd_compare(run_dirs, baseline, report_path);
        if (gen->parsed())
            return cmd_gen_grid(rows, cols, out_dir, bottleneck, block_length, corridor_row,
                                we_demand, cross_demand, horizon);
    } catch (const GridlockError& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return kExitRuntimeAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
