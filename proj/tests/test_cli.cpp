#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ecoroute/csvio.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using ecoroute::read_file;

namespace {

const std::string cli = ECOROUTE_CLI_PATH;
const std::string data_dir = ECOROUTE_DATA_DIR;

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path sandbox() {
    fs::path dir = fs::temp_directory_path() / "ecoroute_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("gen-grid then validate succeeds") {
    fs::path dir = sandbox();
    std::string fixture = (dir / "fixture").string();
    CHECK(run("gen-grid --rows 3 --cols 4 --out " + fixture + " --bottleneck") == 0);
    CHECK(fs::exists(fixture + "/network.csv"));
    CHECK(fs::exists(fixture + "/nodes.csv"));
    CHECK(run("validate --network " + fixture + "/network.csv --demand " + fixture +
              "/demand.csv --rates " + fixture + "/rates.csv --fleet " + fixture +
              "/fleet.csv --nodes " + fixture + "/nodes.csv") == 0);
}

TEST_CASE("validate reports broken inputs with nonzero exit") {
    fs::path dir = sandbox();
    std::string fixture = (dir / "fixture").string();
    REQUIRE(run("gen-grid --rows 2 --cols 3 --out " + fixture) == 0);

    // Truncate the rate table: a missing opmode must fail validation.
    std::ofstream(dir / "bad_rates.csv")
        << "vehicle_class,year_from,year_to,opmode,pollutant,g_per_s\n"
           "passenger_car,2009,2018,0,GHG,1.0\n";
    CHECK(run("validate --network " + fixture + "/network.csv --rates " +
              (dir / "bad_rates.csv").string()) == 1);

    std::ofstream(dir / "bad_net.csv")
        << "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,A,100,50,1,oneway\n";
    CHECK(run("validate --network " + (dir / "bad_net.csv").string()) == 1);

    // Demand with an unreachable pair.
    std::ofstream(dir / "one_way.csv")
        << "from_node,to_node,length_m,speed_kmh,lanes,direction\nA,B,100,50,1,oneway\n";
    std::ofstream(dir / "bad_demand.csv")
        << "origin,dest,interval_start_s,interval_length_s,expected_count\nB,A,0,300,5\n";
    CHECK(run("validate --network " + (dir / "one_way.csv").string() + " --demand " +
              (dir / "bad_demand.csv").string()) == 1);
}

TEST_CASE("repeated runs are byte identical and compare handles itself") {
    fs::path dir = sandbox();
    std::string fixture = (dir / "fixture").string();
    REQUIRE(run("gen-grid --rows 3 --cols 4 --out " + fixture +
                " --bottleneck --we-demand 10 --cross-demand 4 --horizon 600") == 0);

    std::string base = "run --network " + fixture + "/network.csv --demand " + fixture +
                       "/demand.csv --rates " + fixture + "/rates.csv --fleet " + fixture +
                       "/fleet.csv --scenario S2 --seeds 7 --warmup 300";
    REQUIRE(run(base + " --out " + (dir / "runA").string()) == 0);
    REQUIRE(run(base + " --out " + (dir / "runB").string()) == 0);

    std::string a = read_file((dir / "runA/S2_seed7/trips.csv").string());
    std::string b = read_file((dir / "runB/S2_seed7/trips.csv").string());
    CHECK(a == b);
    CHECK(read_file((dir / "runA/S2_seed7/link_intervals.csv").string()) ==
          read_file((dir / "runB/S2_seed7/link_intervals.csv").string()));
    CHECK(read_file((dir / "runA/S2_seed7/decisions.csv").string()) ==
          read_file((dir / "runB/S2_seed7/decisions.csv").string()));
    CHECK(read_file((dir / "runA/S2_seed7/summary.json").string()) ==
          read_file((dir / "runB/S2_seed7/summary.json").string()));

    // A run compared against itself: exit 0 and zero percent deltas.
    std::string report = (dir / "self.csv").string();
    CHECK(run("compare " + (dir / "runA/S2_seed7").string() + " --baseline S2 --out " + report) ==
          0);
    std::string csv = read_file(report);
    CHECK(csv.find("S2,tt,") != std::string::npos);
    CHECK(csv.find(",0\n") != std::string::npos);

    CHECK(run("compare " + (dir / "runA/S2_seed7").string() + " --baseline S9") != 0);
}

TEST_CASE("multi-seed batch produces one directory per run") {
    fs::path dir = sandbox();
    std::string fixture = (dir / "fixture").string();
    REQUIRE(run("gen-grid --rows 3 --cols 3 --out " + fixture +
                " --we-demand 5 --cross-demand 2 --horizon 600") == 0);
    REQUIRE(run("run --network " + fixture + "/network.csv --demand " + fixture +
                "/demand.csv --rates " + fixture + "/rates.csv --fleet " + fixture +
                "/fleet.csv --scenario S1,S2 --seeds 1,2,3 --out " + (dir / "batch").string()) ==
            0);
    int dirs = 0;
    for (const auto& entry : fs::directory_iterator(dir / "batch"))
        if (entry.is_directory()) ++dirs;
    CHECK(dirs == 6);
    CHECK(fs::exists(dir / "batch/S1_seed3/summary.json"));
    CHECK(fs::exists(dir / "batch/S2_seed1/manifest.json"));
    CHECK(fs::exists(dir / "batch/S2_seed1/scenario_config.json"));
}

TEST_CASE("run on the bundled sample inputs") {
    fs::path dir = sandbox();
    CHECK(run("run --network " + data_dir + "/sample_network.csv --demand " + data_dir +
              "/sample_demand.csv --rates " + data_dir + "/default_rates.csv --fleet " +
              data_dir + "/default_fleet.csv --nodes " + data_dir +
              "/sample_nodes.csv --scenario S5 --seeds 1 --out " + (dir / "sample").string()) ==
          0);
    CHECK(fs::exists(dir / "sample/S5_seed1/trips.csv"));
}
