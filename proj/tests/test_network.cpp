#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ecoroute/csvio.hpp"
#include "ecoroute/engine.hpp"
#include "ecoroute/network.hpp"
#include "ecoroute/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace ecoroute;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream(path) << content;
    return path;
}

} // namespace

TEST_CASE("two-way row expands to two directed links, one-way to one") {
    std::string path = write_temp(
        "net_dir.csv",
        "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
        "A,B,500,60,2,twoway\n"
        "B,C,300,40,1,oneway\n");
    RoadNetwork net = load_network(path);
    CHECK(net.links().size() == 3);
    REQUIRE(net.find_link(net.node_index("A"), net.node_index("B")));
    REQUIRE(net.find_link(net.node_index("B"), net.node_index("A")));
    REQUIRE(net.find_link(net.node_index("B"), net.node_index("C")));
    CHECK(!net.find_link(net.node_index("C"), net.node_index("B")));
    const Link& ab = net.link(*net.find_link(net.node_index("A"), net.node_index("B")));
    CHECK(ab.length_m == 500.0);
    CHECK(ab.lanes == 2);
}

TEST_CASE("directed link count equals sum over rows of direction multiplier") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::string content = "from_node,to_node,length_m,speed_kmh,lanes,direction\n";
        int expected = 0;
        int rows = 3 + static_cast<int>(rng.next_below(8));
        for (int i = 0; i < rows; ++i) {
            // Chain topology keeps the graph connected and rows unique.
            bool two = rng.next_double() < 0.5;
            content += "N" + std::to_string(i) + ",N" + std::to_string(i + 1) + ",100,50,1," +
                       (two ? "twoway" : "oneway") + "\n";
            expected += two ? 2 : 1;
        }
        std::string path = write_temp("net_count.csv", content);
        RoadNetwork net = load_network(path, Connectivity::None);
        CHECK(static_cast<int>(net.links().size()) == expected);
    }
}

TEST_CASE("sample network carries the very slow one-way block") {
    RoadNetwork net = load_network(std::string(ECOROUTE_DATA_DIR) + "/sample_network.csv");
    auto link = net.find_link(net.node_index("front_victoria"), net.node_index("king_victoria"));
    REQUIRE(link);
    CHECK(net.link(*link).speed_limit_kmh == 10.0);
    CHECK(net.link(*link).lanes == 1);
    CHECK(!net.find_link(net.node_index("king_victoria"), net.node_index("front_victoria")));
}

TEST_CASE("load -> save -> load round trip is identical field by field") {
    RoadNetwork net = load_network(std::string(ECOROUTE_DATA_DIR) + "/sample_network.csv");
    std::string path = (std::filesystem::temp_directory_path() / "net_rt.csv").string();
    save_network(net, path);
    RoadNetwork again = load_network(path);
    REQUIRE(net.links().size() == again.links().size());
    REQUIRE(net.nodes().size() == again.nodes().size());
    for (std::size_t i = 0; i < net.links().size(); ++i) {
        const Link& a = net.links()[i];
        const Link& b = again.links()[i];
        CHECK(a.id == b.id);
        CHECK(net.node(a.from_node).id == again.node(b.from_node).id);
        CHECK(net.node(a.to_node).id == again.node(b.to_node).id);
        CHECK(a.length_m == b.length_m);
        CHECK(a.speed_limit_kmh == b.speed_limit_kmh);
        CHECK(a.lanes == b.lanes);
        CHECK(a.section_count == b.section_count);
    }
}

TEST_CASE("reachable follows direction") {
    std::string path = write_temp("net_reach.csv",
                                  "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                  "A,B,100,50,1,oneway\n"
                                  "B,C,100,50,1,oneway\n");
    RoadNetwork net = load_network(path, Connectivity::Weak);
    CHECK(net.reachable("A", "B"));
    CHECK(net.reachable("A", "C"));
    CHECK(!net.reachable("B", "A"));
    CHECK(!net.reachable("C", "A"));
    CHECK_THROWS_AS((void)net.reachable("A", "nope"), ValidationError);
}

TEST_CASE("sample demand is fully routable") {
    RoadNetwork net = load_network(std::string(ECOROUTE_DATA_DIR) + "/sample_network.csv");
    DemandProfile demand =
        load_demand(net, std::string(ECOROUTE_DATA_DIR) + "/sample_demand.csv");
    demand.validate(net); // includes per-pair reachability
    for (const auto& e : demand.entries) CHECK(net.reachable(e.origin, e.dest));
}

TEST_CASE("loader errors carry line numbers and name the defect") {
    std::string bad_row = write_temp("net_bad1.csv",
                                     "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                     "A,B,100,50,1,oneway\n"
                                     "B,C,abc,50,1,oneway\n");
    CHECK_THROWS_WITH_AS(load_network(bad_row), doctest::Contains("3"), ParseError);

    std::string zero_len = write_temp("net_bad2.csv",
                                      "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                      "A,B,0,50,1,oneway\n");
    CHECK_THROWS_AS(load_network(zero_len), ParseError);

    std::string self_loop = write_temp("net_bad3.csv",
                                       "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                       "A,A,100,50,1,oneway\n");
    CHECK_THROWS_AS(load_network(self_loop), ParseError);

    std::string dup = write_temp("net_bad4.csv",
                                 "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                 "A,B,100,50,1,oneway\n"
                                 "A,B,200,60,1,oneway\n");
    CHECK_THROWS_AS(load_network(dup), ParseError);

    std::string bad_dir = write_temp("net_bad5.csv",
                                     "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                     "A,B,100,50,1,sideways\n");
    CHECK_THROWS_AS(load_network(bad_dir), ParseError);
}

TEST_CASE("node file referencing unknown node is rejected") {
    std::string net_path = write_temp("net_nodes.csv",
                                      "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                      "A,B,100,50,1,twoway\n");
    RoadNetwork net = load_network(net_path);
    std::string nodes = write_temp("nodes_bad.csv", "node_id,x_m,y_m\nA,0,0\nZ,1,1\n");
    CHECK_THROWS_AS(load_node_coords(net, nodes), ParseError);
}

TEST_CASE("connectivity validation") {
    std::string disconnected = write_temp("net_disc.csv",
                                          "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                          "A,B,100,50,1,twoway\n"
                                          "C,D,100,50,1,twoway\n");
    CHECK_THROWS_AS(load_network(disconnected, Connectivity::Weak), ValidationError);
    CHECK_NOTHROW(load_network(disconnected, Connectivity::None));

    std::string weak_only = write_temp("net_weak.csv",
                                       "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                       "A,B,100,50,1,oneway\n");
    RoadNetwork net = load_network(weak_only, Connectivity::Weak);
    CHECK_THROWS_AS(net.validate(Connectivity::Strong), ValidationError);
}

TEST_CASE("grid generator: counts, bottleneck, reachability") {
    GridGeometry geo;
    RoadNetwork g22 = generate_grid_network(2, 2, geo);
    CHECK(g22.nodes().size() == 4);
    CHECK(g22.links().size() == 8);

    GridGeometry bn;
    bn.corridor_row = 1;
    bn.bottleneck = true;
    RoadNetwork grid = generate_grid_network(4, 6, bn);
    // Exactly one directed link is narrower and slower than its reverse twin.
    int reduced = 0;
    for (const Link& l : grid.links()) {
        auto rev = grid.find_link(l.to_node, l.from_node);
        if (rev && grid.link(*rev).lanes > l.lanes &&
            grid.link(*rev).speed_limit_kmh > l.speed_limit_kmh)
            ++reduced;
    }
    CHECK(reduced == 1);

    // Breadth-first reachability between every ordered pair.
    for (std::size_t a = 0; a < grid.nodes().size(); ++a)
        for (std::size_t b = 0; b < grid.nodes().size(); ++b)
            CHECK(grid.reachable(static_cast<NodeIndex>(a), static_cast<NodeIndex>(b)));
}

TEST_CASE("undirected hop distances match a hand check") {
    std::string path = write_temp("net_hops.csv",
                                  "from_node,to_node,length_m,speed_kmh,lanes,direction\n"
                                  "A,B,100,50,1,oneway\n"
                                  "B,C,100,50,1,oneway\n"
                                  "C,D,100,50,1,oneway\n");
    RoadNetwork net = load_network(path, Connectivity::Weak);
    auto hops = net.undirected_hops(net.node_index("A"));
    CHECK(hops[net.node_index("A")] == 0);
    CHECK(hops[net.node_index("B")] == 1);
    CHECK(hops[net.node_index("C")] == 2);
    CHECK(hops[net.node_index("D")] == 3);
}
