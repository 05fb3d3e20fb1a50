#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ecoroute/csvio.hpp"
#include "ecoroute/linkstate.hpp"
#include "ecoroute/rng.hpp"

#include <cmath>

using namespace ecoroute;

namespace {

RoadNetwork path_graph() {
    RoadNetwork net;
    net.add_link("A", "B", 100, 50, 1, 3);
    net.add_link("B", "A", 100, 50, 1, 3);
    net.add_link("B", "C", 100, 50, 1, 3);
    net.add_link("C", "B", 100, 50, 1, 3);
    return net;
}

std::vector<LinkStateReport> initial_reports(const RoadNetwork& net) {
    std::vector<LinkStateReport> reports(net.links().size());
    for (std::size_t l = 0; l < reports.size(); ++l) {
        reports[l].link = static_cast<LinkIndex>(l);
        reports[l].interval_index = -1;
        reports[l].space_mean_speed_ms = net.link(static_cast<LinkIndex>(l)).speed_limit_ms();
        reports[l].travel_time_s = net.link(static_cast<LinkIndex>(l)).free_flow_time_s();
        reports[l].stale = true;
    }
    return reports;
}

std::vector<LinkStateReport> interval_reports(const RoadNetwork& net, int interval) {
    auto reports = initial_reports(net);
    for (auto& r : reports) {
        r.interval_index = interval;
        r.stale = false;
        r.idling_penalty_s = interval; // marker to identify the interval
    }
    return reports;
}

RoadNetwork random_connected_net(Rng& rng, int n_nodes) {
    RoadNetwork net;
    for (int i = 1; i < n_nodes; ++i) {
        std::string a = "N" + std::to_string(static_cast<int>(rng.next_below(i)));
        std::string b = "N" + std::to_string(i);
        if (!net.find_node(a) || !net.find_link(*net.find_node(a), net.add_node(b)))
            net.add_link(a, b, 100, 50, 1, 3);
    }
    // Extra random edges.
    for (int i = 0; i < n_nodes; ++i) {
        int a = static_cast<int>(rng.next_below(n_nodes));
        int b = static_cast<int>(rng.next_below(n_nodes));
        if (a == b) continue;
        std::string sa = "N" + std::to_string(a), sb = "N" + std::to_string(b);
        if (net.find_node(sa) && net.find_node(sb) &&
            !net.find_link(*net.find_node(sa), *net.find_node(sb)))
            net.add_link(sa, sb, 100, 50, 1, 3);
    }
    return net;
}

} // namespace

TEST_CASE("idealized dissemination: every view holds every report at age 0") {
    RoadNetwork net = path_graph();
    StateBus bus(net, DisseminationMode::Idealized, 1, initial_reports(net));
    bus.publish(0, interval_reports(net, 0));
    for (std::size_t n = 0; n < net.nodes().size(); ++n) {
        const NetworkStateView& v = bus.view(static_cast<NodeIndex>(n));
        CHECK(v.view_interval == 0);
        REQUIRE(v.reports.size() == net.links().size());
        for (std::size_t l = 0; l < v.reports.size(); ++l) {
            CHECK(v.reports[l].interval_index == 0);
            CHECK(v.age[l] == 0);
        }
    }
    // Identical views across intersections.
    for (std::size_t n = 1; n < net.nodes().size(); ++n) {
        const auto& a = bus.view(0).reports;
        const auto& b = bus.view(static_cast<NodeIndex>(n)).reports;
        for (std::size_t l = 0; l < a.size(); ++l)
            CHECK(a[l].idling_penalty_s == b[l].idling_penalty_s);
    }
}

TEST_CASE("hop gossip on a path: one hop per interval") {
    RoadNetwork net = path_graph();
    StateBus bus(net, DisseminationMode::HopGossip, 1, initial_reports(net));
    NodeIndex a = net.node_index("A");
    NodeIndex b = net.node_index("B");
    NodeIndex c = net.node_index("C");
    LinkIndex ba = *net.find_link(b, a); // downstream node A: report born at A

    bus.publish(0, interval_reports(net, 0));
    // Born at A: A sees it immediately, B one interval later, C two.
    CHECK(bus.view(a).reports[ba].interval_index == 0);
    CHECK(bus.view(b).reports[ba].interval_index == -1);
    CHECK(bus.view(c).reports[ba].interval_index == -1);

    bus.publish(1, interval_reports(net, 1));
    CHECK(bus.view(a).reports[ba].interval_index == 1);
    CHECK(bus.view(b).reports[ba].interval_index == 0);
    CHECK(bus.view(b).age[ba] == 1);
    CHECK(bus.view(c).reports[ba].interval_index == -1);

    bus.publish(2, interval_reports(net, 2));
    CHECK(bus.view(c).reports[ba].interval_index == 0);
    CHECK(bus.view(c).age[ba] == 2);
}

TEST_CASE("gossip ages equal ceil(hops/k) on random graphs") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng.next_below(8));
        RoadNetwork net = random_connected_net(rng, n);
        int k = 1 + static_cast<int>(rng.next_below(3));
        StateBus bus(net, DisseminationMode::HopGossip, k, initial_reports(net));
        // Publish enough intervals that every distance is in steady state.
        int horizon = n + 2;
        for (int j = 0; j <= horizon; ++j) bus.publish(j, interval_reports(net, j));

        for (std::size_t node = 0; node < net.nodes().size(); ++node) {
            auto hops = net.undirected_hops(static_cast<NodeIndex>(node));
            for (std::size_t l = 0; l < net.links().size(); ++l) {
                int d = hops[net.link(static_cast<LinkIndex>(l)).to_node];
                REQUIRE(d >= 0);
                int expected_age = (d + k - 1) / k;
                CHECK(bus.view(static_cast<NodeIndex>(node)).age[l] == expected_age);
                CHECK(bus.view(static_cast<NodeIndex>(node)).reports[l].interval_index ==
                      horizon - expected_age);
            }
        }
    }
}

TEST_CASE("no report is lost under gossip: every interval eventually arrives") {
    RoadNetwork net = path_graph();
    StateBus bus(net, DisseminationMode::HopGossip, 1, initial_reports(net));
    NodeIndex c = net.node_index("C");
    LinkIndex ba = *net.find_link(net.node_index("B"), net.node_index("A"));
    std::vector<int> seen;
    for (int j = 0; j < 6; ++j) {
        bus.publish(j, interval_reports(net, j));
        int got = bus.view(c).reports[ba].interval_index;
        if (seen.empty() || got != seen.back()) seen.push_back(got);
    }
    // C observes the full ordered sequence, two intervals behind.
    CHECK(seen == std::vector<int>{-1, 0, 1, 2, 3});
}

TEST_CASE("publish ordering and coverage are enforced") {
    RoadNetwork net = path_graph();
    StateBus bus(net, DisseminationMode::Idealized, 1, initial_reports(net));
    CHECK_THROWS_AS(bus.publish(1, interval_reports(net, 1)), ValidationError);
    auto short_reports = interval_reports(net, 0);
    short_reports.pop_back();
    CHECK_THROWS_AS(bus.publish(0, std::move(short_reports)), ValidationError);
}

TEST_CASE("v2i registry: CAV announcements, HDV rejection, latest wins") {
    V2iRegistry reg;
    reg.announce(7, true, 2, 9);
    REQUIRE(reg.latest(7));
    CHECK(reg.latest(7)->at_intersection == 2);
    CHECK(reg.latest(7)->destination == 9);

    reg.announce(7, true, 3, 9);
    CHECK(reg.latest(7)->at_intersection == 3);

    CHECK_THROWS_AS(reg.announce(8, false, 2, 9), ProtocolError);
    CHECK(!reg.latest(8));

    reg.forget(7);
    CHECK(!reg.latest(7));
}
