#pragma once

#include "ecoroute/network.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ecoroute {

// Per-link per-routing-interval state: the unit of I2I dissemination.
struct LinkStateReport {
    LinkIndex link = -1;
    int interval_index = -1;          // -1 marks the pre-simulation synthetic report
    double space_mean_speed_ms = 0.0; // U, free-flow when the interval was empty
    double travel_time_s = 0.0;       // T-hat = length / U
    double idling_penalty_s = 0.0;    // Pi-hat, mean stopline wait at the downstream node
    double ghg_rate_g_per_veh_s = 0.0;
    double nox_rate_g_per_veh_s = 0.0;
    double density_ratio = 0.0;       // rho / rho_jam in [0,1]
    bool stale = false;
};

// What one intersection believes about every link.
struct NetworkStateView {
    int view_interval = -1; // index of the newest interval folded into this view
    std::vector<LinkStateReport> reports; // by link index
    std::vector<int> age;                 // intervals since each report was generated
};

enum class DisseminationMode { Idealized, HopGossip };

// Interval-synchronous report exchange. Idealized mode hands every
// intersection the full report set the moment an interval closes; gossip mode
// propagates a report k hops per interval, so an intersection at hop distance
// d sees it ceil(d/k) intervals late. Publication happens-before any view
// read in the same interval.
class StateBus {
public:
    StateBus(const RoadNetwork& net, DisseminationMode mode, int gossip_hops,
             std::vector<LinkStateReport> initial_reports);

    void publish(int interval_index, std::vector<LinkStateReport> reports);

    const NetworkStateView& view(NodeIndex node) const;

    int report_age(NodeIndex node, LinkIndex link) const;
    DisseminationMode mode() const { return mode_; }
    int current_interval() const { return current_interval_; }

private:
    const RoadNetwork& net_;
    DisseminationMode mode_;
    int gossip_hops_;
    int current_interval_ = -1;
    std::vector<std::vector<LinkStateReport>> history_; // by interval index
    std::vector<LinkStateReport> initial_;
    // HopGossip: hop distance from link's downstream node to each node.
    std::vector<std::vector<int>> link_hops_; // [link][node]
    NetworkStateView shared_view_;            // Idealized
    std::vector<NetworkStateView> node_views_; // HopGossip
    void rebuild_views();
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Destination registrations from V2I announcements. Only CAVs announce; the
// latest announcement per vehicle wins.
class V2iRegistry {
public:
    struct Registration {
        NodeIndex at_intersection;
        NodeIndex destination;
    };

    // Throws ProtocolError when an HDV (no communication ability) announces.
    void announce(int vehicle_id, bool is_cav, NodeIndex at_intersection, NodeIndex destination);

    std::optional<Registration> latest(int vehicle_id) const;
    void forget(int vehicle_id);
    std::size_t size() const { return registrations_.size(); }

private:
    std::map<int, Registration> registrations_;
};

} // namespace ecoroute
