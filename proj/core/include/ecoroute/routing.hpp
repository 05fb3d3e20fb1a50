#pragma once

#include "ecoroute/linkstate.hpp"
#include "ecoroute/network.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecoroute {

// Monetary GHG weight: $15.77/tonne carbon price converted through $0.35/min
// value of time, expressed as minutes per gram.
inline constexpr double kGhgDollarsPerTonne = 15.77;
inline constexpr double kDollarsPerMinute = 0.35;
inline constexpr double kCo2WeightMinPerGram =
    kGhgDollarsPerTonne / 1.0e6 / kDollarsPerMinute;

// Routing objective: cost = b_T*W_T*T + b_Pi*W_Pi*Pi + b_CO2*W_CO2*E, with T
// and Pi in minutes and E the per-vehicle link emission in grams.
struct ObjectiveSpec {
    bool use_travel_time = true;  // beta_T
    bool use_idling = false;      // beta_Pi
    bool use_ghg = false;         // beta_CO2
    double weight_time = 1.0;     // W_T, minutes per minute
    double weight_idling = 1.0;   // W_Pi
    double weight_co2_min_per_g = kCo2WeightMinPerGram; // W_CO2

    std::string name = "TT";

    static ObjectiveSpec travel_time();        // TT
    static ObjectiveSpec travel_time_idling(); // TT*
    static ObjectiveSpec ghg_only();           // R1
    static ObjectiveSpec multi_objective();    // R2
    static ObjectiveSpec from_name(const std::string& name);

    void validate() const; // at least one beta set
};

struct LinkCost {
    LinkIndex link = -1;
    double cost_min = 0.0;
    double tt_min = 0.0;
    double idle_min = 0.0;
    double ghg_min = 0.0;
};

// Cost floor keeping every link strictly positive for the label-setting
// search even when a rate table reports zero emissions.
inline constexpr double kMinLinkCostMin = 1e-9;

LinkCost link_cost(const LinkStateReport& report, const ObjectiveSpec& obj,
                   double stale_cost_factor = 1.0);

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PathResult {
    std::vector<NodeIndex> nodes; // origin..dest
    std::vector<LinkIndex> links; // nodes.size()-1 entries
    double cost_min = 0.0;
};

struct RouteDecision {
    int vehicle_id = -1;
    NodeIndex at_intersection = -1;
    LinkIndex next_link = -1;
    std::vector<LinkIndex> full_path; // pre-trip only
    int decided_interval = -1;
};

// Deterministic Dijkstra over the link costs implied by one view. Equal-cost
// ties resolve to the lexicographically smallest node-id sequence, so paths
// are stable across runs and platforms.
class Router {
public:
    explicit Router(const RoadNetwork& net);

    // Single-source tree; entry d of `cost` / `first_link` / `parent_link`
    // describes the best path source -> d.
    struct Tree {
        NodeIndex source = -1;
        std::vector<double> cost_min;          // +inf when unreachable
        std::vector<LinkIndex> parent_link;    // -1 at source / unreachable
        std::vector<NodeIndex> parent_node;
    };

    Tree shortest_tree(const NetworkStateView& view, const ObjectiveSpec& obj,
                       NodeIndex source, double stale_cost_factor = 1.0) const;

    PathResult shortest_path(const NetworkStateView& view, const ObjectiveSpec& obj,
                             NodeIndex origin, NodeIndex dest,
                             double stale_cost_factor = 1.0) const;

    static PathResult extract_path(const Tree& tree, NodeIndex dest);

    // First hop of the cost-minimal path from the intersection under its
    // current view; equals the argmin over outgoing links of
    // link cost + downstream shortest-path cost.
    RouteDecision next_hop(const NetworkStateView& view, const ObjectiveSpec& obj,
                           NodeIndex intersection, NodeIndex dest,
                           double stale_cost_factor = 1.0) const;

    // Travel-time shortest path frozen at entry; no en-route updates.
    RouteDecision pretrip_route(const NetworkStateView& view_at_entry,
                                NodeIndex origin, NodeIndex dest) const;

    const RoadNetwork& network() const { return net_; }

private:
    const RoadNetwork& net_;
    // Rank of each node id in lexicographic id order, for tie-breaking.
    std::vector<int> lex_rank_;
};

} // namespace ecoroute
