#include "ecoroute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace ecoroute {

ObjectiveSpec ObjectiveSpec::travel_time() {
    ObjectiveSpec o;
    o.use_travel_time = true;
    o.name = "TT";
    return o;
}

ObjectiveSpec ObjectiveSpec::travel_time_idling() {
    ObjectiveSpec o;
    o.use_travel_time = true;
    o.use_idling = true;
    o.name = "TT*";
    return o;
}

ObjectiveSpec ObjectiveSpec::ghg_only() {
    ObjectiveSpec o;
    o.use_travel_time = false;
    o.use_ghg = true;
    o.name = "R1";
    return o;
}

ObjectiveSpec ObjectiveSpec::multi_objective() {
    ObjectiveSpec o;
    o.use_travel_time = true;
    o.use_idling = true;
    o.use_ghg = true;
    o.name = "R2";
    return o;
}

ObjectiveSpec ObjectiveSpec::from_name(const std::string& name) {
    if (name == "TT") return travel_time();
    if (name == "TT*") return travel_time_idling();
    if (name == "R1") return ghg_only();
    if (name == "R2") return multi_objective();
    throw RoutingError("unknown objective: " + name);
}

void ObjectiveSpec::validate() const {
    if (!use_travel_time && !use_idling && !use_ghg)
        throw RoutingError("objective must enable at least one cost term");
}

LinkCost link_cost(const LinkStateReport& report, const ObjectiveSpec& obj,
                   double stale_cost_factor) {
    LinkCost c;
    c.link = report.link;
    if (obj.use_travel_time)
        c.tt_min = obj.weight_time * report.travel_time_s / 60.0;
    if (obj.use_idling)
        c.idle_min = obj.weight_idling * report.idling_penalty_s / 60.0;
    if (obj.use_ghg) {
        double grams = report.ghg_rate_g_per_veh_s * report.travel_time_s;
        c.ghg_min = obj.weight_co2_min_per_g * grams;
    }
    c.cost_min = c.tt_min + c.idle_min + c.ghg_min;
    if (report.stale && stale_cost_factor != 1.0) c.cost_min *= stale_cost_factor;
    if (c.cost_min < kMinLinkCostMin) c.cost_min = kMinLinkCostMin;
    return c;
}

Router::Router(const RoadNetwork& net) : net_(net) {
    std::vector<NodeIndex> order(net.nodes().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<NodeIndex>(i);
    std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
        return net.node(a).id < net.node(b).id;
    });
    lex_rank_.resize(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) lex_rank_[order[r]] = static_cast<int>(r);
}

namespace {

struct QueueEntry {
    double cost;
    std::vector<int> rank_path; // lexicographic ranks along the path
    NodeIndex node;
    NodeIndex parent_node;
    LinkIndex parent_link;
};

struct EntryWorse {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.cost != b.cost) return a.cost > b.cost;
        return a.rank_path > b.rank_path;
    }
};

} // namespace

Router::Tree Router::shortest_tree(const NetworkStateView& view, const ObjectiveSpec& obj,
                                   NodeIndex source, double stale_cost_factor) const {
    obj.validate();
    const std::size_t n = net_.nodes().size();
    if (source < 0 || source >= static_cast<NodeIndex>(n))
        throw RoutingError("shortest_tree: source out of range");
    if (view.reports.size() != net_.links().size())
        throw RoutingError("shortest_tree: view does not cover the network");

    std::vector<double> edge_cost(net_.links().size());
    for (std::size_t l = 0; l < edge_cost.size(); ++l)
        edge_cost[l] = link_cost(view.reports[l], obj, stale_cost_factor).cost_min;

    Tree tree;
    tree.source = source;
    tree.cost_min.assign(n, std::numeric_limits<double>::infinity());
    tree.parent_link.assign(n, -1);
    tree.parent_node.assign(n, -1);
    std::vector<char> settled(n, 0);

    // Priority order (cost, node-id sequence) is monotone under appending an
    // edge, so the first pop settles each node with its lexicographically
    // smallest minimal-cost path.
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryWorse> pq;
    pq.push(QueueEntry{0.0, {lex_rank_[source]}, source, -1, -1});

    while (!pq.empty()) {
        QueueEntry cur = pq.top();
        pq.pop();
        if (settled[cur.node]) continue;
        settled[cur.node] = 1;
        tree.cost_min[cur.node] = cur.cost;
        tree.parent_link[cur.node] = cur.parent_link;
        tree.parent_node[cur.node] = cur.parent_node;

        for (LinkIndex li : net_.node(cur.node).outgoing) {
            NodeIndex to = net_.link(li).to_node;
            if (settled[to]) continue;
            QueueEntry next;
            next.cost = cur.cost + edge_cost[li];
            next.rank_path = cur.rank_path;
            next.rank_path.push_back(lex_rank_[to]);
            next.node = to;
            next.parent_node = cur.node;
            next.parent_link = li;
            pq.push(std::move(next));
        }
    }
    return tree;
}

PathResult Router::extract_path(const Tree& tree, NodeIndex dest) {
    if (dest < 0 || dest >= static_cast<NodeIndex>(tree.cost_min.size()))
        throw RoutingError("extract_path: destination out of range");
    if (std::isinf(tree.cost_min[dest]))
        throw RoutingError("destination unreachable from source");
    PathResult out;
    out.cost_min = tree.cost_min[dest];
    NodeIndex cur = dest;
    while (cur != tree.source) {
        out.nodes.push_back(cur);
        out.links.push_back(tree.parent_link[cur]);
        cur = tree.parent_node[cur];
    }
    out.nodes.push_back(tree.source);
    std::reverse(out.nodes.begin(), out.nodes.end());
    std::reverse(out.links.begin(), out.links.end());
    return out;
}

PathResult Router::shortest_path(const NetworkStateView& view, const ObjectiveSpec& obj,
                                 NodeIndex origin, NodeIndex dest,
                                 double stale_cost_factor) const {
    return extract_path(shortest_tree(view, obj, origin, stale_cost_factor), dest);
}

RouteDecision Router::next_hop(const NetworkStateView& view, const ObjectiveSpec& obj,
                               NodeIndex intersection, NodeIndex dest,
                               double stale_cost_factor) const {
    if (intersection == dest)
        throw RoutingError("next_hop: already at destination");
    PathResult path = shortest_path(view, obj, intersection, dest, stale_cost_factor);
    RouteDecision d;
    d.at_intersection = intersection;
    d.next_link = path.links.front();
    d.decided_interval = view.view_interval;
    return d;
}

RouteDecision Router::pretrip_route(const NetworkStateView& view_at_entry,
                                    NodeIndex origin, NodeIndex dest) const {
    PathResult path = shortest_path(view_at_entry, ObjectiveSpec::travel_time(), origin, dest);
    RouteDecision d;
    d.at_intersection = origin;
    d.next_link = path.links.front();
    d.full_path = path.links;
    d.decided_interval = view_at_entry.view_interval;
    return d;
}

} // namespace ecoroute
