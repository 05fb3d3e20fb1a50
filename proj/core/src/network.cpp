#include "ecoroute/network.hpp"

#include "ecoroute/csvio.hpp"

#include <algorithm>
#include <deque>

namespace ecoroute {

NodeIndex RoadNetwork::node_index(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end())
        throw ValidationError("unknown node id: " + id);
    return it->second;
}

std::optional<NodeIndex> RoadNetwork::find_node(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<LinkIndex> RoadNetwork::find_link(NodeIndex from, NodeIndex to) const {
    for (LinkIndex li : nodes_[from].outgoing)
        if (links_[li].to_node == to) return li;
    return std::nullopt;
}

NodeIndex RoadNetwork::add_node(const std::string& id) {
    auto it = node_index_.find(id);
    if (it != node_index_.end()) return it->second;
    NodeIndex idx = static_cast<NodeIndex>(nodes_.size());
    Intersection n;
    n.id = id;
    nodes_.push_back(std::move(n));
    node_index_[id] = idx;
    return idx;
}

LinkIndex RoadNetwork::add_link(const std::string& from, const std::string& to,
                                double length_m, double speed_kmh, int lanes,
                                int section_count) {
    if (from == to)
        throw ValidationError("self-loop link not allowed: " + from);
    if (length_m <= 0.0)
        throw ValidationError("link " + from + "->" + to + ": length must be > 0");
    if (speed_kmh <= 0.0)
        throw ValidationError("link " + from + "->" + to + ": speed must be > 0");
    if (lanes < 1)
        throw ValidationError("link " + from + "->" + to + ": lanes must be >= 1");
    if (section_count < 1)
        throw ValidationError("link " + from + "->" + to + ": section_count must be >= 1");

    NodeIndex f = add_node(from);
    NodeIndex t = add_node(to);
    Link l;
    l.id = from + "->" + to;
    if (link_index_.count(l.id))
        throw ValidationError("duplicate directed link: " + l.id);
    l.from_node = f;
    l.to_node = t;
    l.length_m = length_m;
    l.speed_limit_kmh = speed_kmh;
    l.lanes = lanes;
    l.section_count = section_count;
    LinkIndex idx = static_cast<LinkIndex>(links_.size());
    links_.push_back(std::move(l));
    link_index_[links_[idx].id] = idx;
    nodes_[f].outgoing.push_back(idx);
    nodes_[t].incoming.push_back(idx);
    return idx;
}

void RoadNetwork::set_node_coords(const std::string& id, double x_m, double y_m) {
    NodeIndex i = node_index(id);
    nodes_[i].x_m = x_m;
    nodes_[i].y_m = y_m;
    nodes_[i].has_coords = true;
}

bool RoadNetwork::has_all_coords() const {
    return !nodes_.empty() &&
           std::all_of(nodes_.begin(), nodes_.end(),
                       [](const Intersection& n) { return n.has_coords; });
}

bool RoadNetwork::reachable(NodeIndex origin, NodeIndex dest) const {
    if (origin < 0 || origin >= static_cast<NodeIndex>(nodes_.size()) ||
        dest < 0 || dest >= static_cast<NodeIndex>(nodes_.size()))
        throw ValidationError("reachable: node index out of range");
    if (origin == dest) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<NodeIndex> frontier{origin};
    seen[origin] = 1;
    while (!frontier.empty()) {
        NodeIndex u = frontier.front();
        frontier.pop_front();
        for (LinkIndex li : nodes_[u].outgoing) {
            NodeIndex v = links_[li].to_node;
            if (v == dest) return true;
            if (!seen[v]) {
                seen[v] = 1;
                frontier.push_back(v);
            }
        }
    }
    return false;
}

bool RoadNetwork::reachable(const std::string& origin, const std::string& dest) const {
    return reachable(node_index(origin), node_index(dest));
}

std::vector<int> RoadNetwork::undirected_hops(NodeIndex source) const {
    std::vector<int> dist(nodes_.size(), -1);
    dist[source] = 0;
    std::deque<NodeIndex> frontier{source};
    while (!frontier.empty()) {
        NodeIndex u = frontier.front();
        frontier.pop_front();
        auto visit = [&](NodeIndex v) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push_back(v);
            }
        };
        for (LinkIndex li : nodes_[u].outgoing) visit(links_[li].to_node);
        for (LinkIndex li : nodes_[u].incoming) visit(links_[li].from_node);
    }
    return dist;
}

void RoadNetwork::validate(Connectivity required) const {
    if (nodes_.empty()) throw ValidationError("network has no nodes");
    if (links_.empty()) throw ValidationError("network has no links");
    if (required == Connectivity::None) return;

    std::vector<int> hops = undirected_hops(0);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (hops[i] < 0)
            throw ValidationError("network is not weakly connected (node " +
                                  nodes_[i].id + " is isolated from " + nodes_[0].id + ")");

    if (required == Connectivity::Strong) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!reachable(0, static_cast<NodeIndex>(i)) ||
                !reachable(static_cast<NodeIndex>(i), 0))
                throw ValidationError("network is not strongly connected (node " +
                                      nodes_[i].id + ")");
        }
    }
}

RoadNetwork load_network(const std::string& path, Connectivity required) {
    CsvReader reader(path);
    RoadNetwork net;
    std::vector<std::string> f;
    while (reader.next_row(f)) {
        if (f.size() < 6) reader.fail("expected at least 6 fields (from,to,length_m,speed_kmh,lanes,direction)");
        const std::string& from = f[0];
        const std::string& to = f[1];
        double length = reader.field_double(f, 2);
        double speed = reader.field_double(f, 3);
        int lanes = static_cast<int>(reader.field_int(f, 4));
        std::string direction = f[5];
        int sections = 3;
        if (f.size() >= 7 && !f[6].empty())
            sections = static_cast<int>(reader.field_int(f, 6));
        try {
            if (direction == "oneway") {
                net.add_link(from, to, length, speed, lanes, sections);
            } else if (direction == "twoway") {
                net.add_link(from, to, length, speed, lanes, sections);
                net.add_link(to, from, length, speed, lanes, sections);
            } else {
                reader.fail("direction must be 'oneway' or 'twoway', got '" + direction + "'");
            }
        } catch (const ValidationError& e) {
            reader.fail(e.what());
        }
    }
    net.validate(required);
    return net;
}

void load_node_coords(RoadNetwork& net, const std::string& path) {
    CsvReader reader(path);
    std::vector<std::string> f;
    while (reader.next_row(f)) {
        if (f.size() < 3) reader.fail("expected node_id,x_m,y_m");
        if (!net.find_node(f[0]))
            reader.fail("node file references unknown node: " + f[0]);
        net.set_node_coords(f[0], reader.field_double(f, 1), reader.field_double(f, 2));
    }
}

void save_network(const RoadNetwork& net, const std::string& path) {
    std::string out = "from_node,to_node,length_m,speed_kmh,lanes,direction,section_count\n";
    for (const Link& l : net.links()) {
        out += join_row({net.node(l.from_node).id, net.node(l.to_node).id,
                         format_double(l.length_m), format_double(l.speed_limit_kmh),
                         std::to_string(l.lanes), "oneway", std::to_string(l.section_count)});
    }
    write_file(path, out);
}

void save_node_coords(const RoadNetwork& net, const std::string& path) {
    std::string out = "node_id,x_m,y_m\n";
    for (const Intersection& n : net.nodes())
        out += join_row({n.id, format_double(n.x_m), format_double(n.y_m)});
    write_file(path, out);
}

} // namespace ecoroute
