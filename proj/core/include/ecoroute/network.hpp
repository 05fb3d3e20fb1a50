#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ecoroute {

using NodeIndex = int;
using LinkIndex = int;

struct Link {
    std::string id;       // "<from>-><to>"
    NodeIndex from_node = -1;
    NodeIndex to_node = -1;
    double length_m = 0.0;
    double speed_limit_kmh = 0.0;
    int lanes = 1;
    int section_count = 3;

    double speed_limit_ms() const { return speed_limit_kmh / 3.6; }
    double free_flow_time_s() const { return length_m / speed_limit_ms(); }
};

struct Intersection {
    std::string id;
    std::vector<LinkIndex> incoming;
    std::vector<LinkIndex> outgoing;
    double x_m = 0.0, y_m = 0.0;
    bool has_coords = false;
};

enum class Connectivity { None, Weak, Strong };

// Directed road graph. Immutable after load; safe to share read-only across
// concurrent scenario runs.
class RoadNetwork {
public:
    const std::vector<Intersection>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }
    const Intersection& node(NodeIndex i) const { return nodes_[i]; }
    const Link& link(LinkIndex i) const { return links_[i]; }

    NodeIndex node_index(const std::string& id) const;
    std::optional<NodeIndex> find_node(const std::string& id) const;
    std::optional<LinkIndex> find_link(NodeIndex from, NodeIndex to) const;

    NodeIndex add_node(const std::string& id);
    LinkIndex add_link(const std::string& from, const std::string& to, double length_m,
                       double speed_kmh, int lanes, int section_count);

    void set_node_coords(const std::string& id, double x_m, double y_m);
    bool has_all_coords() const;

    // Directed-path existence via breadth-first search.
    bool reachable(NodeIndex origin, NodeIndex dest) const;
    bool reachable(const std::string& origin, const std::string& dest) const;

    // Undirected hop distances from one node to all others (-1 when
    // disconnected); the substrate for gossip dissemination ages.
    std::vector<int> undirected_hops(NodeIndex source) const;

    // Throws ValidationError if the graph fails the requested connectivity.
    void validate(Connectivity required = Connectivity::Weak) const;

private:
    std::vector<Intersection> nodes_;
    std::vector<Link> links_;
    std::unordered_map<std::string, NodeIndex> node_index_;
    std::unordered_map<std::string, LinkIndex> link_index_;
};

// File format: from_node,to_node,length_m,speed_kmh,lanes,direction,section_count
// with direction in {oneway,twoway}; a twoway row expands into two directed
// links. section_count is optional (default 3).
RoadNetwork load_network(const std::string& path,
                         Connectivity required = Connectivity::Weak);

// Optional node coordinate file: node_id,x_m,y_m. Unknown ids are an error.
void load_node_coords(RoadNetwork& net, const std::string& path);

// Writes one row per directed link (direction=oneway); load(save(net))
// reproduces the graph field by field.
void save_network(const RoadNetwork& net, const std::string& path);
void save_node_coords(const RoadNetwork& net, const std::string& path);

} // namespace ecoroute
