#include "ecoroute/linkstate.hpp"

#include "ecoroute/csvio.hpp"

namespace ecoroute {

StateBus::StateBus(const RoadNetwork& net, DisseminationMode mode, int gossip_hops,
                   std::vector<LinkStateReport> initial_reports)
    : net_(net), mode_(mode), gossip_hops_(gossip_hops), initial_(std::move(initial_reports)) {
    if (initial_.size() != net.links().size())
        throw ValidationError("initial reports must cover every link");
    if (mode_ == DisseminationMode::HopGossip) {
        if (gossip_hops_ < 1)
            throw ValidationError("gossip hop count must be >= 1");
        link_hops_.resize(net.links().size());
        // Reports originate at the link's downstream intersection and travel
        // over the (undirected) intersection graph.
        std::vector<std::vector<int>> node_hops(net.nodes().size());
        for (std::size_t n = 0; n < net.nodes().size(); ++n)
            node_hops[n] = net.undirected_hops(static_cast<NodeIndex>(n));
        for (std::size_t l = 0; l < net.links().size(); ++l) {
            link_hops_[l].resize(net.nodes().size());
            NodeIndex src = net.link(static_cast<LinkIndex>(l)).to_node;
            for (std::size_t n = 0; n < net.nodes().size(); ++n)
                link_hops_[l][n] = node_hops[src][n];
        }
        node_views_.resize(net.nodes().size());
    }
    rebuild_views();
}

void StateBus::publish(int interval_index, std::vector<LinkStateReport> reports) {
    if (interval_index != current_interval_ + 1)
        throw ValidationError("reports must be published in interval order");
    if (reports.size() != net_.links().size())
        throw ValidationError("publish: one report per link required");
    for (std::size_t l = 0; l < reports.size(); ++l) {
        if (reports[l].link != static_cast<LinkIndex>(l))
            throw ValidationError("publish: report order must match link order");
        if (reports[l].interval_index != interval_index)
            throw ValidationError("publish: report interval mismatch");
    }
    history_.push_back(std::move(reports));
    current_interval_ = interval_index;
    rebuild_views();
}

void StateBus::rebuild_views() {
    if (mode_ == DisseminationMode::Idealized) {
        shared_view_.view_interval = current_interval_;
        if (current_interval_ >= 0) {
            shared_view_.reports = history_.back();
            shared_view_.age.assign(net_.links().size(), 0);
        } else {
            shared_view_.reports = initial_;
            shared_view_.age.assign(net_.links().size(), 0);
        }
        return;
    }
    for (std::size_t n = 0; n < node_views_.size(); ++n) {
        NetworkStateView& v = node_views_[n];
        v.view_interval = current_interval_;
        v.reports.resize(net_.links().size());
        v.age.assign(net_.links().size(), 0);
        for (std::size_t l = 0; l < net_.links().size(); ++l) {
            int d = link_hops_[l][n];
            // Disconnected in the undirected sense cannot happen on a
            // validated network; treat defensively as never-delivered.
            int lag = d <= 0 ? 0 : (d + gossip_hops_ - 1) / gossip_hops_;
            int src_interval = current_interval_ - lag;
            if (src_interval >= 0) {
                v.reports[l] = history_[src_interval][l];
                v.age[l] = lag;
            } else {
                v.reports[l] = initial_[l];
                v.age[l] = current_interval_ - (-1); // initial report age
            }
        }
    }
}

const NetworkStateView& StateBus::view(NodeIndex node) const {
    if (mode_ == DisseminationMode::Idealized) return shared_view_;
    return node_views_[node];
}

int StateBus::report_age(NodeIndex node, LinkIndex link) const {
    return view(node).age[link];
}

void V2iRegistry::announce(int vehicle_id, bool is_cav, NodeIndex at_intersection,
                           NodeIndex destination) {
    if (!is_cav)
        throw ProtocolError("HDV cannot announce a destination (no communication ability)");
    registrations_[vehicle_id] = Registration{at_intersection, destination};
}

std::optional<V2iRegistry::Registration> V2iRegistry::latest(int vehicle_id) const {
    auto it = registrations_.find(vehicle_id);
    if (it == registrations_.end()) return std::nullopt;
    return it->second;
}

void V2iRegistry::forget(int vehicle_id) {
    registrations_.erase(vehicle_id);
}

} // namespace ecoroute
