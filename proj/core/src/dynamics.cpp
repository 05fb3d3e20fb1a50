#include "ecoroute/dynamics.hpp"

#include "ecoroute/csvio.hpp"

#include <algorithm>
#include <cmath>

namespace ecoroute {

namespace {
constexpr double kDt = 1.0;           // s, paper time step
constexpr double kTransferEps = 1e-9; // at-stopline position tolerance
} // namespace

std::string to_string(VehicleKind k) {
    return k == VehicleKind::HDV ? "HDV" : "CAV";
}

IdmParams default_hdv_idm() {
    return IdmParams{};
}

IdmParams default_cav_idm() {
    IdmParams p;
    p.reaction_headway_s = 0.8;
    p.min_gap_m = 2.0;
    return p;
}

IdmResult idm_accel(double speed_ms, std::optional<double> leader_gap_m,
                    double leader_speed_ms, const IdmParams& p, double emergency_decel) {
    IdmResult r;
    double free_term = 1.0 - std::pow(speed_ms / p.desired_speed_ms, p.accel_exponent);
    if (!leader_gap_m) {
        r.accel = p.max_accel * free_term;
    } else if (*leader_gap_m <= 0.0) {
        r.accel = -emergency_decel;
        r.emergency = true;
        return r;
    } else {
        double dv = speed_ms - leader_speed_ms;
        double s_star = p.min_gap_m + speed_ms * p.reaction_headway_s +
                        speed_ms * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
        if (s_star < p.min_gap_m) s_star = p.min_gap_m;
        double ratio = s_star / *leader_gap_m;
        r.accel = p.max_accel * (free_term - ratio * ratio);
    }
    if (r.accel < -emergency_decel) r.accel = -emergency_decel;
    return r;
}

World::World(const RoadNetwork& net, DynamicsConfig cfg, NextLinkChooser chooser)
    : net_(net), cfg_(std::move(cfg)), chooser_(std::move(chooser)) {
    pipes_.resize(net.links().size());
    link_count_.assign(net.links().size(), 0);
    jam_capacity_.resize(net.links().size());
    for (std::size_t l = 0; l < net.links().size(); ++l) {
        const Link& link = net.link(static_cast<LinkIndex>(l));
        pipes_[l].resize(link.lanes);
        double spacing = cfg_.hdv.min_gap_m + cfg_.vehicle_length_m;
        int per_lane = std::max(1, static_cast<int>(std::floor(link.length_m / spacing)));
        jam_capacity_[l] = per_lane * link.lanes;
    }
    pending_.resize(net.nodes().size());
    pending_head_.assign(net.nodes().size(), 0);
    service_credit_.assign(net.nodes().size(), 0.0);
}

void World::schedule(const VehicleSpec& spec, NodeIndex origin, NodeIndex dest,
                     double depart_s, bool warmup) {
    VehicleState v;
    v.spec = spec;
    v.spec.id = static_cast<int>(vehicles_.size());
    v.origin = origin;
    v.dest = dest;
    v.scheduled_depart_s = depart_s;
    v.warmup = warmup;
    pending_[origin].push_back(PendingEntry{v.spec.id, depart_s});
    vehicles_.push_back(std::move(v));
}

bool World::pending_entries() const {
    for (std::size_t n = 0; n < pending_.size(); ++n)
        if (pending_head_[n] < pending_[n].size()) return true;
    return false;
}

bool World::finished() const {
    return !pending_entries() && active_.empty();
}

double World::density_ratio(LinkIndex l) const {
    double r = static_cast<double>(link_count_[l]) / static_cast<double>(jam_capacity_[l]);
    return std::clamp(r, 0.0, 1.0);
}

bool World::has_entry_space(LinkIndex l) const {
    if (link_count_[l] >= jam_capacity_[l]) return false;
    for (const auto& pipe : pipes_[l]) {
        if (pipe.empty()) return true;
        const VehicleState& last = vehicles_[pipe.back()];
        if (last.position_m >= cfg_.vehicle_length_m + cfg_.gap_floor_m) return true;
    }
    return false;
}

int World::pick_entry_lane(LinkIndex l) const {
    int best = -1;
    std::size_t best_size = 0;
    for (std::size_t lane = 0; lane < pipes_[l].size(); ++lane) {
        const auto& pipe = pipes_[l][lane];
        bool fits = pipe.empty() ||
                    vehicles_[pipe.back()].position_m >= cfg_.vehicle_length_m + cfg_.gap_floor_m;
        if (!fits) continue;
        if (best < 0 || pipe.size() < best_size) {
            best = static_cast<int>(lane);
            best_size = pipe.size();
        }
    }
    return best;
}

void World::place_on_link(int vid, LinkIndex l, double speed) {
    VehicleState& v = vehicles_[vid];
    int lane = pick_entry_lane(l);
    if (lane < 0) throw std::logic_error("place_on_link: no lane has space");
    v.current_link = l;
    v.lane = lane;
    v.position_m = 0.0;
    v.speed_ms = speed;
    v.entered_link_at = time_;
    v.arrived_at_stopline_at.reset();
    v.wait_started_at.reset();
    v.granted_at.reset();
    v.queued = false;
    v.next_link = -1;
    v.route_decided = false;
    pipes_[l][lane].push_back(vid);
    ++link_count_[l];
}

void World::remove_from_pipe(int vid) {
    VehicleState& v = vehicles_[vid];
    auto& pipe = pipes_[v.current_link][v.lane];
    auto it = std::find(pipe.begin(), pipe.end(), vid);
    if (it == pipe.end()) throw std::logic_error("vehicle not in its pipe");
    pipe.erase(it);
    --link_count_[v.current_link];
}

double World::stopline_zone(const VehicleState& v, const Link& link) const {
    // Comfortable braking distance plus 2 s of travel. The stopline exerts no
    // influence beyond this; an uncontended grant therefore arrives before
    // the approach costs any speed.
    double braking = v.speed_ms * v.speed_ms / (2.0 * v.spec.idm.comfortable_decel) +
                     2.0 * v.speed_ms + 5.0;
    return std::min(std::max(cfg_.approach_zone_m, braking), link.length_m * 0.5);
}

void World::serve_intersections(TickEvents& ev) {
    // Candidates are pipe heads with a routing decision; the wait clock may
    // have started further back in the queue. Serve in global FIFO order
    // (arrival time, vehicle id) up to the service budget.
    std::vector<std::vector<int>> queued(net_.nodes().size());
    for (std::size_t l = 0; l < pipes_.size(); ++l) {
        for (const auto& pipe : pipes_[l]) {
            if (pipe.empty()) continue;
            const VehicleState& v = vehicles_[pipe.front()];
            if (v.queued && v.route_decided && !v.granted_at && v.arrived_at_stopline_at &&
                *v.arrived_at_stopline_at < time_) {
                queued[net_.link(v.current_link).to_node].push_back(pipe.front());
            }
        }
    }
    for (std::size_t n = 0; n < queued.size(); ++n) {
        service_credit_[n] = std::min(service_credit_[n] + cfg_.service_rate,
                                      std::max(1.0, cfg_.service_rate));
        if (queued[n].empty()) continue;
        std::sort(queued[n].begin(), queued[n].end(), [&](int a, int b) {
            int ta = *vehicles_[a].arrived_at_stopline_at;
            int tb = *vehicles_[b].arrived_at_stopline_at;
            if (ta != tb) return ta < tb;
            return a < b;
        });
        for (int vid : queued[n]) {
            if (service_credit_[n] < 1.0) break;
            VehicleState& v = vehicles_[vid];
            bool exits = net_.link(v.current_link).to_node == v.dest;
            // Spillback: no grant toward a receiving link without space.
            if (!exits && !has_entry_space(v.next_link)) continue;
            v.granted_at = time_;
            service_credit_[n] -= 1.0;
            int waited = v.wait_started_at ? time_ - *v.wait_started_at : 0;
            ev.idling.push_back(IdlingSample{vid, v.current_link, time_, waited});
            ev.any_activity = true;
        }
    }
}

void World::apply_transfers(TickEvents& ev) {
    // Snapshot: transfers this tick are decided on positions from last tick.
    // Exits never pass through here; they leave during movement.
    std::vector<int> ready;
    for (int vid : active_) {
        const VehicleState& v = vehicles_[vid];
        if (v.granted_at && v.next_link >= 0 &&
            v.position_m >= net_.link(v.current_link).length_m - kTransferEps)
            ready.push_back(vid);
    }
    for (int vid : ready) {
        VehicleState& v = vehicles_[vid];
        if (has_entry_space(v.next_link)) {
            remove_from_pipe(vid);
            LinkIndex next = v.next_link;
            double speed = v.speed_ms;
            place_on_link(vid, next, speed);
            if (!v.fixed_path.empty()) ++v.path_pos;
            ev.any_activity = true;
        } else {
            // Receiving link filled up after the grant: hold at the line.
            v.speed_ms = 0.0;
        }
    }
}

void World::inject_pending(TickEvents& ev) {
    for (std::size_t n = 0; n < pending_.size(); ++n) {
        while (pending_head_[n] < pending_[n].size()) {
            const PendingEntry& pe = pending_[n][pending_head_[n]];
            if (pe.depart_s > time_) break;
            VehicleState& v = vehicles_[pe.vehicle_id];
            LinkIndex first = chooser_(v, static_cast<NodeIndex>(n));
            if (first < 0) throw std::logic_error("entry chooser returned no link");
            if (!has_entry_space(first)) break; // strict FIFO per origin
            const Link& link = net_.link(first);
            double v0 = link.speed_limit_ms();
            double entry_speed = v0;
            const auto& pipe = pipes_[first][pick_entry_lane(first)];
            if (!pipe.empty()) {
                const VehicleState& last = vehicles_[pipe.back()];
                double gap = last.position_m - cfg_.vehicle_length_m;
                double safe = (gap - v.spec.idm.min_gap_m) / v.spec.idm.reaction_headway_s;
                entry_speed = std::clamp(safe, 0.0, v0);
            }
            place_on_link(pe.vehicle_id, first, entry_speed);
            v.entered_network_at = time_;
            active_.push_back(pe.vehicle_id);
            ++injected_;
            ++pending_head_[n];
            ev.entered.push_back(pe.vehicle_id);
            ev.any_activity = true;
        }
    }
}

void World::move_vehicles(TickEvents& ev) {
    std::vector<int> exits;
    for (std::size_t l = 0; l < pipes_.size(); ++l) {
        const Link& link = net_.link(static_cast<LinkIndex>(l));
        double v0 = link.speed_limit_ms();
        for (auto& pipe : pipes_[l]) {
            double leader_new_pos = 0.0;
            for (std::size_t i = 0; i < pipe.size(); ++i) {
                VehicleState& v = vehicles_[pipe[i]];
                IdmParams p = v.spec.idm;
                p.desired_speed_ms = v0;
                bool exiting = v.granted_at.has_value() && v.next_link < 0;

                IdmResult idm;
                bool hold_at_line = false;
                if (i == 0) {
                    if (v.granted_at) {
                        if (!exiting && v.position_m >= link.length_m - kTransferEps) {
                            // Granted but the transfer is blocked; stand still.
                            hold_at_line = true;
                        } else {
                            idm = idm_accel(v.speed_ms, std::nullopt, 0.0, p,
                                            cfg_.emergency_decel);
                        }
                    } else if (link.length_m - v.position_m <= stopline_zone(v, link)) {
                        // Stopline as a standing virtual leader: gap reaches
                        // s0 exactly at the line, so IDM stops on it.
                        double gap = link.length_m - v.position_m + p.min_gap_m;
                        idm = idm_accel(v.speed_ms, gap, 0.0, p, cfg_.emergency_decel);
                    } else {
                        idm = idm_accel(v.speed_ms, std::nullopt, 0.0, p, cfg_.emergency_decel);
                    }
                } else {
                    const VehicleState& lead = vehicles_[pipe[i - 1]];
                    double gap = lead.position_m - cfg_.vehicle_length_m - v.position_m;
                    idm = idm_accel(v.speed_ms, gap, lead.speed_ms, p, cfg_.emergency_decel);
                }

                double old_speed = v.speed_ms;
                double old_pos = v.position_m;
                double new_speed;
                double new_pos;
                if (hold_at_line) {
                    new_speed = 0.0;
                    new_pos = old_pos;
                } else {
                    new_speed = old_speed + idm.accel * kDt;
                    // Desired speed is a hard cap when approached from below;
                    // this keeps the 1 s Euler step from oscillating around
                    // v0 on slow links.
                    if (old_speed <= v0) new_speed = std::min(new_speed, v0);
                    new_speed = std::max(0.0, new_speed);
                    new_pos = old_pos + new_speed * kDt;
                    if (i == 0) {
                        if (exiting && new_pos >= link.length_m - kTransferEps) {
                            // Crossing the final stopline: leave mid-tick.
                            double frac = new_speed > 0.01
                                              ? (link.length_m - old_pos) / new_speed
                                              : 0.0;
                            ev.exited.push_back(
                                ExitEvent{v.spec.id,
                                          time_ + std::clamp(frac, 0.0, 1.0)});
                            exits.push_back(v.spec.id);
                            new_pos = link.length_m;
                        } else if (new_pos >= link.length_m) {
                            new_pos = link.length_m;
                            if (!v.granted_at) new_speed = 0.0;
                        }
                    } else {
                        double cap = leader_new_pos - cfg_.vehicle_length_m - cfg_.gap_floor_m;
                        if (new_pos > cap) {
                            new_pos = std::max(old_pos, cap);
                            new_speed = std::max(0.0, (new_pos - old_pos) / kDt);
                        }
                    }
                }
                double moved = new_pos - old_pos;
                v.accel_ms2 = (new_speed - old_speed) / kDt;
                v.speed_ms = new_speed;
                v.position_m = new_pos;
                v.odometer_m += moved;
                v.moved_m_last_tick = moved;
                if (moved > kTransferEps) ev.any_activity = true;
                leader_new_pos = new_pos;
            }
        }
    }
    if (!exits.empty()) {
        for (int vid : exits) {
            remove_from_pipe(vid);
            ++arrived_;
        }
        std::vector<int> still_active;
        still_active.reserve(active_.size());
        std::vector<char> gone(vehicles_.size(), 0);
        for (int vid : exits) gone[vid] = 1;
        for (int vid : active_)
            if (!gone[vid]) still_active.push_back(vid);
        active_.swap(still_active);
        ev.any_activity = true;
    }
}

void World::detect_stopline_arrivals() {
    for (std::size_t l = 0; l < pipes_.size(); ++l) {
        const Link& link = net_.link(static_cast<LinkIndex>(l));
        for (auto& pipe : pipes_[l]) {
            if (pipe.empty()) continue;

            // Head of the pipe: joins the service queue inside the approach
            // zone; the routing decision is made here, at arrival.
            {
                VehicleState& v = vehicles_[pipe.front()];
                bool in_zone = link.length_m - v.position_m <= stopline_zone(v, link);
                if (!v.granted_at && in_zone) {
                    if (!v.queued) {
                        v.queued = true;
                        v.arrived_at_stopline_at = time_;
                    }
                    if (!v.wait_started_at && v.speed_ms < 2.0) v.wait_started_at = time_;
                    if (!v.route_decided) {
                        NodeIndex node = link.to_node;
                        if (link.to_node == v.dest) {
                            v.next_link = -1; // leaves the network here
                        } else {
                            LinkIndex next = chooser_(v, node);
                            if (next < 0)
                                throw std::logic_error(
                                    "chooser returned no next link for vehicle " +
                                    std::to_string(v.spec.id));
                            v.next_link = next;
                        }
                        v.route_decided = true;
                    }
                }
            }

            // Followers: the idling clock starts when a vehicle comes to rest
            // behind an already-waiting leader, so the recorded penalty is
            // the full queue wait, not just the head-of-line second.
            for (std::size_t i = 1; i < pipe.size(); ++i) {
                VehicleState& lead = vehicles_[pipe[i - 1]];
                VehicleState& v = vehicles_[pipe[i]];
                if (v.queued) {
                    // Queue dissolved around it: stop the clock.
                    if (v.speed_ms > 2.0) {
                        v.queued = false;
                        v.arrived_at_stopline_at.reset();
                        v.wait_started_at.reset();
                    }
                    continue;
                }
                double gap = lead.position_m - v.position_m;
                if (lead.queued && v.speed_ms < 1.0 &&
                    gap < 2.0 * (cfg_.vehicle_length_m + v.spec.idm.min_gap_m)) {
                    v.queued = true;
                    v.arrived_at_stopline_at = time_;
                    v.wait_started_at = time_;
                }
            }
        }
    }
}

void World::assert_conservation() const {
    if (injected_ != static_cast<int>(active_.size()) + arrived_)
        throw std::logic_error("vehicle conservation violated at t=" + std::to_string(time_));
}

TickEvents World::tick() {
    TickEvents ev;
    serve_intersections(ev);
    apply_transfers(ev);
    inject_pending(ev);
    move_vehicles(ev);
    ++time_;
    detect_stopline_arrivals();
    assert_conservation();
    return ev;
}

} // namespace ecoroute
