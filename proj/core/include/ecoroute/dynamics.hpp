#pragma once

#include "ecoroute/emission.hpp"
#include "ecoroute/network.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <vector>

namespace ecoroute {

enum class VehicleKind { HDV, CAV };

std::string to_string(VehicleKind k);

struct IdmParams {
    double desired_speed_ms = 16.67;  // v0; set to the link speed limit at runtime
    double max_accel = 1.5;           // a_max, m/s^2
    double comfortable_decel = 2.0;   // b, m/s^2
    double reaction_headway_s = 1.6;  // T_h
    double min_gap_m = 4.0;           // s0
    double accel_exponent = 4.0;      // delta
};

// CAV perception/spacing parameters are half the HDV values; engine limits
// (a_max, b) are shared.
IdmParams default_hdv_idm();
IdmParams default_cav_idm();

struct VehicleSpec {
    int id = -1;
    VehicleKind kind = VehicleKind::HDV;
    VehicleClass vehicle_class = VehicleClass::PassengerCar;
    int model_year = 2015;
    IdmParams idm;
};

struct VehicleState {
    VehicleSpec spec;
    NodeIndex origin = -1;
    NodeIndex dest = -1;
    double scheduled_depart_s = 0.0;
    bool warmup = false;

    LinkIndex current_link = -1;
    int lane = -1;
    double position_m = 0.0;
    double speed_ms = 0.0;
    double accel_ms2 = 0.0; // effective acceleration over the last tick
    double odometer_m = 0.0;
    double moved_m_last_tick = 0.0;

    double entered_network_at = -1.0;
    double entered_link_at = -1.0;
    std::optional<int> arrived_at_stopline_at; // service request (FIFO order)
    std::optional<int> wait_started_at;        // first second actually held
    std::optional<int> granted_at;
    bool queued = false;

    LinkIndex next_link = -1;            // decided at stopline arrival
    bool route_decided = false;
    std::vector<LinkIndex> fixed_path;   // HDV pre-trip route
    std::size_t path_pos = 0;
};

struct IdmResult {
    double accel = 0.0;
    bool emergency = false; // non-positive gap forced an emergency stop
};

// Car-following acceleration. Pass no leader (nullopt gap) for a free road.
IdmResult idm_accel(double speed_ms, std::optional<double> leader_gap_m,
                    double leader_speed_ms, const IdmParams& p,
                    double emergency_decel = 6.0);

struct DynamicsConfig {
    IdmParams hdv = default_hdv_idm();
    IdmParams cav = default_cav_idm();
    double vehicle_length_m = 5.0;
    double emergency_decel = 6.0;   // lower clamp on acceleration
    double service_rate = 1.0;      // crossings granted per second per intersection
    // Stopline queue-join distance: max(approach_zone_m, comfortable braking
    // distance plus 2 s of travel). Joining at braking distance lets an
    // uncontended grant arrive before the approach costs any speed.
    double approach_zone_m = 30.0;
    double gap_floor_m = 0.1;       // hard minimum bumper-to-bumper gap
};

struct IdlingSample {
    int vehicle_id;
    LinkIndex link;    // incoming link served
    int granted_at;
    int waited_s;      // granted_at - arrived_at_stopline_at, >= 0
};

struct ExitEvent {
    int vehicle_id;
    double at_time; // fractional: stopline crossing moment within the tick
};

struct TickEvents {
    std::vector<IdlingSample> idling;
    std::vector<int> entered;      // vehicle ids placed on their first link
    std::vector<ExitEvent> exited; // vehicles that reached their destination
    bool any_activity = false;     // movement, grant, entry or exit happened
};

// Single-run deterministic tick loop: FIFO intersection service, transfers,
// demand injection, then synchronous IDM movement. All iteration is in index
// order; no step depends on container hash order.
class World {
public:
    // Chooses the next link for a vehicle standing at (or entering from)
    // `at_node`. May mutate the vehicle (pre-trip routes are stored on it).
    using NextLinkChooser = std::function<LinkIndex(VehicleState&, NodeIndex at_node)>;

    World(const RoadNetwork& net, DynamicsConfig cfg, NextLinkChooser chooser);

    // Registers a vehicle for injection at its scheduled departure time.
    void schedule(const VehicleSpec& spec, NodeIndex origin, NodeIndex dest,
                  double depart_s, bool warmup);

    TickEvents tick();

    int time() const { return time_; }
    const std::vector<VehicleState>& vehicles() const { return vehicles_; }
    const std::vector<int>& active_vehicles() const { return active_; }

    int vehicles_scheduled() const { return static_cast<int>(vehicles_.size()); }
    int vehicles_injected() const { return injected_; }
    int vehicles_arrived() const { return arrived_; }
    int vehicles_in_network() const { return static_cast<int>(active_.size()); }
    bool pending_entries() const;
    bool finished() const;

    int link_vehicle_count(LinkIndex l) const { return link_count_[l]; }
    int jam_capacity(LinkIndex l) const { return jam_capacity_[l]; }
    double density_ratio(LinkIndex l) const;
    bool has_entry_space(LinkIndex l) const;

    const DynamicsConfig& config() const { return cfg_; }
    const RoadNetwork& network() const { return net_; }

private:
    struct PendingEntry {
        int vehicle_id;
        double depart_s;
    };

    const RoadNetwork& net_;
    DynamicsConfig cfg_;
    NextLinkChooser chooser_;
    int time_ = 0;
    std::vector<VehicleState> vehicles_;
    std::vector<int> active_;
    std::vector<std::vector<std::deque<int>>> pipes_; // [link][lane] front = stopline
    std::vector<std::vector<PendingEntry>> pending_;  // per origin node, depart order
    std::vector<std::size_t> pending_head_;
    std::vector<double> service_credit_;              // per intersection
    std::vector<int> link_count_;
    std::vector<int> jam_capacity_;
    int injected_ = 0;
    int arrived_ = 0;

    double stopline_zone(const VehicleState& v, const Link& link) const;
    void serve_intersections(TickEvents& ev);
    void apply_transfers(TickEvents& ev);
    void inject_pending(TickEvents& ev);
    void move_vehicles(TickEvents& ev);
    void detect_stopline_arrivals();
    int pick_entry_lane(LinkIndex l) const;
    void place_on_link(int vid, LinkIndex l, double speed);
    void remove_from_pipe(int vid);
    void assert_conservation() const;
};

} // namespace ecoroute
