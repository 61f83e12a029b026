#pragma once

#include "sagin/rng.hpp"

namespace sagin {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // altitude above the ground plane, meters
};

// Euclidean distance between two points, meters.
double slant_distance(const Position3D& a, const Position3D& b);

// Elevation of `node` as seen from `ue`, degrees clamped to [0, 90].
// Throws std::invalid_argument if the node is not above the observer.
double elevation_angle_deg(const Position3D& ue, const Position3D& node);

struct MobilityConfig {
  double uav_speed_mps = 15.0;      // random-waypoint cruise speed
  double leo_arc_step_deg = 4.0;    // arc swept per time step
  double cell_radius_m = 500.0;
  double step_duration_s = 1.0;
  double uav_altitude_min_m = 120.0;
  double uav_altitude_max_m = 250.0;
};

// Snapshot of all platform positions at one time step. The BS, HAP and UE are
// static; the UAV flies random waypoints inside the cell cylinder; the LEO
// sweeps a circular arc of radius `leo_orbit_radius_m` in a vertical plane
// through the cell center, so it rises above and sets below the horizon as
// the arc angle advances.
struct WorldState {
  Position3D ue{0.0, 0.0, 1.5};
  Position3D bs{200.0, 150.0, 25.0};
  Position3D uav{0.0, 0.0, 185.0};
  Position3D uav_waypoint{0.0, 0.0, 185.0};
  Position3D hap{0.0, 0.0, 20000.0};
  double leo_arc_deg = 0.0;
  double leo_orbit_radius_m = 550000.0;
  long step_index = 0;

  Position3D leo_position() const;
};

// Uniform waypoint in the cell disc (area-uniform) times the altitude band.
Position3D random_waypoint(const MobilityConfig& cfg, Rng& rng);

// Fresh world with the UAV placed at a random waypoint.
WorldState make_initial_world(const MobilityConfig& cfg, Rng& rng);

// One mobility step: the UAV moves toward its waypoint (drawing a new one
// when it arrives within a single step length), the LEO arc advances modulo
// 360. Static nodes are untouched.
WorldState advance_mobility(const WorldState& world, const MobilityConfig& cfg, Rng& rng);

}  // namespace sagin
