#include "sagin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sagin {

namespace {
constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;
}

double slant_distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double elevation_angle_deg(const Position3D& ue, const Position3D& node) {
  if (!(node.z > ue.z)) {
    throw std::invalid_argument("elevation_angle_deg: node must be above the observer");
  }
  const double dx = node.x - ue.x;
  const double dy = node.y - ue.y;
  const double horizontal = std::sqrt(dx * dx + dy * dy);
  const double angle = std::atan2(node.z - ue.z, horizontal) * kDegPerRad;
  return std::clamp(angle, 0.0, 90.0);
}

Position3D WorldState::leo_position() const {
  const double rad = leo_arc_deg / kDegPerRad;
  return Position3D{leo_orbit_radius_m * std::cos(rad), 0.0,
                    leo_orbit_radius_m * std::sin(rad)};
}

Position3D random_waypoint(const MobilityConfig& cfg, Rng& rng) {
  // sqrt of the radial draw keeps the distribution uniform over the disc area
  const double r = cfg.cell_radius_m * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double z = rng.uniform(cfg.uav_altitude_min_m, cfg.uav_altitude_max_m);
  return Position3D{r * std::cos(phi), r * std::sin(phi), z};
}

WorldState make_initial_world(const MobilityConfig& cfg, Rng& rng) {
  WorldState world;
  world.uav = random_waypoint(cfg, rng);
  world.uav_waypoint = random_waypoint(cfg, rng);
  return world;
}

WorldState advance_mobility(const WorldState& world, const MobilityConfig& cfg, Rng& rng) {
  WorldState next = world;
  const double step_len = cfg.uav_speed_mps * cfg.step_duration_s;
  const double remaining = slant_distance(next.uav, next.uav_waypoint);
  if (remaining <= step_len) {
    next.uav = next.uav_waypoint;
    next.uav_waypoint = random_waypoint(cfg, rng);
  } else {
    const double scale = step_len / remaining;
    next.uav.x += (next.uav_waypoint.x - next.uav.x) * scale;
    next.uav.y += (next.uav_waypoint.y - next.uav.y) * scale;
    next.uav.z += (next.uav_waypoint.z - next.uav.z) * scale;
  }
  next.leo_arc_deg = std::fmod(next.leo_arc_deg + cfg.leo_arc_step_deg, 360.0);
  ++next.step_index;
  return next;
}

}  // namespace sagin
