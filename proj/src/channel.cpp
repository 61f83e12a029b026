#include "sagin/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sagin {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kFsplConstDb = 147.55;   // 20 log10(4 pi / c)
constexpr double kExcessLosDb = 1.0;
constexpr double kExcessNlosDb = 20.0;
constexpr double kSigmoidA = 9.61;        // urban environment constants
constexpr double kSigmoidB = 0.16;
constexpr double kLeoMaskDeg = 10.0;
constexpr double kLoadCap = 0.8;
constexpr double kLoadStep = 0.05;
}  // namespace

const char* link_name(LinkKind kind) {
  switch (kind) {
    case LinkKind::Bs: return "bs";
    case LinkKind::Uav: return "uav";
    case LinkKind::Hap: return "hap";
    case LinkKind::Leo: return "leo";
  }
  return "?";
}

LinkParamsTable default_link_params() {
  LinkParamsTable table{};
  table[0] = LinkParams{100e6, 28e9, 30.0, 2.0, 10.0, 0.0, 7.0};   // BS
  table[1] = LinkParams{200e6, 26e9, 27.0, 3.0, 10.0, 0.0, 7.0};   // UAV
  table[2] = LinkParams{200e6, 26e9, 35.0, 4.0, 25.0, 10.0, 7.0};  // HAP
  table[3] = LinkParams{250e6, 27e9, 40.0, 5.0, 38.0, 33.0, 7.0};  // LEO
  return table;
}

double los_probability(LinkKind kind, const WorldState& world) {
  switch (kind) {
    case LinkKind::Bs: {
      const double dx = world.bs.x - world.ue.x;
      const double dy = world.bs.y - world.ue.y;
      const double d2d = std::sqrt(dx * dx + dy * dy);
      if (d2d <= 18.0) return 1.0;
      return 18.0 / d2d + std::exp(-d2d / 63.0) * (1.0 - 18.0 / d2d);
    }
    case LinkKind::Uav:
    case LinkKind::Hap: {
      const Position3D node = (kind == LinkKind::Uav) ? world.uav : world.hap;
      const double theta = elevation_angle_deg(world.ue, node);
      return 1.0 / (1.0 + kSigmoidA * std::exp(-kSigmoidB * (theta - kSigmoidA)));
    }
    case LinkKind::Leo: {
      const Position3D leo = world.leo_position();
      if (leo.z <= world.ue.z) return 0.0;  // below the horizon
      return elevation_angle_deg(world.ue, leo) >= kLeoMaskDeg ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

double fspl_db(double distance_m, double frequency_hz) {
  if (!(distance_m > 0.0)) {
    throw std::invalid_argument("fspl_db: distance must be positive");
  }
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) - kFsplConstDb;
}

double path_loss_db(double distance_m, double frequency_hz, bool los) {
  return fspl_db(distance_m, frequency_hz) + (los ? kExcessLosDb : kExcessNlosDb);
}

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double snr_db(const LinkParams& params, double path_loss_db) {
  return params.tx_power_dbm + params.antenna_gain_tx_dbi + params.antenna_gain_rx_dbi -
         path_loss_db - noise_floor_dbm(params.bandwidth_hz, params.noise_figure_db);
}

double link_capacity_bps(double bandwidth_hz, double snr_db, double load) {
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  return (1.0 - load) * bandwidth_hz * std::log2(1.0 + snr_linear);
}

double link_latency_s(double distance_m, double rate_bps, double packet_bits,
                      double zero_rate_latency_s) {
  if (rate_bps <= 0.0) return zero_rate_latency_s;
  return distance_m / kSpeedOfLight + packet_bits / rate_bps;
}

double initial_load(Rng& rng) { return rng.uniform(0.0, 0.5); }

double advance_load(double load, Rng& rng) {
  return std::clamp(load + rng.uniform(-kLoadStep, kLoadStep), 0.0, kLoadCap);
}

double link_distance_m(LinkKind kind, const WorldState& world) {
  switch (kind) {
    case LinkKind::Bs: return slant_distance(world.ue, world.bs);
    case LinkKind::Uav: return slant_distance(world.ue, world.uav);
    case LinkKind::Hap: return slant_distance(world.ue, world.hap);
    case LinkKind::Leo: return slant_distance(world.ue, world.leo_position());
  }
  return 0.0;
}

LinkMetricsTable evaluate_links_with_los(const WorldState& world,
                                         const LinkParamsTable& params,
                                         const LoadVector& loads, const LosVector& los,
                                         const ChannelConfig& cfg) {
  LinkMetricsTable metrics{};
  for (int i = 0; i < kLinkCount; ++i) {
    const LinkKind kind = kAllLinks[i];
    const LinkParams& p = params[i];
    LinkMetrics& m = metrics[i];
    const double distance = link_distance_m(kind, world);
    m.los = los[i];
    m.load = loads[i];
    m.path_loss_db = path_loss_db(distance, p.carrier_frequency_hz, m.los);
    m.snr_db = snr_db(p, m.path_loss_db);
    m.capacity_bps = link_capacity_bps(p.bandwidth_hz, m.snr_db, m.load);
    m.latency_s = link_latency_s(distance, m.capacity_bps, cfg.packet_bits,
                                 cfg.zero_rate_latency_s);
    m.power_w = p.power_cost_w;
  }
  return metrics;
}

LinkMetricsTable evaluate_links(const WorldState& world, const LinkParamsTable& params,
                                const LoadVector& loads, Rng& rng,
                                const ChannelConfig& cfg) {
  LosVector los{};
  for (int i = 0; i < kLinkCount; ++i) {
    los[i] = rng.bernoulli(los_probability(kAllLinks[i], world));
  }
  return evaluate_links_with_los(world, params, loads, los, cfg);
}

}  // namespace sagin
