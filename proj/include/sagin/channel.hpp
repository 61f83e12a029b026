#pragma once

#include <array>

#include "sagin/geometry.hpp"
#include "sagin/rng.hpp"

namespace sagin {

// Index order is load-bearing: it fixes the bit order of action masks and the
// layout of state/observation vectors.
enum class LinkKind : int { Bs = 0, Uav = 1, Hap = 2, Leo = 3 };

inline constexpr int kLinkCount = 4;
inline constexpr std::array<LinkKind, kLinkCount> kAllLinks{
    LinkKind::Bs, LinkKind::Uav, LinkKind::Hap, LinkKind::Leo};

const char* link_name(LinkKind kind);

struct LinkParams {
  double bandwidth_hz = 0.0;
  double carrier_frequency_hz = 0.0;
  double tx_power_dbm = 0.0;
  double power_cost_w = 0.0;
  double antenna_gain_tx_dbi = 0.0;
  double antenna_gain_rx_dbi = 0.0;
  double noise_figure_db = 7.0;
};

using LinkParamsTable = std::array<LinkParams, kLinkCount>;
using LoadVector = std::array<double, kLinkCount>;
using LosVector = std::array<bool, kLinkCount>;

// Per-platform radio parameters. Bandwidth, carrier, transmit power and power
// cost follow the simulation parameter table; antenna gains are representative
// per platform class (a 550 km Ka-band hop needs tens of dB of combined gain
// to close at all).
LinkParamsTable default_link_params();

struct LinkMetrics {
  bool los = false;
  double path_loss_db = 0.0;
  double snr_db = 0.0;
  double capacity_bps = 0.0;
  double latency_s = 0.0;
  double power_w = 0.0;
  double load = 0.0;
};

using LinkMetricsTable = std::array<LinkMetrics, kLinkCount>;

// LOS probability per link kind:
//  - BS: urban-macro two-term form in the 2D ground distance.
//  - UAV/HAP: elevation-angle sigmoid with urban constants a=9.61, b=0.16.
//  - LEO: hard 10-degree mask angle (0 below the horizon).
double los_probability(LinkKind kind, const WorldState& world);

// Free-space path loss, dB. Requires distance > 0 (throws otherwise).
double fspl_db(double distance_m, double frequency_hz);

// FSPL plus a fixed excess: 1 dB when LOS, 20 dB otherwise.
double path_loss_db(double distance_m, double frequency_hz, bool los);

// Thermal noise floor in dBm: -174 + 10 log10(BW) + NF.
double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

double snr_db(const LinkParams& params, double path_loss_db);

// Shannon rate scaled by the unused load fraction, bits/s.
double link_capacity_bps(double bandwidth_hz, double snr_db, double load);

// Propagation delay plus single-packet service time. A zero rate yields the
// caller-supplied sentinel instead of a division by zero.
double link_latency_s(double distance_m, double rate_bps, double packet_bits,
                      double zero_rate_latency_s);

// Background platform load: starts uniform in [0, 0.5] and performs a
// clamped random walk on [0, 0.8] with +-0.05 increments.
double initial_load(Rng& rng);
double advance_load(double load, Rng& rng);

struct ChannelConfig {
  double packet_bits = 12000.0;       // one 1500-byte packet
  double zero_rate_latency_s = 0.1;   // sentinel when a link carries nothing
};

// Full metric chain for all four links with a Bernoulli LOS draw per link.
// Consumes exactly one draw per link regardless of outcome.
LinkMetricsTable evaluate_links(const WorldState& world, const LinkParamsTable& params,
                                const LoadVector& loads, Rng& rng,
                                const ChannelConfig& cfg);

// Same chain with LOS states pinned by the caller (frozen snapshots, tests).
LinkMetricsTable evaluate_links_with_los(const WorldState& world,
                                         const LinkParamsTable& params,
                                         const LoadVector& loads, const LosVector& los,
                                         const ChannelConfig& cfg);

// Slant range from the UE to the given platform.
double link_distance_m(LinkKind kind, const WorldState& world);

}  // namespace sagin
