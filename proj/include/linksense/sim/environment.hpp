// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace linksense::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Deployment and radio parameters. Defaults model two APs and two Rxs on
// the corners of a 5 m square inside an 8 m x 7 m room, 1 Tx antenna and
// 3 Rx antennas per device, 30 subcarriers over 20 MHz at 5.28 GHz, CSI
// sampled at 200 Hz for 4 s.
struct EnvironmentConfig {
  int num_aps = 2;
  int num_rxs = 2;
  int tx_antennas = 1;
  int rx_antennas = 3;
  std::vector<Vec2> ap_positions;  // empty -> default square layout
  std::vector<Vec2> rx_positions;
  double carrier_freq = 5.28e9;  // Hz
  double bandwidth = 20e6;       // Hz
  int num_subcarriers = 30;
  double sample_rate = 200.0;    // Hz
  double sample_duration = 4.0;  // s
  // Per-component std of the additive complex Gaussian noise, linear units
  // relative to a unit-amplitude line-of-sight path.
  double noise_floor = 2e-3;
  // A link is informative for a location when the human-path amplitude
  // exceeds relevance_threshold * noise_floor.
  double relevance_threshold = 3.0;
  // Human reflection amplitude scale: alpha = reflection_gain / (d1 * d2).
  double reflection_gain = 0.066;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct Link {
  int ap = 0;  // index into ap positions
  int rx = 0;
  Vec2 ap_pos;
  Vec2 rx_pos;
};

// Immutable after construction; safe to share across threads.
class Environment {
 public:
  static Environment build(const EnvironmentConfig& config);

  const EnvironmentConfig& config() const { return cfg_; }
  const std::vector<Link>& links() const { return links_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  int antenna_pairs() const { return cfg_.tx_antennas * cfg_.rx_antennas; }
  int time_samples() const { return time_samples_; }
  int num_locations() const { return static_cast<int>(locations_.size()); }

  // 1-based location index, 4x4 grid inside the deployment square.
  const Vec2& location(int index) const;
  const std::vector<Vec2>& locations() const { return locations_; }

  double wavelength() const { return 299792458.0 / cfg_.carrier_freq; }
  // Subcarrier center frequencies span the bandwidth around the carrier.
  double subcarrier_freq(int s) const {
    return cfg_.carrier_freq - cfg_.bandwidth / 2.0 +
           cfg_.bandwidth * (s + 0.5) / cfg_.num_subcarriers;
  }

  // Human reflection amplitude on a link for a body at `pos`:
  // reflection_gain / (d(ap, pos) * d(pos, rx)).
  double link_human_gain(int link, const Vec2& pos) const;

 private:
  EnvironmentConfig cfg_;
  std::vector<Link> links_;
  std::vector<Vec2> locations_;
  int time_samples_ = 0;
};

}  // namespace linksense::sim
