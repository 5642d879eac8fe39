// SPDX-License-Identifier: Apache-2.0
#include "linksense/sim/environment.hpp"

#include <cmath>

#include "linksense/common.hpp"

namespace linksense::sim {

namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

// Default deployment: devices on the corners of a 5 m square placed inside
// an 8 m x 7 m room, APs and Rxs alternating so that the four links are the
// four square edges (adjacent links perpendicular).
constexpr double kSquareX0 = 1.5, kSquareX1 = 6.5;
constexpr double kSquareY0 = 1.0, kSquareY1 = 6.0;

}  // namespace

void EnvironmentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("environment config: " + field + " " + why);
  };
  if (num_aps < 1) fail("num_aps", "must be >= 1");
  if (num_rxs < 1) fail("num_rxs", "must be >= 1");
  if (tx_antennas < 1) fail("tx_antennas", "must be >= 1");
  if (rx_antennas < 1) fail("rx_antennas", "must be >= 1");
  if (num_subcarriers < 1) fail("num_subcarriers", "must be >= 1");
  if (!(carrier_freq > 0) || !std::isfinite(carrier_freq))
    fail("carrier_freq", "must be positive and finite");
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
    fail("bandwidth", "must be positive and finite");
  if (!(sample_rate > 0)) fail("sample_rate", "must be positive");
  if (!(sample_duration > 0)) fail("sample_duration", "must be positive");
  const double t = sample_rate * sample_duration;
  const double t_round = std::round(t);
  if (std::abs(t - t_round) > 1e-6 || t_round < 2) {
    fail("sample_duration", "sample_rate * sample_duration must be an integer >= 2");
  }
  if (!(noise_floor > 0)) fail("noise_floor", "must be positive");
  if (!(relevance_threshold > 0)) fail("relevance_threshold", "must be positive");
  if (!(reflection_gain > 0)) fail("reflection_gain", "must be positive");
  if (!ap_positions.empty()) {
    if (static_cast<int>(ap_positions.size()) != num_aps)
      fail("ap_positions", "count does not match num_aps");
    for (const auto& p : ap_positions)
      if (!finite(p)) fail("ap_positions", "must be finite");
  }
  if (!rx_positions.empty()) {
    if (static_cast<int>(rx_positions.size()) != num_rxs)
      fail("rx_positions", "count does not match num_rxs");
    for (const auto& p : rx_positions)
      if (!finite(p)) fail("rx_positions", "must be finite");
  }
}

Environment Environment::build(const EnvironmentConfig& config) {
  config.validate();
  Environment env;
  env.cfg_ = config;
  env.time_samples_ =
      static_cast<int>(std::round(config.sample_rate * config.sample_duration));

  if (env.cfg_.ap_positions.empty()) {
    // Alternate AP/Rx around the square corners; extra devices spread along
    // the perimeter for non-default counts.
    std::vector<Vec2> ap, rx;
    const Vec2 corners[4] = {{kSquareX0, kSquareY0},
                             {kSquareX1, kSquareY1},
                             {kSquareX1, kSquareY0},
                             {kSquareX0, kSquareY1}};
    for (int m = 0; m < config.num_aps; ++m) {
      if (m < 2) {
        ap.push_back(corners[m]);
      } else {
        ap.push_back({kSquareX0 + (kSquareX1 - kSquareX0) * (m - 1) /
                                      (config.num_aps),
                      kSquareY0});
      }
    }
    for (int q = 0; q < config.num_rxs; ++q) {
      if (q < 2) {
        rx.push_back(corners[2 + q]);
      } else {
        rx.push_back({kSquareX0 + (kSquareX1 - kSquareX0) * (q - 1) /
                                      (config.num_rxs),
                      kSquareY1});
      }
    }
    env.cfg_.ap_positions = std::move(ap);
    env.cfg_.rx_positions = std::move(rx);
  }

  // Links in row-major (ap, rx) order.
  for (int m = 0; m < env.cfg_.num_aps; ++m) {
    for (int q = 0; q < env.cfg_.num_rxs; ++q) {
      Link l;
      l.ap = m;
      l.rx = q;
      l.ap_pos = env.cfg_.ap_positions[static_cast<std::size_t>(m)];
      l.rx_pos = env.cfg_.rx_positions[static_cast<std::size_t>(q)];
      env.links_.push_back(l);
    }
  }

  // 16 candidate human locations on a 4x4 grid inside the square,
  // 1 m margin, numbered row-major from the lower-left.
  const double gx0 = kSquareX0 + 1.0, gx1 = kSquareX1 - 1.0;
  const double gy0 = kSquareY0 + 1.0, gy1 = kSquareY1 - 1.0;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      env.locations_.push_back({gx0 + (gx1 - gx0) * col / 3.0,
                                gy0 + (gy1 - gy0) * row / 3.0});
    }
  }
  return env;
}

const Vec2& Environment::location(int index) const {
  if (index < 1 || index > static_cast<int>(locations_.size())) {
    throw DomainError("location index " + std::to_string(index) +
                      " outside 1.." + std::to_string(locations_.size()));
  }
  return locations_[static_cast<std::size_t>(index - 1)];
}

double Environment::link_human_gain(int link, const Vec2& pos) const {
  const Link& l = links_[static_cast<std::size_t>(link)];
  const double d1 = std::max(distance(l.ap_pos, pos), 0.1);
  const double d2 = std::max(distance(pos, l.rx_pos), 0.1);
  return cfg_.reflection_gain / (d1 * d2);
}

}  // namespace linksense::sim
