// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/cases.hpp"

#include <cmath>
#include <limits>

#include "linksense/common.hpp"

namespace linksense::harness {

LinkPolicy case_policy(int case_id) {
  switch (case_id) {
    case 1: return LinkPolicy::kAgentSubset;
    case 2: return LinkPolicy::kOrthogonalPair;
    case 3: return LinkPolicy::kAllLinks;
    case 4: return LinkPolicy::kRandomSingle;
    case 5: return LinkPolicy::kAgentSingle;
    default:
      throw ConfigError("case id must be in 1..5, got " + std::to_string(case_id));
  }
}

bool case_uses_agent(int case_id) {
  const LinkPolicy p = case_policy(case_id);
  return p == LinkPolicy::kAgentSubset || p == LinkPolicy::kAgentSingle;
}

namespace {

double point_segment_distance(const sim::Vec2& p, const sim::Vec2& a,
                              const sim::Vec2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

double link_cos_angle(const sim::Link& a, const sim::Link& b) {
  const double ax = a.rx_pos.x - a.ap_pos.x, ay = a.rx_pos.y - a.ap_pos.y;
  const double bx = b.rx_pos.x - b.ap_pos.x, by = b.rx_pos.y - b.ap_pos.y;
  const double na = std::sqrt(ax * ax + ay * ay);
  const double nb = std::sqrt(bx * bx + by * by);
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::abs((ax * bx + ay * by) / (na * nb));
}

}  // namespace

std::vector<std::uint8_t> orthogonal_pair_mask(const sim::Environment& env,
                                               int location) {
  const int n = env.num_links();
  if (n < 2) {
    throw DomainError("orthogonal pair needs at least 2 links");
  }
  const sim::Vec2& pos = env.location(location);
  const auto& links = env.links();

  // Most perpendicular pair first, then nearest to the location.
  double best_cos = std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  int best_i = 0, best_j = 1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = link_cos_angle(links[static_cast<std::size_t>(i)],
                                      links[static_cast<std::size_t>(j)]);
      const double d =
          point_segment_distance(pos, links[static_cast<std::size_t>(i)].ap_pos,
                                 links[static_cast<std::size_t>(i)].rx_pos) +
          point_segment_distance(pos, links[static_cast<std::size_t>(j)].ap_pos,
                                 links[static_cast<std::size_t>(j)].rx_pos);
      const bool more_orthogonal = c < best_cos - 1e-9;
      const bool tie = std::abs(c - best_cos) <= 1e-9;
      if (more_orthogonal || (tie && d < best_dist - 1e-12)) {
        best_cos = c;
        best_dist = d;
        best_i = i;
        best_j = j;
      }
    }
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  mask[static_cast<std::size_t>(best_i)] = 1;
  mask[static_cast<std::size_t>(best_j)] = 1;
  return mask;
}

std::vector<std::uint8_t> all_links_mask(int num_links) {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(num_links), 1);
}

std::vector<std::uint8_t> random_single_mask(int num_links, Rng& rng) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(num_links), 0);
  mask[static_cast<std::size_t>(rng.uniform_index(
      static_cast<std::uint64_t>(num_links)))] = 1;
  return mask;
}

}  // namespace linksense::harness
