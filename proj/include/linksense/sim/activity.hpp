// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string_view>

namespace linksense::sim {

enum class Activity : int { kWalk = 0, kRun = 1, kStand = 2, kSit = 3, kBend = 4 };
inline constexpr int kNumActivities = 5;

std::string_view activity_name(Activity a);

// Path-length envelope family. Sustained activities modulate the reflected
// path continuously; transient ones are a single event somewhere inside the
// sample, either a one-way level change (sit down and stay) or an
// out-and-back pulse (bend and straighten up).
enum class Envelope : int { kSustained = 0, kTransientStep = 1, kTransientPulse = 2 };

struct ActivityProfile {
  Activity label = Activity::kWalk;
  double body_speed = 0.0;        // m/s; peak path-length rate is 2*body_speed
  double motion_period = 1.0;     // s; event duration for transient envelopes
  double motion_amplitude = 0.0;  // m of two-way path-length change
  Envelope envelope = Envelope::kSustained;

  static const std::array<ActivityProfile, kNumActivities>& all();
  static const ActivityProfile& get(Activity a);
};

// Two-way path-length displacement of the reflected path at time t, given
// the event onset (transient envelopes only) and motion phase offset.
double path_displacement(const ActivityProfile& p, double t, double onset,
                         double phase);

}  // namespace linksense::sim
