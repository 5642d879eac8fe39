// SPDX-License-Identifier: Apache-2.0
#include "linksense/sim/activity.hpp"

#include <cmath>

namespace linksense::sim {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Residual sway while otherwise still (pre/post transient). Same texture
// as standing, so the transient event itself is what separates the three
// static activities.
constexpr double kRestJitterAmp = 0.02;
constexpr double kRestJitterPeriod = 0.45;
}  // namespace

std::string_view activity_name(Activity a) {
  switch (a) {
    case Activity::kWalk: return "Walk";
    case Activity::kRun: return "Run";
    case Activity::kStand: return "Stand";
    case Activity::kSit: return "Sit";
    case Activity::kBend: return "Bend";
  }
  return "?";
}

const std::array<ActivityProfile, kNumActivities>& ActivityProfile::all() {
  // Sustained amplitudes are body_speed * period / pi so the peak
  // path-length rate equals 2 * body_speed.
  static const std::array<ActivityProfile, kNumActivities> profiles = {{
      {Activity::kWalk, 1.0, 2.0, 1.0 * 2.0 / kPi, Envelope::kSustained},
      {Activity::kRun, 2.0, 1.2, 2.0 * 1.2 / kPi, Envelope::kSustained},
      {Activity::kStand, 0.0, 0.45, 0.02, Envelope::kSustained},
      {Activity::kSit, 0.0, 1.2, 0.50, Envelope::kTransientStep},
      {Activity::kBend, 0.0, 0.7, 0.45, Envelope::kTransientPulse},
  }};
  return profiles;
}

const ActivityProfile& ActivityProfile::get(Activity a) {
  return all()[static_cast<std::size_t>(a)];
}

double path_displacement(const ActivityProfile& p, double t, double onset,
                         double phase) {
  switch (p.envelope) {
    case Envelope::kSustained: {
      const double osc =
          p.motion_amplitude * std::sin(2.0 * kPi * t / p.motion_period + phase);
      // Slow positional drift on top of the oscillation for moving bodies.
      return osc + 0.15 * p.body_speed * t;
    }
    case Envelope::kTransientStep:
    case Envelope::kTransientPulse: {
      const double jitter = kRestJitterAmp *
                            std::sin(2.0 * kPi * t / kRestJitterPeriod + phase);
      const double u = (t - onset) / p.motion_period;
      if (u <= 0.0) return jitter;
      if (p.envelope == Envelope::kTransientStep) {
        // Raised-cosine rise to a new resting level.
        const double uu = u >= 1.0 ? 1.0 : u;
        return jitter + p.motion_amplitude * 0.5 * (1.0 - std::cos(kPi * uu));
      }
      // Out-and-back pulse.
      if (u >= 1.0) return jitter;
      return jitter + p.motion_amplitude * 0.5 * (1.0 - std::cos(2.0 * kPi * u));
    }
  }
  return 0.0;
}

}  // namespace linksense::sim
