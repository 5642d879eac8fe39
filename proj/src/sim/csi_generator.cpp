// SPDX-License-Identifier: Apache-2.0
#include "linksense/sim/csi_generator.hpp"

#include <cmath>

#include "linksense/common.hpp"
#include "linksense/rng.hpp"

namespace linksense::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLightSpeed = 299792458.0;

// Static multipath field: line of sight plus two reflectors per link.
// Amplitudes relative to the LoS path; excess delays in seconds. Phases are
// re-drawn per capture (the environment shifts between recordings) but are
// constant over time within a sample, so adjacent-antenna phase differences
// stay stable apart from the human contribution.
constexpr double kStaticAmp[3] = {1.0, 0.35, 0.2};
constexpr double kStaticExcessDelay[3] = {0.0, 30e-9, 70e-9};

// Ambient dynamic clutter: slow Gaussian scatterer paths (swaying fixtures,
// air flow) present on every link, independent of the human. Amplitudes are
// tied to the noise floor; the total keeps a zero-motion capture within the
// 3x noise-floor band and sub-threshold links within 10x the noise
// variance. Two independent paths so the clutter spans multiple principal
// directions.
constexpr int kClutterPaths = 2;
constexpr double kClutterAmp = 1.8;
constexpr double kClutterBandwidthHz = 1.2;
constexpr std::uint64_t kEnvHashTag = 0x5ca77e11ed0c5eedULL;
constexpr std::uint64_t kSampleRngTag = 0x9c51ab5e11a8f00dULL;

double env_phase(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                 std::uint64_t c) {
  const std::uint64_t s = mix_seed(kEnvHashTag, seed, a, b, c);
  return 2.0 * kPi * (static_cast<double>(s >> 11) * 0x1.0p-53);
}

}  // namespace

std::vector<std::uint8_t> informative_links(const Environment& env, int location,
                                            const ActivityProfile& activity) {
  (void)activity;  // relevance is geometric; dynamics do not move the mask
  const Vec2& pos = env.location(location);
  const int n = env.num_links();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  const double threshold =
      env.config().relevance_threshold * env.config().noise_floor;
  int best = 0;
  double best_gain = -1.0;
  bool any = false;
  for (int l = 0; l < n; ++l) {
    const double gain = env.link_human_gain(l, pos);
    if (gain >= threshold) {
      mask[static_cast<std::size_t>(l)] = 1;
      any = true;
    }
    if (gain > best_gain) {
      best_gain = gain;
      best = l;
    }
  }
  if (!any) mask[static_cast<std::size_t>(best)] = 1;
  return mask;
}

CsiSample generate_sample(const Environment& env, const ActivityProfile& activity,
                          int location, std::uint64_t seed) {
  const Vec2& pos = env.location(location);  // validates the index
  const EnvironmentConfig& cfg = env.config();
  const int n_links = env.num_links();
  const int n_ant = env.antenna_pairs();
  const int n_sub = cfg.num_subcarriers;
  const int n_time = env.time_samples();

  CsiSample sample;
  sample.links = n_links;
  sample.antenna_pairs = n_ant;
  sample.subcarriers = n_sub;
  sample.time_len = n_time;
  sample.activity = activity.label;
  sample.location = location;
  sample.seed = seed;
  sample.informative_mask = informative_links(env, location, activity);
  sample.csi.resize(static_cast<std::size_t>(n_links) * n_ant * n_sub * n_time);

  Rng rng(mix_seed(seed, kSampleRngTag));

  // Motion parameters are drawn before any noise so the draw order is a
  // fixed contract.
  const double motion_phase = rng.uniform(0.0, 2.0 * kPi);
  // Transient onset early in the sample; clamped so the event fits.
  double onset = rng.uniform(0.20, 0.28) * cfg.sample_duration;
  const double latest = cfg.sample_duration - activity.motion_period - 0.05;
  if (onset > latest) onset = std::max(0.0, latest);

  // Two-way path-length displacement, shared by all links (one body).
  std::vector<double> displacement(static_cast<std::size_t>(n_time));
  for (int t = 0; t < n_time; ++t) {
    displacement[static_cast<std::size_t>(t)] = path_displacement(
        activity, static_cast<double>(t) / cfg.sample_rate, onset, motion_phase);
  }

  std::vector<double> sub_freq(static_cast<std::size_t>(n_sub));
  for (int s = 0; s < n_sub; ++s) sub_freq[static_cast<std::size_t>(s)] = env.subcarrier_freq(s);

  // Per-link human path: alpha * exp(-j 2 pi f_s (tau_base + dd(t)/c) + j rho_a).
  std::vector<double> human_re(static_cast<std::size_t>(n_sub) * n_time);
  std::vector<double> human_im(static_cast<std::size_t>(n_sub) * n_time);

  // Clutter process state per (link, path): complex one-pole Gaussian with
  // unit stationary variance, plus a path delay and base phase.
  const double clutter_rho =
      std::exp(-2.0 * kPi * kClutterBandwidthHz / cfg.sample_rate);
  const double clutter_drive = std::sqrt(1.0 - clutter_rho * clutter_rho);

  std::vector<double> clutter_re(static_cast<std::size_t>(kClutterPaths) * n_time);
  std::vector<double> clutter_im(static_cast<std::size_t>(kClutterPaths) * n_time);
  std::vector<double> clutter_tau(static_cast<std::size_t>(kClutterPaths));
  std::vector<double> clutter_phase(static_cast<std::size_t>(kClutterPaths));

  for (int l = 0; l < n_links; ++l) {
    const Link& link = env.links()[static_cast<std::size_t>(l)];
    const double d1 = distance(link.ap_pos, pos);
    const double d2 = distance(pos, link.rx_pos);
    const double alpha = env.link_human_gain(l, pos);
    const double tau_base = (d1 + d2) / kLightSpeed;

    for (int p = 0; p < kClutterPaths; ++p) {
      clutter_tau[static_cast<std::size_t>(p)] = rng.uniform(40e-9, 160e-9);
      clutter_phase[static_cast<std::size_t>(p)] = rng.uniform(0.0, 2.0 * kPi);
      double* cre = clutter_re.data() + static_cast<std::size_t>(p) * n_time;
      double* cim = clutter_im.data() + static_cast<std::size_t>(p) * n_time;
      // Stationary start, then one-pole evolution; unit variance per
      // complex sample (1/2 per component).
      double re = rng.gaussian() * std::sqrt(0.5);
      double im = rng.gaussian() * std::sqrt(0.5);
      for (int t = 0; t < n_time; ++t) {
        cre[t] = re;
        cim[t] = im;
        re = clutter_rho * re + clutter_drive * rng.gaussian() * std::sqrt(0.5);
        im = clutter_rho * im + clutter_drive * rng.gaussian() * std::sqrt(0.5);
      }
    }

    for (int s = 0; s < n_sub; ++s) {
      const double f = sub_freq[static_cast<std::size_t>(s)];
      const double base = -2.0 * kPi * f * tau_base;
      double* re = human_re.data() + static_cast<std::size_t>(s) * n_time;
      double* im = human_im.data() + static_cast<std::size_t>(s) * n_time;
      for (int t = 0; t < n_time; ++t) {
        const double phase =
            base - 2.0 * kPi * f * displacement[static_cast<std::size_t>(t)] / kLightSpeed;
        re[t] = alpha * std::cos(phase);
        im[t] = alpha * std::sin(phase);
      }
    }

    for (int a = 0; a < n_ant; ++a) {
      // Per-antenna constants: static multipath field and the human-path
      // arrival offset. Constant over time, so adjacent-antenna phase
      // differences stay stable apart from the human contribution.
      const double rho = env_phase(seed, static_cast<std::uint64_t>(l),
                                   static_cast<std::uint64_t>(a),
                                   static_cast<std::uint64_t>(location) + 100);
      const double rho_cos = std::cos(rho);
      const double rho_sin = std::sin(rho);

      const double los_tau = distance(link.ap_pos, link.rx_pos) / kLightSpeed;
      std::complex<float>* out =
          sample.csi.data() +
          ((static_cast<std::size_t>(l) * n_ant + a) * n_sub) * n_time;

      for (int s = 0; s < n_sub; ++s) {
        const double f = sub_freq[static_cast<std::size_t>(s)];
        double static_re = 0.0;
        double static_im = 0.0;
        for (int p = 0; p < 3; ++p) {
          const double theta = env_phase(seed, static_cast<std::uint64_t>(l),
                                         static_cast<std::uint64_t>(a),
                                         static_cast<std::uint64_t>(p)) -
                               2.0 * kPi * f * (los_tau + kStaticExcessDelay[p]);
          static_re += kStaticAmp[p] * std::cos(theta);
          static_im += kStaticAmp[p] * std::sin(theta);
        }

        double cl_cos[kClutterPaths];
        double cl_sin[kClutterPaths];
        for (int p = 0; p < kClutterPaths; ++p) {
          const double theta =
              clutter_phase[static_cast<std::size_t>(p)] -
              2.0 * kPi * f * clutter_tau[static_cast<std::size_t>(p)] +
              env_phase(seed, static_cast<std::uint64_t>(l),
                        static_cast<std::uint64_t>(a),
                        static_cast<std::uint64_t>(300 + p));
          cl_cos[p] = std::cos(theta);
          cl_sin[p] = std::sin(theta);
        }
        const double beta = kClutterAmp * cfg.noise_floor;

        const double* hre = human_re.data() + static_cast<std::size_t>(s) * n_time;
        const double* him = human_im.data() + static_cast<std::size_t>(s) * n_time;
        std::complex<float>* row = out + static_cast<std::size_t>(s) * n_time;
        for (int t = 0; t < n_time; ++t) {
          // Rotate the shared human path by the per-antenna offset.
          double re = static_re + hre[t] * rho_cos - him[t] * rho_sin +
                      cfg.noise_floor * rng.gaussian();
          double im = static_im + hre[t] * rho_sin + him[t] * rho_cos +
                      cfg.noise_floor * rng.gaussian();
          for (int p = 0; p < kClutterPaths; ++p) {
            const double* cre = clutter_re.data() + static_cast<std::size_t>(p) * n_time;
            const double* cim = clutter_im.data() + static_cast<std::size_t>(p) * n_time;
            re += beta * (cl_cos[p] * cre[t] - cl_sin[p] * cim[t]);
            im += beta * (cl_sin[p] * cre[t] + cl_cos[p] * cim[t]);
          }
          row[t] = std::complex<float>(static_cast<float>(re),
                                       static_cast<float>(im));
        }
      }
    }
  }
  return sample;
}

}  // namespace linksense::sim
