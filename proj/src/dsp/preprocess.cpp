// SPDX-License-Identifier: Apache-2.0
#include "linksense/dsp/preprocess.hpp"

#include <cmath>

#include "linksense/common.hpp"
#include "linksense/dsp/dwt.hpp"
#include "linksense/dsp/pca.hpp"

namespace linksense::dsp {

double wrap_angle(double a) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  a = std::fmod(a, two_pi);
  if (a <= -3.14159265358979323846) a += two_pi;
  if (a > 3.14159265358979323846) a -= two_pi;
  return a;
}

std::vector<double> phase_difference(const CsiLinkView& link) {
  const int a_pairs = link.antenna_pairs;
  const int s = link.subcarriers;
  const int t = link.time_len;
  if (a_pairs < 2) {
    throw DomainError(
        "phase_difference: needs at least 2 antenna pairs per link, got " +
        std::to_string(a_pairs));
  }
  std::vector<double> out(static_cast<std::size_t>(a_pairs - 1) * s * t);
  std::size_t idx = 0;
  for (int a = 0; a + 1 < a_pairs; ++a) {
    for (int sc = 0; sc < s; ++sc) {
      for (int ti = 0; ti < t; ++ti) {
        const double p0 = std::arg(link.at(a, sc, ti));
        const double p1 = std::arg(link.at(a + 1, sc, ti));
        out[idx++] = wrap_angle(p1 - p0);
      }
    }
  }
  return out;
}

std::vector<double> zero_mean_normalize(std::span<const double> x,
                                        bool* degenerate) {
  if (x.size() < 2) {
    throw DomainError("zero_mean_normalize: series length must be >= 2");
  }
  if (degenerate) *degenerate = false;
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double sigma = std::sqrt(var);
  std::vector<double> out(n, 0.0);
  if (sigma < 1e-12) {
    if (degenerate) *degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sigma;
  return out;
}

namespace {

// PCA second component with the degenerate case mapped to a zero series.
std::vector<double> second_component_or_zero(std::span<const double> matrix,
                                             int dims, int len, bool* flag) {
  *flag = false;
  try {
    return pca_second_component(matrix, dims, len);
  } catch (const DegenerateInputError&) {
    *flag = true;
    return std::vector<double>(static_cast<std::size_t>(len), 0.0);
  }
}

}  // namespace

StreamPair preprocess_link(const CsiLinkView& link, int window_start,
                           int window_len, int link_index) {
  const int a_pairs = link.antenna_pairs;
  const int s = link.subcarriers;
  if (window_start < 0 || window_len < 2 ||
      window_start + window_len > link.time_len) {
    throw DomainError("preprocess_link: window [" + std::to_string(window_start) +
                      ", " + std::to_string(window_start + window_len) +
                      ") outside sample of length " +
                      std::to_string(link.time_len) + " (link " +
                      std::to_string(link_index) + ")");
  }
  if (a_pairs < 2) {
    throw DomainError("preprocess_link: link " + std::to_string(link_index) +
                      " has fewer than 2 antenna pairs; phase differences "
                      "require adjacent antennas");
  }

  StreamPair sp;
  sp.link = link_index;
  sp.window_start = window_start;

  // Amplitude features [A*S][W].
  {
    std::vector<double> amp(static_cast<std::size_t>(a_pairs) * s * window_len);
    std::size_t idx = 0;
    for (int a = 0; a < a_pairs; ++a) {
      for (int sc = 0; sc < s; ++sc) {
        for (int t = 0; t < window_len; ++t) {
          amp[idx++] = std::abs(link.at(a, sc, window_start + t));
        }
      }
    }
    sp.x2 = second_component_or_zero(amp, a_pairs * s, window_len,
                                     &sp.degenerate_amplitude);
  }

  // Phase-difference features [(A-1)*S][W].
  {
    std::vector<double> pd(static_cast<std::size_t>(a_pairs - 1) * s * window_len);
    std::size_t idx = 0;
    for (int a = 0; a + 1 < a_pairs; ++a) {
      for (int sc = 0; sc < s; ++sc) {
        for (int t = 0; t < window_len; ++t) {
          const double p0 = std::arg(link.at(a, sc, window_start + t));
          const double p1 = std::arg(link.at(a + 1, sc, window_start + t));
          pd[idx++] = wrap_angle(p1 - p0);
        }
      }
    }
    sp.x1 = second_component_or_zero(pd, (a_pairs - 1) * s, window_len,
                                     &sp.degenerate_phase);
  }

  bool flag = false;
  sp.o1 = zero_mean_normalize(sp.x1, &flag);
  sp.degenerate_phase = sp.degenerate_phase || flag;
  sp.o2 = zero_mean_normalize(sp.x2, &flag);
  sp.degenerate_amplitude = sp.degenerate_amplitude || flag;
  return sp;
}

std::vector<float> stream_dwt_images(const StreamPair& sp, int levels, int side) {
  std::vector<float> out;
  out.reserve(2 * static_cast<std::size_t>(side) * side);
  const std::vector<float> ch0 = dwt_spectrum(sp.x1, levels, side);
  const std::vector<float> ch1 = dwt_spectrum(sp.x2, levels, side);
  out.insert(out.end(), ch0.begin(), ch0.end());
  out.insert(out.end(), ch1.begin(), ch1.end());
  return out;
}

}  // namespace linksense::dsp
