// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace linksense::dsp {

// View over one link's CSI block, layout [antenna_pairs][subcarriers][time],
// row-major, complex float32 as stored in datasets.
struct CsiLinkView {
  std::span<const std::complex<float>> data;
  int antenna_pairs = 0;
  int subcarriers = 0;
  int time_len = 0;

  std::complex<float> at(int a, int s, int t) const {
    return data[(static_cast<std::size_t>(a) * subcarriers + s) * time_len + t];
  }
};

// The two per-link behavior series extracted from a CSI window:
// x1 = second principal component of adjacent-antenna phase differences,
// x2 = second principal component of amplitudes, plus their zero-mean
// unit-variance normalizations o1/o2. A degenerate flag marks windows where
// PCA or normalization collapsed (constant input); the corresponding series
// are all-zero.
struct StreamPair {
  std::vector<double> x1, x2;
  std::vector<double> o1, o2;
  int link = 0;
  int window_start = 0;
  bool degenerate_phase = false;
  bool degenerate_amplitude = false;
};

// Phase differences between adjacent antenna pairs, wrapped into (-pi, pi].
// Input [A][S][T] with A >= 2, output [A-1][S][T].
std::vector<double> phase_difference(const CsiLinkView& link);

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Zero-mean unit-variance normalization with the population standard
// deviation. Constant series (sigma < 1e-12) yield all zeros and set
// *degenerate. Length must be >= 2.
std::vector<double> zero_mean_normalize(std::span<const double> x,
                                        bool* degenerate = nullptr);

// Full per-link pipeline on a window [window_start, window_start + window_len):
// amplitude matrix [A*S][W] and phase-difference matrix [(A-1)*S][W] are each
// reduced to their second principal component and normalized.
StreamPair preprocess_link(const CsiLinkView& link, int window_start,
                           int window_len, int link_index = 0);

// DWT spectrum image pair for a window, channel 0 from the phase-difference
// stream, channel 1 from the amplitude stream. Layout [2][side][side].
std::vector<float> stream_dwt_images(const StreamPair& sp, int levels, int side);

}  // namespace linksense::dsp
