// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace linksense::dsp {

// Multi-level discrete wavelet transform with the 8-tap Daubechies-4 filter
// pair and periodic (circular) extension. The periodized orthonormal filter
// bank is an orthogonal transform for every even length, so decomposition
// preserves energy exactly and reconstruction is exact up to rounding.
struct DwtDecomposition {
  // details[0] is the finest level (level 1); sizes halve per level.
  std::vector<std::vector<double>> details;
  std::vector<double> approx;

  std::size_t levels() const { return details.size(); }
};

// Scaling (low-pass) coefficients, sum sqrt(2), unit energy.
std::span<const double> db4_lowpass();

// One decomposition level. x.size() must be even.
void dwt_step(std::span<const double> x, std::vector<double>& approx,
              std::vector<double>& detail);

// One reconstruction level (adjoint of dwt_step).
void idwt_step(std::span<const double> approx, std::span<const double> detail,
               std::vector<double>& x);

// Full decomposition. Requires x.size() >= 2^levels and x.size() divisible
// by 2^levels, levels >= 1.
DwtDecomposition dwt_decompose(std::span<const double> x, int levels);

std::vector<double> dwt_reconstruct(const DwtDecomposition& dec);

// Time-frequency image for the classifier: the image is split into
// levels+1 horizontal bands, finest detail level on top, approximation at
// the bottom. Each band holds |coefficients| linearly resampled to `side`
// columns, replicated across the band's rows, and the whole image is
// max-normalized to [0,1] (all-zero input gives the zero image).
// Returned row-major, side*side entries.
std::vector<float> dwt_spectrum(std::span<const double> x, int levels, int side);

}  // namespace linksense::dsp
