// SPDX-License-Identifier: Apache-2.0
#include "linksense/dsp/dwt.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "linksense/common.hpp"

namespace linksense::dsp {

namespace {

// db4: 4 vanishing moments, 8 taps (reconstruction low-pass order).
constexpr double kDb4Lo[8] = {
    0.2303778133088965,   0.7148465705529157,   0.6308807679298589,
    -0.02798376941685985, -0.1870348117190931,  0.03084138183556076,
    0.03288301166688519,  -0.01059740178506903,
};
constexpr int kTaps = 8;

// Quadrature mirror: g[i] = (-1)^i * h[taps-1-i].
double highpass(int i) {
  const double h = kDb4Lo[kTaps - 1 - i];
  return (i % 2 == 0) ? h : -h;
}

}  // namespace

std::span<const double> db4_lowpass() { return {kDb4Lo, kTaps}; }

void dwt_step(std::span<const double> x, std::vector<double>& approx,
              std::vector<double>& detail) {
  const std::size_t n = x.size();
  if (n < 2 || n % 2 != 0) {
    throw DomainError("dwt_step: input length must be even and >= 2, got " +
                      std::to_string(n));
  }
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (int i = 0; i < kTaps; ++i) {
      const double v = x[(2 * k + static_cast<std::size_t>(i)) % n];
      a += kDb4Lo[i] * v;
      d += highpass(i) * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

void idwt_step(std::span<const double> approx, std::span<const double> detail,
               std::vector<double>& x) {
  const std::size_t half = approx.size();
  if (detail.size() != half) {
    throw DomainError("idwt_step: approx/detail length mismatch");
  }
  const std::size_t n = half * 2;
  x.assign(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (int i = 0; i < kTaps; ++i) {
      const std::size_t idx = (2 * k + static_cast<std::size_t>(i)) % n;
      x[idx] += kDb4Lo[i] * approx[k] + highpass(i) * detail[k];
    }
  }
}

DwtDecomposition dwt_decompose(std::span<const double> x, int levels) {
  if (levels < 1) throw DomainError("dwt_decompose: levels must be >= 1");
  const std::size_t n = x.size();
  const std::size_t div = std::size_t{1} << levels;
  if (n < div || n % div != 0) {
    throw DomainError("dwt_decompose: length " + std::to_string(n) +
                      " not divisible by 2^" + std::to_string(levels));
  }
  DwtDecomposition dec;
  dec.details.reserve(static_cast<std::size_t>(levels));
  std::vector<double> current(x.begin(), x.end());
  for (int lvl = 0; lvl < levels; ++lvl) {
    std::vector<double> approx;
    std::vector<double> detail;
    dwt_step(current, approx, detail);
    dec.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  dec.approx = std::move(current);
  return dec;
}

std::vector<double> dwt_reconstruct(const DwtDecomposition& dec) {
  std::vector<double> current = dec.approx;
  for (std::size_t lvl = dec.details.size(); lvl-- > 0;) {
    std::vector<double> next;
    idwt_step(current, dec.details[lvl], next);
    current = std::move(next);
  }
  return current;
}

std::vector<float> dwt_spectrum(std::span<const double> x, int levels, int side) {
  if (side < 1) throw DomainError("dwt_spectrum: side must be >= 1");
  const DwtDecomposition dec = dwt_decompose(x, levels);

  // Bands top to bottom: detail level 1..levels, then approximation.
  const int bands = levels + 1;
  std::vector<float> img(static_cast<std::size_t>(side) * side, 0.0f);

  auto band_coeffs = [&](int b) -> const std::vector<double>& {
    return b < levels ? dec.details[static_cast<std::size_t>(b)] : dec.approx;
  };

  for (int b = 0; b < bands; ++b) {
    const std::vector<double>& c = band_coeffs(b);
    const std::size_t n = c.size();
    // Linear resample of |c| to `side` columns.
    std::vector<float> row(static_cast<std::size_t>(side), 0.0f);
    for (int col = 0; col < side; ++col) {
      if (n == 1) {
        row[static_cast<std::size_t>(col)] = static_cast<float>(std::abs(c[0]));
        continue;
      }
      const double pos = side == 1 ? 0.0
                                   : static_cast<double>(col) * static_cast<double>(n - 1) /
                                         static_cast<double>(side - 1);
      const auto i0 = static_cast<std::size_t>(pos);
      const std::size_t i1 = std::min(i0 + 1, n - 1);
      const double frac = pos - static_cast<double>(i0);
      const double v = (1.0 - frac) * std::abs(c[i0]) + frac * std::abs(c[i1]);
      row[static_cast<std::size_t>(col)] = static_cast<float>(v);
    }
    const int r0 = b * side / bands;
    const int r1 = (b + 1) * side / bands;
    for (int r = r0; r < std::max(r1, r0 + 1) && r < side; ++r) {
      std::copy(row.begin(), row.end(),
                img.begin() + static_cast<std::size_t>(r) * side);
    }
  }

  float peak = 0.0f;
  for (float v : img) peak = std::max(peak, v);
  if (peak > 0.0f) {
    for (float& v : img) v /= peak;
  }
  return img;
}

}  // namespace linksense::dsp
