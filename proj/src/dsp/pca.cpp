// SPDX-License-Identifier: Apache-2.0
#include "linksense/dsp/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linksense/common.hpp"

namespace linksense::dsp {

namespace {

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction of a symmetric matrix to tridiagonal form,
// accumulating the orthogonal transform in z. Classic tred2.
void tred2(std::vector<double>& z, int n, std::vector<double>& d,
           std::vector<double>& e) {
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(z[i * n + k]);
      if (scale == 0.0) {
        e[i] = z[i * n + l];
      } else {
        for (int k = 0; k <= l; ++k) {
          z[i * n + k] /= scale;
          h += z[i * n + k] * z[i * n + k];
        }
        double f = z[i * n + l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z[i * n + l] = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z[j * n + i] = z[i * n + j] / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z[j * n + k] * z[i * n + k];
          for (int k = j + 1; k <= l; ++k) g += z[k * n + j] * z[i * n + k];
          e[j] = g / h;
          f += e[j] * z[i * n + j];
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) {
            z[j * n + k] -= f * e[k] + g * z[i * n + k];
          }
        }
      }
    } else {
      e[i] = z[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z[i * n + k] * z[k * n + j];
        for (int k = 0; k <= l; ++k) z[k * n + j] -= g * z[k * n + i];
      }
    }
    d[i] = z[i * n + i];
    z[i * n + i] = 1.0;
    for (int j = 0; j <= l; ++j) {
      z[j * n + i] = 0.0;
      z[i * n + j] = 0.0;
    }
  }
}

// Implicit-shift QL on the tridiagonal (d, e), updating eigenvectors in z.
void tql2(std::vector<double>& z, int n, std::vector<double>& d,
          std::vector<double>& e) {
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter > 60) {
          throw NumericError("sym_eig: QL iteration did not converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void fix_sign(std::vector<double>& vec) {
  for (double v : vec) {
    if (std::abs(v) > 1e-12) {
      if (v < 0.0) {
        for (double& w : vec) w = -w;
      }
      return;
    }
  }
}

}  // namespace

SymEig sym_eig(std::span<const double> matrix, int n) {
  if (n < 1) throw DomainError("sym_eig: n must be >= 1");
  if (matrix.size() != static_cast<std::size_t>(n) * n) {
    throw ShapeError("sym_eig: matrix size does not match n*n");
  }
  std::vector<double> z(matrix.begin(), matrix.end());
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    d[0] = z[0];
    z[0] = 1.0;
  } else {
    tred2(z, n, d, e);
    tql2(z, n, d, e);
  }

  // tql2 leaves eigenvectors in columns of z; order by descending value.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return d[a] > d[b]; });

  SymEig out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(static_cast<std::size_t>(n) * n);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.values[static_cast<std::size_t>(k)] = d[src];
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = z[i * n + src];
    fix_sign(col);
    std::copy(col.begin(), col.end(),
              out.vectors.begin() + static_cast<std::size_t>(k) * n);
  }
  return out;
}

PcaResult pca_components(std::span<const double> data, int dims, int len,
                         int components) {
  if (dims < components) {
    throw DomainError("pca_components: need at least " +
                      std::to_string(components) + " features, got " +
                      std::to_string(dims));
  }
  if (len < 2) throw DomainError("pca_components: need at least 2 observations");
  if (data.size() != static_cast<std::size_t>(dims) * len) {
    throw ShapeError("pca_components: data size does not match dims*len");
  }

  // Center each feature over time.
  std::vector<double> centered(data.begin(), data.end());
  for (int i = 0; i < dims; ++i) {
    double* row = centered.data() + static_cast<std::size_t>(i) * len;
    double mean = 0.0;
    for (int t = 0; t < len; ++t) mean += row[t];
    mean /= len;
    for (int t = 0; t < len; ++t) row[t] -= mean;
  }

  // Population covariance, C[i][j] = sum_t x_i(t) x_j(t) / len.
  std::vector<double> cov(static_cast<std::size_t>(dims) * dims, 0.0);
  for (int i = 0; i < dims; ++i) {
    const double* ri = centered.data() + static_cast<std::size_t>(i) * len;
    for (int j = i; j < dims; ++j) {
      const double* rj = centered.data() + static_cast<std::size_t>(j) * len;
      double acc = 0.0;
      for (int t = 0; t < len; ++t) acc += ri[t] * rj[t];
      acc /= len;
      cov[static_cast<std::size_t>(i) * dims + j] = acc;
      cov[static_cast<std::size_t>(j) * dims + i] = acc;
    }
  }

  SymEig eig = sym_eig(cov, dims);

  const double lead = std::max(eig.values[0], 0.0);
  const double rank_tol = std::max(lead * 1e-14, 1e-30);
  if (eig.values[static_cast<std::size_t>(components - 1)] <= rank_tol) {
    throw DegenerateInputError(
        "pca_components: covariance rank below requested component count");
  }

  PcaResult out;
  out.eigenvalues = std::move(eig.values);
  out.short_window = len < dims;
  out.scores.resize(static_cast<std::size_t>(components));
  for (int k = 0; k < components; ++k) {
    const double* v = eig.vectors.data() + static_cast<std::size_t>(k) * dims;
    std::vector<double>& s = out.scores[static_cast<std::size_t>(k)];
    s.assign(static_cast<std::size_t>(len), 0.0);
    for (int i = 0; i < dims; ++i) {
      const double w = v[i];
      if (w == 0.0) continue;
      const double* row = centered.data() + static_cast<std::size_t>(i) * len;
      for (int t = 0; t < len; ++t) s[static_cast<std::size_t>(t)] += w * row[t];
    }
  }
  return out;
}

std::vector<double> pca_second_component(std::span<const double> data, int dims,
                                         int len) {
  PcaResult r = pca_components(data, dims, len, 2);
  return std::move(r.scores[1]);
}

}  // namespace linksense::dsp
