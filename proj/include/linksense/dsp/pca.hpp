// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace linksense::dsp {

// Full eigendecomposition of a dense symmetric matrix (row-major n*n),
// Householder tridiagonalization followed by implicit-shift QL.
// Eigenvalues are returned in non-increasing order; vectors[k*n..k*n+n)
// is the unit eigenvector for values[k], sign-fixed so that its first
// entry with |v| > 1e-12 is positive.
struct SymEig {
  std::vector<double> values;
  std::vector<double> vectors;  // row k = eigenvector k
};

SymEig sym_eig(std::span<const double> matrix, int n);

// Principal component scores of a feature-by-time matrix.
// data is row-major [dims][len]: each row is one feature observed over
// time. Rows are centered, the population covariance (divide by len) is
// eigendecomposed, and the score series of the leading `components`
// eigenvectors are returned (each score series has zero mean by
// construction).
//
// Throws DegenerateInputError when the covariance has rank < components
// (all-constant input being the canonical case).
struct PcaResult {
  std::vector<std::vector<double>> scores;  // scores[k][t]
  std::vector<double> eigenvalues;          // all dims, non-increasing
  bool short_window = false;                // len < dims: underdetermined
};

PcaResult pca_components(std::span<const double> data, int dims, int len,
                         int components);

// The score series along the second principal component.
std::vector<double> pca_second_component(std::span<const double> data, int dims,
                                         int len);

}  // namespace linksense::dsp
