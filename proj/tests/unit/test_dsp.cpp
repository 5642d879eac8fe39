// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "linksense/common.hpp"
#include "linksense/dsp/dwt.hpp"
#include "linksense/dsp/pca.hpp"
#include "linksense/dsp/preprocess.hpp"
#include "linksense/rng.hpp"

using namespace linksense;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent single-level oracle: direct circular convolution with the
// published filter taps followed by downsampling by two. Shares only the
// filter constants with the implementation.
void oracle_dwt_step(const std::vector<double>& x, std::vector<double>& a,
                     std::vector<double>& d) {
  const auto lo = dsp::db4_lowpass();
  std::vector<double> hi(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    hi[i] = (i % 2 == 0 ? 1.0 : -1.0) * lo[lo.size() - 1 - i];
  }
  const std::size_t n = x.size();
  a.assign(n / 2, 0.0);
  d.assign(n / 2, 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      a[k] += lo[i] * x[(2 * k + i) % n];
      d[k] += hi[i] * x[(2 * k + i) % n];
    }
  }
}

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace

TEST_CASE("dwt: zero input gives zero image") {
  std::vector<double> x(256, 0.0);
  const auto img = dsp::dwt_spectrum(x, 5, 32);
  for (float v : img) CHECK(v == 0.0f);
}

TEST_CASE("dwt: alternating series concentrates energy in the finest band") {
  std::vector<double> x(256);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;

  // Oracle agreement on the first level.
  std::vector<double> oa, od;
  oracle_dwt_step(x, oa, od);
  std::vector<double> a, d;
  dsp::dwt_step(x, a, d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(oa[i]).epsilon(1e-12));
    CHECK(d[i] == doctest::Approx(od[i]).epsilon(1e-12));
  }

  const int side = 32;
  const auto img = dsp::dwt_spectrum(x, 5, side);
  // Band rows: 6 bands over 32 rows; band 0 = rows [0, 5).
  std::vector<double> band_sum(6, 0.0);
  for (int b = 0; b < 6; ++b) {
    const int r0 = b * side / 6, r1 = (b + 1) * side / 6;
    for (int r = r0; r < r1; ++r) {
      for (int c = 0; c < side; ++c) {
        band_sum[static_cast<std::size_t>(b)] += img[static_cast<std::size_t>(r) * side + c];
      }
    }
    // Normalize by band height so replication does not skew the comparison.
    band_sum[static_cast<std::size_t>(b)] /= std::max(r1 - r0, 1);
  }
  for (int b = 1; b < 6; ++b) {
    CHECK(band_sum[0] > 5.0 * band_sum[static_cast<std::size_t>(b)]);
  }
}

TEST_CASE("dwt: multi-level agrees with repeated oracle steps") {
  const auto x = random_series(128, 411);
  const auto dec = dsp::dwt_decompose(x, 3);
  std::vector<double> cur = x;
  for (int lvl = 0; lvl < 3; ++lvl) {
    std::vector<double> oa, od;
    oracle_dwt_step(cur, oa, od);
    const auto& d = dec.details[static_cast<std::size_t>(lvl)];
    REQUIRE(d.size() == od.size());
    for (std::size_t i = 0; i < od.size(); ++i) {
      CHECK(d[i] == doctest::Approx(od[i]).epsilon(1e-12));
    }
    cur = oa;
  }
  for (std::size_t i = 0; i < cur.size(); ++i) {
    CHECK(dec.approx[i] == doctest::Approx(cur[i]).epsilon(1e-12));
  }
}

TEST_CASE("dwt: reconstruction and energy preservation") {
  const auto x = random_series(256, 999);
  const auto dec = dsp::dwt_decompose(x, 5);

  double coeff_energy = energy(dec.approx);
  for (const auto& d : dec.details) coeff_energy += energy(d);
  CHECK(coeff_energy == doctest::Approx(energy(x)).epsilon(1e-8));

  const auto back = dsp::dwt_reconstruct(dec);
  REQUIRE(back.size() == x.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    max_err = std::max(max_err, std::abs(back[i] - x[i]));
  }
  CHECK(max_err < 1e-8);
}

TEST_CASE("dwt: length/level domain errors") {
  std::vector<double> x(20, 1.0);
  CHECK_THROWS_AS(dsp::dwt_decompose(x, 5), DomainError);
  CHECK_THROWS_AS(dsp::dwt_decompose(x, 0), DomainError);
}

TEST_CASE("pca: two-feature oracle") {
  // Features [t, -t] plus tiny jitter on an orthogonal direction: PC1 is
  // the (1,-1)/sqrt(2) ramp, PC2 the jitter direction (1,1)/sqrt(2).
  const int len = 64;
  Rng rng(5);
  std::vector<double> jitter(len);
  for (double& v : jitter) v = 0.01 * rng.uniform(-1.0, 1.0);
  std::vector<double> data(2 * len);
  for (int t = 0; t < len; ++t) {
    const double ramp = static_cast<double>(t) - (len - 1) / 2.0;
    data[static_cast<std::size_t>(t)] = ramp + jitter[static_cast<std::size_t>(t)];
    data[static_cast<std::size_t>(len + t)] = -ramp + jitter[static_cast<std::size_t>(t)];
  }

  // Brute-force 2x2 eigendecomposition.
  double c00 = 0, c01 = 0, c11 = 0;
  double m0 = 0, m1 = 0;
  for (int t = 0; t < len; ++t) {
    m0 += data[static_cast<std::size_t>(t)];
    m1 += data[static_cast<std::size_t>(len + t)];
  }
  m0 /= len;
  m1 /= len;
  for (int t = 0; t < len; ++t) {
    const double a = data[static_cast<std::size_t>(t)] - m0;
    const double b = data[static_cast<std::size_t>(len + t)] - m1;
    c00 += a * a;
    c01 += a * b;
    c11 += b * b;
  }
  c00 /= len;
  c01 /= len;
  c11 /= len;
  const double tr = c00 + c11;
  const double det = c00 * c11 - c01 * c01;
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  const double l1 = tr / 2.0 + disc;
  const double l2 = tr / 2.0 - disc;

  const auto r = dsp::pca_components(data, 2, len, 2);
  CHECK(r.eigenvalues[0] == doctest::Approx(l1).epsilon(1e-9));
  CHECK(r.eigenvalues[1] == doctest::Approx(l2).epsilon(1e-9));

  // Oracle PC2 vector from the 2x2 eigenproblem: (C - l2 I) v = 0 gives
  // v ~ (c01, l2 - c00); sign fixed first-nonzero-positive.
  double v0 = c01, v1 = l2 - c00;
  const double norm = std::sqrt(v0 * v0 + v1 * v1);
  v0 /= norm;
  v1 /= norm;
  if ((std::abs(v0) > 1e-12 && v0 < 0.0) ||
      (std::abs(v0) <= 1e-12 && v1 < 0.0)) {
    v0 = -v0;
    v1 = -v1;
  }
  for (int t = 0; t < len; ++t) {
    const double expect = v0 * (data[static_cast<std::size_t>(t)] - m0) +
                          v1 * (data[static_cast<std::size_t>(len + t)] - m1);
    CHECK(r.scores[1][static_cast<std::size_t>(t)] ==
          doctest::Approx(expect).epsilon(1e-9));
  }

  // And that score is essentially the common jitter direction.
  std::vector<double> jc = jitter;
  double jm = 0;
  for (double v : jc) jm += v;
  jm /= len;
  double dot = 0, njc = 0, ns = 0;
  for (int t = 0; t < len; ++t) {
    const double j = jc[static_cast<std::size_t>(t)] - jm;
    dot += j * r.scores[1][static_cast<std::size_t>(t)];
    njc += j * j;
    ns += r.scores[1][static_cast<std::size_t>(t)] * r.scores[1][static_cast<std::size_t>(t)];
  }
  CHECK(std::abs(dot) / std::sqrt(njc * ns) > 0.9);
}

TEST_CASE("pca: degenerate input") {
  std::vector<double> data(3 * 16, 2.5);  // all constant
  CHECK_THROWS_AS(dsp::pca_components(data, 3, 16, 2), DegenerateInputError);
}

TEST_CASE("pca: score means are zero and components decorrelated") {
  // Random loadings with distinct scales over 8 features.
  const int dims = 8, len = 200;
  Rng rng(77);
  std::vector<double> s1(len), s2(len);
  for (int t = 0; t < len; ++t) {
    s1[static_cast<std::size_t>(t)] = std::sin(0.21 * t) * 3.0;
    s2[static_cast<std::size_t>(t)] = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> data(static_cast<std::size_t>(dims) * len);
  for (int i = 0; i < dims; ++i) {
    const double w1 = rng.uniform(-1.0, 1.0);
    const double w2 = rng.uniform(-1.0, 1.0);
    for (int t = 0; t < len; ++t) {
      data[static_cast<std::size_t>(i) * len + t] =
          w1 * s1[static_cast<std::size_t>(t)] + 0.3 * w2 * s2[static_cast<std::size_t>(t)] +
          0.01 * rng.gaussian();
    }
  }
  const auto r = dsp::pca_components(data, dims, len, 2);
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) {
    CHECK(r.eigenvalues[i] <= r.eigenvalues[i - 1] + 1e-12);
  }
  double mean1 = 0, mean2 = 0;
  for (int t = 0; t < len; ++t) {
    mean1 += r.scores[0][static_cast<std::size_t>(t)];
    mean2 += r.scores[1][static_cast<std::size_t>(t)];
  }
  CHECK(std::abs(mean1 / len) < 1e-9);
  CHECK(std::abs(mean2 / len) < 1e-9);

  double dot = 0, n1 = 0, n2 = 0;
  for (int t = 0; t < len; ++t) {
    dot += r.scores[0][static_cast<std::size_t>(t)] * r.scores[1][static_cast<std::size_t>(t)];
    n1 += r.scores[0][static_cast<std::size_t>(t)] * r.scores[0][static_cast<std::size_t>(t)];
    n2 += r.scores[1][static_cast<std::size_t>(t)] * r.scores[1][static_cast<std::size_t>(t)];
  }
  CHECK(std::abs(dot / std::sqrt(n1 * n2)) < 1e-8);
}

TEST_CASE("normalize: hand oracle on [1,2,3]") {
  // mean 2, population sigma sqrt(2/3)
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const auto o = dsp::zero_mean_normalize(x);
  const double sigma = std::sqrt(2.0 / 3.0);
  CHECK(o[0] == doctest::Approx(-1.0 / sigma).epsilon(1e-12));
  CHECK(o[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(o[2] == doctest::Approx(1.0 / sigma).epsilon(1e-12));
  CHECK(o[0] == doctest::Approx(-1.2247448713915890).epsilon(1e-10));
}

TEST_CASE("normalize: constant series flags, short series throws") {
  bool degenerate = false;
  const auto o = dsp::zero_mean_normalize(std::vector<double>(8, 3.0), &degenerate);
  CHECK(degenerate);
  for (double v : o) CHECK(v == 0.0);
  CHECK_THROWS_AS(dsp::zero_mean_normalize(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("normalize: output statistics and idempotence") {
  const auto x = random_series(300, 222);
  const auto o = dsp::zero_mean_normalize(x);
  double mean = 0.0;
  for (double v : o) mean += v;
  mean /= static_cast<double>(o.size());
  double var = 0.0;
  for (double v : o) var += (v - mean) * (v - mean);
  var /= static_cast<double>(o.size());
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);

  const auto oo = dsp::zero_mean_normalize(o);
  for (std::size_t i = 0; i < o.size(); ++i) {
    CHECK(std::abs(oo[i] - o[i]) < 1e-9);
  }
}

TEST_CASE("phase_difference: identities and wrapping") {
  // Two antennas, one subcarrier, three time steps.
  const int a_pairs = 2, subc = 1, len = 3;
  std::vector<std::complex<float>> data(static_cast<std::size_t>(a_pairs) * subc * len);
  auto set_phase = [&](int a, int t, double phi) {
    data[static_cast<std::size_t>(a) * len + t] =
        std::complex<float>(static_cast<float>(std::cos(phi)),
                            static_cast<float>(std::sin(phi)));
  };
  // equal phases -> 0
  set_phase(0, 0, 0.7);
  set_phase(1, 0, 0.7);
  // upper antenna at 0.3, lower at 0.1 -> 0.2
  set_phase(0, 1, 0.1);
  set_phase(1, 1, 0.3);
  // upper at pi-0.1, lower at -pi+0.1 -> 2*pi-0.2, wraps to -0.2
  set_phase(0, 2, -kPi + 0.1);
  set_phase(1, 2, kPi - 0.1);

  dsp::CsiLinkView view{{data.data(), data.size()}, a_pairs, subc, len};
  const auto out = dsp::phase_difference(view);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(out[1] == doctest::Approx(0.2).epsilon(1e-5));
  CHECK(out[2] == doctest::Approx(-0.2).epsilon(1e-5));
  for (double v : out) {
    CHECK(v > -kPi);
    CHECK(v <= kPi);
  }
}

TEST_CASE("phase_difference: single antenna is a hard error") {
  std::vector<std::complex<float>> data(4, {1.0f, 0.0f});
  dsp::CsiLinkView view{{data.data(), data.size()}, 1, 1, 4};
  CHECK_THROWS_AS(dsp::phase_difference(view), DomainError);
}

TEST_CASE("preprocess_link: constant input flags both streams; purity") {
  const int a_pairs = 3, subc = 4, len = 64;
  std::vector<std::complex<float>> data(static_cast<std::size_t>(a_pairs) * subc * len,
                                        {0.5f, 0.25f});
  dsp::CsiLinkView view{{data.data(), data.size()}, a_pairs, subc, len};
  const auto sp = dsp::preprocess_link(view, 0, 32, 0);
  CHECK(sp.degenerate_phase);
  CHECK(sp.degenerate_amplitude);
  for (double v : sp.o1) CHECK(v == 0.0);
  for (double v : sp.o2) CHECK(v == 0.0);

  // purity: same input, same output
  std::vector<std::complex<float>> noisy(data.size());
  Rng rng(31);
  for (auto& c : noisy) {
    c = std::complex<float>(static_cast<float>(rng.gaussian()),
                            static_cast<float>(rng.gaussian()));
  }
  dsp::CsiLinkView nview{{noisy.data(), noisy.size()}, a_pairs, subc, len};
  const auto sp1 = dsp::preprocess_link(nview, 16, 32, 2);
  const auto sp2 = dsp::preprocess_link(nview, 16, 32, 2);
  CHECK(sp1.x1 == sp2.x1);
  CHECK(sp1.x2 == sp2.x2);
  CHECK(sp1.o1 == sp2.o1);
  CHECK(sp1.o2 == sp2.o2);

  CHECK_THROWS_AS(dsp::preprocess_link(nview, 48, 32, 0), DomainError);
}
