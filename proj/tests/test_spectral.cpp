#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gibbslab/spectral.hpp"
#include "support.hpp"

using namespace gibbslab;
using gibbslab::testing::random_field;

namespace {

constexpr double pi = std::numbers::pi;

TEST(Lattice, IndexRoundTripAndMirror) {
  Lattice l(2, 3);
  EXPECT_EQ(l.size(), 49u);
  EXPECT_EQ(l.wavevector(l.origin()), (std::array<int, 2>{0, 0}));
  for (std::size_t i = 0; i < l.size(); ++i) {
    auto k = l.wavevector(i);
    EXPECT_EQ(l.index(k[0], k[1]), i);
    auto m = l.wavevector(l.mirror(i));
    EXPECT_EQ(m[0], -k[0]);
    EXPECT_EQ(m[1], -k[1]);
  }
  EXPECT_FALSE(l.contains(4, 0));
}

TEST(Lattice, GridSideIsFftFriendly) {
  for (int m : {1, 7, 11, 13, 97, 193, 389}) {
    int f = fft_friendly(m);
    EXPECT_GE(f, m);
    int r = f;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    EXPECT_EQ(r, 1) << m;
  }
}

TEST(Transform, SingleModeGridValues) {
  Lattice l(1, 4, 2);
  FourierField u(l);
  u.at(1) = 1;
  GridBuffer g = to_grid(u);
  for (int m = 0; m < g.side; ++m) {
    cplx want = std::exp(cplx(0, 2 * pi * m / g.side));
    EXPECT_NEAR(std::abs(g.values[m] - want), 0, 1e-14);
  }
  FourierField back = to_coeffs(g, l);
  for (std::size_t i = 0; i < l.size(); ++i)
    EXPECT_NEAR(std::abs(back.c[i] - (i == l.index(1) ? cplx(1) : cplx(0))), 0, 1e-14);
}

TEST(Transform, ZeroFieldStaysZero) {
  Lattice l(2, 3);
  FourierField u(l);
  for (auto z : to_grid(u).values) EXPECT_EQ(z, cplx(0));
  for (auto z : to_coeffs(to_grid(u), l).c) EXPECT_EQ(z, cplx(0));
}

TEST(Transform, MatchesDirectSummation) {
  Lattice l(1, 4, 2);
  Rng rng = make_stream(1, 0);
  FourierField u = random_field(l, rng);
  GridBuffer g = to_grid(u);
  for (int m = 0; m < g.side; ++m) {
    cplx s = 0;
    for (int k = -4; k <= 4; ++k) s += u.at(k) * std::exp(cplx(0, 2 * pi * k * m / g.side));
    EXPECT_NEAR(std::abs(g.values[m] - s), 0, 1e-13);
  }
}

TEST(Transform, RoundTripRandomField) {
  Lattice l(1, 8, 2);
  Rng rng = make_stream(2, 0);
  FourierField u = random_field(l, rng);
  FourierField v = to_coeffs(to_grid(u), l);
  double worst = 0;
  for (std::size_t i = 0; i < l.size(); ++i) worst = std::max(worst, std::abs(u.c[i] - v.c[i]));
  EXPECT_LT(worst, 1e-12);
}

TEST(Projection, DirichletKeepsLowModes) {
  Lattice l(1, 5);
  FourierField u(l);
  u.at(1) = 1;
  u.at(3) = 1;
  FourierField p = project(u, ProjectionSpec::dirichlet(2));
  EXPECT_EQ(p.at(1), cplx(1));
  EXPECT_EQ(p.at(3), cplx(0));
}

TEST(Projection, DyadicBlock) {
  Lattice l(1, 10);
  FourierField u(l);
  for (auto& c : u.c) c = 1;
  FourierField p = project(u, ProjectionSpec::dyadic({2, 0}));
  for (int k = -10; k <= 10; ++k) EXPECT_EQ(p.at(k), (k == 2 || k == 3) ? cplx(1) : cplx(0)) << k;
  EXPECT_EQ(dyadic_block_size(3), 4u);
}

TEST(Projection, PoussinKernelReproducesBlock) {
  Lattice l(1, 20);
  Rng rng = make_stream(3, 0);
  FourierField u = random_field(l, rng);
  FourierField pj = project(u, ProjectionSpec::dyadic({3, 0}));
  FourierField kp = project(pj, ProjectionSpec::poussin({3, 0}));
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(std::abs(kp.c[i] - pj.c[i]), 0, 1e-15);
}

TEST(Sobolev, SingleModeNorms) {
  Lattice l(1, 4);
  FourierField u(l);
  u.at(1) = 1;
  EXPECT_DOUBLE_EQ(sobolev_norm(u, 1), 1.0);
  FourierField v(l);
  v.at(2) = 1;
  EXPECT_DOUBLE_EQ(sobolev_norm(v, -1), 0.5);
}

TEST(Sobolev, LoopNormMatchesVarianceSum) {
  // E ||u||_{H^-s}^2 = sum_{j != 0} 2 / |j|^{2 + 2s} for the loop
  const double s = 0.4;
  Lattice l(1, 64);
  double expect = 0;
  for (int j = 1; j <= 64; ++j) expect += 2 * 2.0 / std::pow(j, 2 + 2 * s);
  std::vector<double> x;
  Rng rng = make_stream(4, 0);
  std::normal_distribution<double> g;
  for (int t = 0; t < 4000; ++t) {
    FourierField u(l, false, false);
    for (int j = -64; j <= 64; ++j)
      if (j) u.at(j) = cplx(g(rng), g(rng)) / double(std::abs(j));
    x.push_back(std::pow(sobolev_norm(u, -s), 2));
  }
  Estimate e = mean_estimate(x);
  EXPECT_NEAR(e.value, expect, 3 * e.stderr_);
}

TEST(LpIntegral, ClosedForms) {
  Lattice l(1, 4);
  FourierField u(l);
  u.at(1) = 1;
  EXPECT_NEAR(lp_integral(u, 4), 1.0, 1e-14);
  FourierField c(l, true);
  c.at(1) = c.at(-1) = 1;  // 2 cos
  EXPECT_NEAR(lp_integral(c, 4), 6.0, 1e-13);
  EXPECT_NEAR(real_power_integral(c, 3), 0.0, 1e-13);
  EXPECT_EQ(lp_integral(FourierField(l), 6), 0.0);
}

TEST(Convolution, CoefficientProducts) {
  Lattice l(1, 3);
  FourierField f(l), g(l);
  f.at(1) = 2;
  g.at(1) = 3;
  EXPECT_EQ(convolve(f, g).at(1), cplx(6));
  FourierField one(l);
  for (auto& c : one.c) c = 1;
  Rng rng = make_stream(5, 0);
  FourierField r = random_field(l, rng);
  FourierField rc = convolve(r, one);
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(rc.c[i], r.c[i]);
}

TEST(Convolution, UnitModulusAgainstMeanZeroPotential) {
  Lattice l(1, 4);
  FourierField u(l);
  u.at(1) = 1;
  FourierField A = modulus_sq(u, l);
  FourierField V(l, true);
  V.at(2) = V.at(-2) = 0.5;  // cos 2 theta
  FourierField r = convolve(A, V);
  for (auto z : r.c) EXPECT_NEAR(std::abs(z), 0, 1e-14);
}

TEST(ModulusSq, MatchesDirectConvolution) {
  Lattice l(2, 3);
  Rng rng = make_stream(6, 0);
  FourierField u = random_field(l, rng);
  Lattice wide = l.with_cutoff(6);
  FourierField A = modulus_sq(u, wide);
  for (int m1 = -6; m1 <= 6; ++m1)
    for (int m2 = -6; m2 <= 6; ++m2) {
      cplx s = 0;
      for (std::size_t i = 0; i < l.size(); ++i) {
        auto j = l.wavevector(i);
        if (l.contains(j[0] - m1, j[1] - m2)) s += u.c[i] * std::conj(u.at(j[0] - m1, j[1] - m2));
      }
      EXPECT_NEAR(std::abs(A.at(m1, m2) - s), 0, 1e-12);
    }
}

TEST(Resample, PadAndTruncate) {
  Lattice l(1, 4);
  Rng rng = make_stream(7, 0);
  FourierField u = random_field(l, rng);
  FourierField up = resample(u, l.with_cutoff(8));
  EXPECT_NEAR(up.norm_sq(), u.norm_sq(), 1e-13);
  FourierField down = resample(up, l);
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(down.c[i], u.c[i]);
}

TEST(Field, InnerIsRealPairing) {
  Lattice l(1, 4);
  FourierField a(l), b(l);
  a.at(1) = cplx(1, 2);
  b.at(1) = cplx(3, -1);
  EXPECT_DOUBLE_EQ(inner(a, b), 1.0);  // Re((1-2i)(3-i)) = 3 - 2
  EXPECT_DOUBLE_EQ(inner(a, a), a.norm_sq());
}

TEST(Field, EnforceRestoresClass) {
  Lattice l(1, 3);
  FourierField u(l, true, false);
  u.at(2) = cplx(1, 1);
  u.at(0) = 5;
  u.enforce();
  EXPECT_EQ(u.at(2), cplx(0.5, 0.5));  // Hermitian part
  EXPECT_EQ(u.at(-2), cplx(0.5, -0.5));
  EXPECT_EQ(u.at(0), cplx(0));
  EXPECT_TRUE(u.hermitian(0));
}

}  // namespace
