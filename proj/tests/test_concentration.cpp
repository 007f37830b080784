#include <gtest/gtest.h>

#include <cmath>

#include "gibbslab/concentration.hpp"
#include "support.hpp"

using namespace gibbslab;
using gibbslab::testing::random_field;

namespace {

std::vector<double> gaussian_values(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

TEST(Entropy, ConstantHasNone) {
  std::vector<double> f(100, 3.0);
  EXPECT_NEAR(entropy_of_squares(f).value, 0.0, 1e-12);
}

TEST(Entropy, LognormalClosedForm) {
  // f^2 = e^X, X ~ N(0, s^2): Ent = (s^2/2) e^{s^2/2}
  const double s = 0.5;
  auto x = gaussian_values(200000, 51);
  std::vector<double> f;
  for (double v : x) f.push_back(std::exp(0.5 * s * v));
  Estimate e = entropy_of_squares(f);
  EXPECT_NEAR(e.value, 0.5 * s * s * std::exp(0.5 * s * s), 4 * e.stderr_);
}

TEST(GapReport, ConstantDictionaryIsEmpty) {
  Lattice l(1, 4);
  SampleEnsemble e;
  for (int i = 0; i < 50; ++i) e.fields.push_back(sample_free_field(GaussianReference::loop(l), std::uint64_t(i)));
  auto r = lsi_gap_report(e, {TestFunctional{}}, MetricSpec::l2(), GapMode::lsi, 1.0);
  EXPECT_TRUE(r.empty);
  EXPECT_FALSE(r.pass);
}

TEST(GapReport, PoincareOfLinearFunctionalOnGaussian) {
  // Var <xi, u> = E ||xi||^2 under the free field; energy / variance = |k|^2 in the l2 metric
  Lattice l(1, 4);
  SampleEnsemble e;
  GaussianReference ref = GaussianReference::loop(l);
  for (int i = 0; i < 20000; ++i) e.fields.push_back(sample_free_field(ref, std::uint64_t(i)));
  FourierField xi = mode_direction(l, {2, 0}, 1.0, false, false);
  auto r = lsi_gap_report(e, {TestFunctional::linear(xi, "x2")}, MetricSpec::h_minus(1), GapMode::poincare);
  ASSERT_EQ(r.rows.size(), 1u);
  // h_minus(1) weight 1/4 on the k = 2 gradient, variance 1/4
  EXPECT_NEAR(r.rows[0].ratio, 1.0, 4 * r.rows[0].ratio_stderr);
}

TEST(Concentration, GaussianLinearTail) {
  auto x = gaussian_values(100000, 52);
  auto c = lipschitz_concentration(x, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(c.bound_slope, -0.5);
  EXPECT_TRUE(c.pass) << c.note << " slope " << c.fit.slope;
  EXPECT_LT(c.fit.slope, 0);
}

TEST(Moments, ZeroKappaIsOne) {
  auto x = gaussian_values(1000, 53);
  EXPECT_DOUBLE_EQ(exp_square_moment(x, 0.0).moment.value, 1.0);
  // E exp(k X^2) = (1 - 2k)^{-1/2}
  auto y = gaussian_values(200000, 54);
  auto m = exp_square_moment(y, 0.1);
  EXPECT_NEAR(m.moment.value, 1.0 / std::sqrt(0.8), 4 * m.moment.stderr_);
}

TEST(Increments, ZeroField) {
  Lattice l(2, 4);
  auto s = multiplicative_increments(FourierField(l), {1, 0});
  for (auto d : s.d) EXPECT_EQ(d, cplx(0));
  EXPECT_EQ(s.total(), cplx(0));
}

TEST(Increments, SingleModeSitsInOneAnnulus) {
  // c_j conj(c_{j+m}) with a single nonzero pair lands in annulus ceil|j|
  Lattice l(2, 6);
  FourierField u(l, false, false);
  u.at(3, 0) = cplx(0, 2);
  u.at(4, 1) = cplx(1, 0);
  auto s = multiplicative_increments(u, {1, 1});
  for (std::size_t r = 0; r < s.d.size(); ++r) EXPECT_EQ(s.d[r], r == 2 ? cplx(0, 2) : cplx(0)) << r;
  EXPECT_THROW(multiplicative_increments(u, {0, 0}), std::invalid_argument);
}

TEST(Increments, TelescopeToModulusCoefficient) {
  Lattice l(2, 5);
  Rng rng = make_stream(55, 0);
  FourierField u = random_field(l, rng, false, false);
  FourierField A = modulus_sq(u, l.with_cutoff(10));
  for (std::array<int, 2> m : {std::array<int, 2>{1, 0}, {2, -3}, {-4, 4}}) {
    cplx c = modulus_sq_coefficient(u, m);
    EXPECT_NEAR(std::abs(multiplicative_increments(u, m).total() - c), 0, 1e-12);
    EXPECT_NEAR(std::abs(A.at(-m[0], -m[1]) - c), 0, 1e-12);
  }
}

TEST(DecaySampler, MembersLieInDomain) {
  Lattice l(2, 6);
  PhaseDomain d = PhaseDomain::decay(8, 4, 0.2, 0.1);
  double acc = 0;
  SampleEnsemble e = sample_decay_domain(d, l, 200, 56, &acc);
  EXPECT_EQ(e.size(), 200u);
  EXPECT_GT(acc, 0);
  for (const auto& f : e.fields) EXPECT_TRUE(d.contains(f));
}

}  // namespace
