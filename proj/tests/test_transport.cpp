#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gibbslab/transport.hpp"

using namespace gibbslab;

namespace {

std::vector<std::vector<double>> cloud(std::size_t n, int dim, std::uint64_t seed, double shift = 0) {
  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> p(n, std::vector<double>(dim));
  for (auto& x : p)
    for (auto& v : x) v = g(rng) + shift;
  return p;
}

double sq(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

TEST(Exact, FourPointsAgainstPermutations) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = cloud(4, 2, seed), y = cloud(4, 2, seed + 100);
    std::vector<int> perm = {0, 1, 2, 3};
    double best = 1e300;
    do {
      double c = 0;
      for (int i = 0; i < 4; ++i) c += sq(x[i], y[perm[i]]) / 4;
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto r = wasserstein_exact(EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y), CostSpec{});
    EXPECT_NEAR(r.plan.objective, best, 1e-12);
    EXPECT_NEAR(r.value, std::sqrt(best), 1e-12);
  }
}

TEST(Exact, DiracMasses) {
  auto a = EmpiricalMeasure::uniform({{0.0, 0.0}});
  auto b = EmpiricalMeasure::uniform({{3.0, 4.0}});
  EXPECT_NEAR(wasserstein_exact(a, b, CostSpec{}).value, 5.0, 1e-14);
  CostSpec w1;
  w1.order = 1;
  EXPECT_NEAR(wasserstein_exact(a, b, w1).value, 5.0, 1e-14);
}

TEST(Exact, MetricProperties) {
  auto a = EmpiricalMeasure::uniform(cloud(12, 3, 7));
  auto b = EmpiricalMeasure::uniform(cloud(12, 3, 8, 0.5));
  auto c = EmpiricalMeasure::uniform(cloud(12, 3, 9, -0.3));
  CostSpec w;
  EXPECT_NEAR(wasserstein_exact(a, a, w).value, 0.0, 1e-12);
  double ab = wasserstein_exact(a, b, w).value, ba = wasserstein_exact(b, a, w).value;
  EXPECT_NEAR(ab, ba, 1e-12);
  EXPECT_LE(ab, wasserstein_exact(a, c, w).value + wasserstein_exact(c, b, w).value + 1e-12);
}

TEST(Exact, UnequalWeightsConserveMass) {
  EmpiricalMeasure a = EmpiricalMeasure::uniform(cloud(5, 1, 10));
  EmpiricalMeasure b = EmpiricalMeasure::uniform(cloud(3, 1, 11));
  auto r = wasserstein_exact(a, b, CostSpec{});
  EXPECT_LT(r.plan.row_residual, 1e-12);
  EXPECT_LT(r.plan.col_residual, 1e-12);
}

TEST(Sinkhorn, ApproachesExactAsEpsShrinks) {
  auto a = EmpiricalMeasure::uniform(cloud(30, 2, 12));
  auto b = EmpiricalMeasure::uniform(cloud(30, 2, 13, 0.7));
  double exact = wasserstein_exact(a, b, CostSpec{}).plan.objective;
  double prev = 1e300;
  for (double eps : {1e-1, 3e-2, 1e-2}) {
    SinkhornOptions o;
    o.eps = eps;
    o.tol = 1e-6;
    o.max_iter = 100000;
    auto s = sinkhorn(a, b, CostSpec{}, o);
    ASSERT_TRUE(s.converged) << s.note;
    double primal = s.plan.objective;
    EXPECT_GE(primal, exact - 1e-9);  // any feasible plan costs at least the optimum
    EXPECT_LE(primal - exact, prev + 1e-12);
    prev = primal - exact;
  }
  EXPECT_LT(prev, 5e-2 * exact);
}

TEST(Sinkhorn, DivergenceVanishesOnEqualMeasures) {
  auto a = EmpiricalMeasure::uniform(cloud(20, 2, 14));
  EXPECT_NEAR(sinkhorn_divergence(a, a, CostSpec{}).divergence, 0.0, 1e-10);
}

TEST(Tails, ClosedForms) {
  EXPECT_NEAR(gaussian_tail_bound(2, 0.5), 8 * std::numbers::pi, 1e-12);
  double direct = 0;
  for (int j = 11; j <= 2000000; ++j) direct += 4.0 / (double(j) * j);
  direct += 4.0 / 2000000.5;
  EXPECT_NEAR(loop_tail_sum(10), direct, 1e-10);
}

TEST(Tails, LatticeSumBelowBound) {
  EXPECT_LE(lattice_tail_sum(4, 0.25), gaussian_tail_bound(4, 0.25));
  double prev = 1e300;
  for (int n : {4, 8, 16, 32}) {
    double b = gaussian_tail_bound(n, 0.25);
    EXPECT_LT(b, prev);
    EXPECT_LE(lattice_tail_sum(n, 0.25), b);
    prev = b;
  }
}

TEST(Coupling, ProjectionMatchesTailVariance) {
  // E ||u - P_n u||^2 = sum_{n < |j| <= L} 2/j^2 for the loop on cutoff L
  Lattice l(1, 64);
  GaussianReference ref = GaussianReference::loop(l);
  SampleEnsemble e;
  for (int i = 0; i < 4000; ++i) e.fields.push_back(sample_free_field(ref, std::uint64_t(i)));
  double prev = 1e300;
  for (int n : {2, 4, 8, 16}) {
    auto c = truncation_coupling_bound(e, n);
    EXPECT_NEAR(c.value, loop_tail_sum(n) - loop_tail_sum(64), 4 * c.stderr_);
    EXPECT_LT(c.value, prev);
    prev = c.value;
  }
  EXPECT_TRUE(truncation_coupling_bound(e, 64).degenerate);
}

TEST(RelativeEntropyTest, VanishesWithoutInteractionOrTruncation) {
  Lattice l(1, 8);
  GaussianReference ref = GaussianReference::loop(l);
  std::vector<FourierField> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(sample_free_field(ref, std::uint64_t(i)));
  EXPECT_NEAR(relative_entropy_truncation(ModelSpec::nls(4, 0.0), 2, xs).value, 0.0, 1e-12);
  EXPECT_NEAR(relative_entropy_truncation(ModelSpec::nls(4, 0.1), 8, xs).value, 0.0, 1e-12);
  EXPECT_GT(relative_entropy_truncation(ModelSpec::nls(4, 0.1), 2, xs).value, 0.0);
}

TEST(TransportInequality, GaussianShiftCalibration) {
  // tilt by e^{a x - a^2/2}: W2^2 = a^2 and Ent = a^2/2, so alpha = 1 is sharp
  const double a = 0.5;
  auto pts = cloud(200, 1, 15);
  std::vector<double> tilt;
  for (const auto& p : pts) tilt.push_back(a * p[0] - 0.5 * a * a);
  auto r = transport_inequality_check(EmpiricalMeasure::uniform(pts), tilt, 1.0, CostSpec{});
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.conclusive);
  EXPECT_NEAR(r.entropy, 0.5 * a * a, 0.05);
  // in 1D the optimal plan is the monotone rearrangement
  std::vector<std::pair<double, double>> atoms;  // (x, tilted weight)
  double B = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) B += std::exp(tilt[i]);
  for (std::size_t i = 0; i < pts.size(); ++i) atoms.push_back({pts[i][0], std::exp(tilt[i]) / B});
  std::sort(atoms.begin(), atoms.end());
  double w2 = 0, cw = 0, cv = 0;
  std::size_t i = 0, j = 0;
  const double v = 1.0 / double(pts.size());
  while (i < atoms.size() && j < atoms.size()) {
    double take = std::min(cw + atoms[i].second, cv + v) - std::max(cw, cv);
    w2 += take * (atoms[i].first - atoms[j].first) * (atoms[i].first - atoms[j].first);
    double ew = cw + atoms[i].second, ev = cv + v;
    if (ew <= ev) {
      cw = ew;
      ++i;
    } else {
      cv = ev;
      ++j;
    }
  }
  EXPECT_NEAR(r.w2_sq, w2, 1e-9);
}

TEST(Measures, FieldEmbeddingPadsCoarseFields) {
  Lattice small(1, 2), big(1, 4);
  FourierField u(small);
  u.at(1) = cplx(1, 2);
  auto m = EmpiricalMeasure::from_fields({u}, big);
  ASSERT_EQ(m.points[0].size(), 2 * big.size());
  double s = 0;
  for (double v : m.points[0]) s += v * v;
  EXPECT_DOUBLE_EQ(s, 5.0);
}

}  // namespace
