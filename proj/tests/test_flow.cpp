#include <gtest/gtest.h>

#include <cmath>

#include "gibbslab/flow.hpp"
#include "support.hpp"

using namespace gibbslab;
using gibbslab::testing::random_field;

namespace {

double dist(const FourierField& a, const FourierField& b) { return std::sqrt((a - b).norm_sq()); }

TEST(LinearFlow, SingleModeRotates) {
  Lattice l(1, 8);
  FourierField u(l);
  u.at(1) = 1;
  const double dt = 0.01;
  flow_step(ModelSpec::nls(4, 0.0), u, dt);
  EXPECT_NEAR(std::abs(u.at(1) - std::exp(cplx(0, -dt))), 0, 1e-15);
  for (int k = -8; k <= 8; ++k)
    if (k != 1) EXPECT_EQ(u.at(k), cplx(0));
}

TEST(LinearFlow, ConservesEnergyToRoundoff) {
  Lattice l(1, 16);
  Rng rng = make_stream(31, 0);
  FourierField u = random_field(l, rng);
  FlowConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1;
  Trajectory tr = evolve(ModelSpec::nls(4, 0.0), u, cfg);
  EXPECT_LT(tr.energy_drift(), 1e-12);
  EXPECT_LT(tr.mass_drift(), 1e-12);
}

TEST(NlsFlow, PlaneWaveIsExact) {
  // u = a e^{ik theta} evolves as exp(-i (k^2 - lambda |a|^2) t) u
  Lattice l(1, 8);
  const double lambda = 1.5, T = 0.5;
  const cplx a(0.6, 0.3);
  FourierField u(l);
  u.at(2) = a;
  FlowConfig cfg;
  cfg.dt = 0.05;
  cfg.T = T;
  FourierField v = advance(ModelSpec::nls(4, lambda), u, cfg);
  cplx want = a * std::exp(cplx(0, -(4.0 - lambda * std::norm(a)) * T));
  EXPECT_NEAR(std::abs(v.at(2) - want), 0, 1e-12);
}

TEST(NlsFlow, MassExactEnergySecondOrder) {
  Lattice l(1, 16);
  Rng rng = make_stream(32, 0);
  FourierField u = random_field(l, rng, false, true, 4.0);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.5;
  cfg.stride = 50;
  ModelSpec m = ModelSpec::nls(4, 1.0);
  Trajectory tr = evolve(m, u, cfg);
  EXPECT_LT(tr.mass_drift(), 1e-12);
  EXPECT_LT(tr.energy_drift(), 1e-5);
  EXPECT_NEAR(richardson_order(m, u, cfg).order, 2.0, 0.2);
}

TEST(NlsFlow, MidpointOnMeanZeroFields) {
  Lattice l(1, 12);
  Rng rng = make_stream(33, 0);
  FourierField u = random_field(l, rng, false, false, 4.0);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.2;
  FourierField v = advance(ModelSpec::nls(4, 1.0), u, cfg);
  EXPECT_EQ(v.at(0), cplx(0));
  EXPECT_NEAR(v.norm_sq(), u.norm_sq(), 1e-10 * u.norm_sq());
}

TEST(KdvFlow, StaysRealAndConservesMass) {
  Lattice l(1, 12);
  Rng rng = make_stream(34, 0);
  FourierField u = random_field(l, rng, true, false, 6.0);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.2;
  cfg.stride = 20;
  Trajectory tr = evolve(ModelSpec::kdv(1.0), u, cfg);
  EXPECT_TRUE(tr.states.back().hermitian(1e-12));
  EXPECT_LT(tr.mass_drift(), 1e-8);
  EXPECT_LT(tr.energy_drift(), 1e-4);
}

TEST(FlowConfig, RejectsBadSteps) {
  FlowConfig c;
  c.dt = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.dt = 0.1;
  c.T = 0.05;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Duhamel, TrivialInputsGiveZero) {
  Lattice l(2, 4);
  Rng rng = make_stream(35, 0);
  FourierField V = cosine_potential(l);
  FourierField phi = random_field(l, rng);
  DuhamelOptions opt;
  opt.panels = 2;
  EXPECT_EQ(duhamel_phi_at(FourierField(l), V, 1.0, 0.3, opt).norm_sq(), 0.0);
  EXPECT_EQ(duhamel_phi_at(phi, FourierField(l, true), 1.0, 0.3, opt).norm_sq(), 0.0);
}

TEST(Duhamel, SingleModeHasConstantModulus) {
  // |e^{ik theta}|^2 = 1 and V(0) = 0 give a vanishing forcing term
  Lattice l(2, 4);
  FourierField V = cosine_potential(l);
  FourierField phi(l);
  phi.at(1, -2) = cplx(0.4, 0.2);
  DuhamelOptions opt;
  opt.panels = 2;
  EXPECT_LT(std::sqrt(duhamel_phi_at(phi, V, 1.0, 0.5, opt).norm_sq()), 1e-14);
  DuhamelResult r = gp_fixed_point(phi, V, 1.0, 0.5, opt);
  EXPECT_LT(std::sqrt(r.w.norm_sq()), 1e-14);
  FourierField free = phi;
  free.at(1, -2) *= std::exp(cplx(0, -5 * 0.5));
  EXPECT_LT(dist(r.u, free), 1e-13);
}

}  // namespace
