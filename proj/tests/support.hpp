#pragma once

#include <cmath>
#include <random>

#include "gibbslab/gibbs.hpp"
#include "gibbslab/spectral.hpp"

namespace gibbslab::testing {

// Coefficients ~ CN(0, 1) / (1 + |k|^2)^{decay/2}, on the requested class.
inline FourierField random_field(const Lattice& lat, Rng& rng, bool real = false, bool zero_mode = true,
                                 double decay = 1.0) {
  std::normal_distribution<double> g;
  FourierField u(lat, real, zero_mode);
  for (std::size_t i = 0; i < u.c.size(); ++i)
    u.c[i] = cplx(g(rng), g(rng)) * std::pow(1.0 + lat.k_sq(i), -0.5 * decay);
  u.enforce();
  return u;
}

// Rescales u to a uniformly drawn mass in (0, N].
inline void into_ball(FourierField& u, double N, Rng& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double target = N * (1.0 - U(rng));
  u *= std::sqrt(target / u.norm_sq());
}

}  // namespace gibbslab::testing
