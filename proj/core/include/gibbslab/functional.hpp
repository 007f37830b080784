#pragma once

#include <string>
#include <vector>

#include "gibbslab/spectral.hpp"

namespace gibbslab {

// Cylindrical test functionals with closed-form gradients. x_i = inner(xi_i, u)
// is the real L^2 pairing; z = sum conj(xi_k) u_k the complex one.
struct TestFunctional {
  enum class Kind {
    linear,       // x
    modulus,      // |z|
    composed,     // sigma(scale * sum_i x_i)
    exponential,  // exp(scale * x / 2)
    norm,         // ||u||
    mass,         // ||u||^2
    quartic,      // mean |u|^4
  };
  enum class Sigma { tanh, cos };

  Kind kind = Kind::linear;
  std::vector<FourierField> xi;
  Sigma sigma = Sigma::tanh;
  double scale = 1;
  std::string label;

  static TestFunctional linear(FourierField xi, std::string label = {});
  static TestFunctional modulus(FourierField xi, std::string label = {});
  static TestFunctional composed(std::vector<FourierField> xis, Sigma sigma, double scale,
                                 std::string label = {});
  static TestFunctional exponential(FourierField xi, double scale, std::string label = {});
  static TestFunctional norm();
  static TestFunctional mass();
  static TestFunctional quartic();

  double value(const FourierField& u) const;
  // Riesz representer, restricted to the tangent space of u's field class.
  FourierField gradient(const FourierField& u) const;
  // A functional without directions is the constant `scale`.
  bool constant() const { return kind != Kind::norm && kind != Kind::mass && kind != Kind::quartic && xi.empty(); }
};

// Unit direction e_k (times `phase`) on the lattice, made Hermitian for real fields.
FourierField mode_direction(const Lattice& lat, std::array<int, 2> k, cplx phase, bool real,
                            bool zero_mode);

// Linear, modulus and exponential functionals on modes 0 < |k| <= kmax, a few
// tanh compositions over pairs of modes, and the L^2 norm.
std::vector<TestFunctional> default_dictionary(const Lattice& lat, bool real, bool zero_mode,
                                               int kmax = 4);

// Dual Sobolev metric: |g|^2 = sum_k w_k |g_k|^2 over the full lattice with
// w_k = |k|^{-2 s_dual} and w_0 = zero_weight.
struct MetricSpec {
  double s_dual = 1;
  double zero_weight = 1;

  static MetricSpec l2() { return {0, 1}; }
  static MetricSpec h_minus(double s) { return {s, 1}; }

  double weight(double k_sq) const;
  double norm_sq(const FourierField& g) const;
};

// Projects a coefficient vector onto the tangent space of `like`: Hermitian
// part for real fields, zero mode removed when absent.
void restrict_to_class(FourierField& g, const FourierField& like);

}  // namespace gibbslab
