#pragma once

#include <optional>
#include <string>

#include "gibbslab/numerics.hpp"
#include "gibbslab/spectral.hpp"

namespace gibbslab {

enum class ModelKind { nls, kdv, zakharov, gp };

// renormalized: Wick counterterm (lambda/2) kappa V(0) (N_n + B) ||u||^2 on the
// massive reference. mean_subtracted: interaction built from |u|^2 - int |u|^2
// on the massless reference.
enum class GpForm { renormalized, mean_subtracted };

struct ModelSpec {
  ModelKind kind = ModelKind::nls;
  int p = 4;
  double lambda = 0;
  int dim = 1;
  double B = 0;
  FourierField V;
  double kappa = 0;
  double rho = 1;
  GpForm form = GpForm::renormalized;
  // Adds (M/2) ||u||^2 to the energy; used to convexify the p = 6 problem.
  double mass_shift = 0;

  static ModelSpec nls(int p, double lambda, int dim = 1);
  static ModelSpec kdv(double lambda);
  static ModelSpec zakharov(double B);
  static ModelSpec gp(FourierField V, double lambda, double kappa, double rho, double B,
                      GpForm form = GpForm::renormalized);

  void validate() const;
  bool real_field() const { return kind == ModelKind::kdv; }
  std::string name() const;
};

ModelKind parse_model_kind(const std::string& s);

// u on a lattice of cutoff n; n and v = dn/dt on the doubled lattice so that
// |u|^2 is represented exactly.
struct ZakharovState {
  FourierField u;
  FourierField n;
  FourierField v;
};

// (u, n_tilde, W) with n_tilde = (n + |u|^2)/sqrt2 and W' = V/sqrt2, V' = v.
struct ZakharovCanonical {
  FourierField u;
  FourierField n_tilde;
  FourierField W;
};

ZakharovCanonical to_canonical(const ZakharovState& s);
ZakharovState from_canonical(const ZakharovCanonical& c);

// N_n = sum_{|k_1|,|k_2| <= n} 2/(|k|^2 + rho)
double number_operator(int n, double rho);

// Even part of the potential: coefficient Re V(m), looked up by wavevector.
double potential_even(const FourierField& V, std::array<int, 2> m);
double sup_abs_potential(const FourierField& V);

// cos theta_1 + cos theta_2 (mean zero).
FourierField cosine_potential(const Lattice& lat);
// Periodized Gaussian bump h exp(-|theta|^2 / 2r^2); V(m) = h r^2/(2 pi) exp(-r^2 |m|^2 / 2).
FourierField soft_sphere_potential(const Lattice& lat, double height, double width);

double energy(const ModelSpec& model, const FourierField& u);
double energy(const ModelSpec& model, const ZakharovState& s);
double zakharov_energy_canonical(const ZakharovCanonical& c);
// The interaction part entering the Gibbs density exp(Phi) times the reference.
double gibbs_potential(const ModelSpec& model, const FourierField& u);

// Riesz representer G of dH in the real L^2 pairing: dH(u)[v] = inner(G, v).
FourierField gradient(const ModelSpec& model, const FourierField& u);
ZakharovState gradient(const ModelSpec& model, const ZakharovState& s);

struct HessianProbe {
  double value = 0;
  double kinetic = 0;
  double interaction = 0;
};

HessianProbe hessian_quadratic_form(const ModelSpec& model, const FourierField& u,
                                    const FourierField& v);
HessianProbe hessian_quadratic_form(const ModelSpec& model, const ZakharovState& s,
                                    const ZakharovState& d);

struct IdentitySides {
  double lhs = 0;
  double rhs = 0;
};
IdentitySides nls_convexity_identity(const FourierField& f, const FourierField& g,
                                     const FourierField& p, const FourierField& q, double t);

struct MarginResult {
  double gap = 0;    // tH(u) + (1-t)H(v) - H(tu + (1-t)v)
  double bound = 0;  // predicted lower bound
  double margin = 0;
  bool in_regime = true;
};
// N is the mass radius of the phase domain the pair lives in.
MarginResult convexity_margin(const ModelSpec& model, const FourierField& u, const FourierField& v,
                              double t, double N);

// Closed-form LSI constant, or nullopt when the hypothesis fails.
std::optional<double> lsi_constant_predicted(const ModelSpec& model, double N);

// M making H + (M/2)||u||^2 uniformly convex on the mass/Sobolev ball.
double critical_mass_shift(double N0, double kappa, double s);

struct BlockProbeReport {
  double min_ratio = 0;
  double kinetic_floor = 0;  // min |k|^2 over the block
  double scaling = 0;        // (D/4) |Delta(J)|^{2/D}
  std::size_t block_size = 0;
  int trials = 0;
};
BlockProbeReport block_convexity_probe(std::array<int, 2> J, const ModelSpec& model, double N,
                                       int trials, const Lattice& lattice, std::uint64_t seed);

}  // namespace gibbslab
