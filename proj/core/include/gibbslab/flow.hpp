#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/functional.hpp"
#include "gibbslab/gibbs.hpp"
#include "gibbslab/hamiltonians.hpp"

namespace gibbslab {

enum class Scheme { strang, lie };

// rotation: closed-form phase rotation on the (2n+1)^D collocation grid, an
// exact isometry. midpoint: implicit midpoint on the dealiased projected
// vector field (mass exact, energy O(dt^2)). automatic picks rotation when
// the field carries its zero mode and midpoint otherwise, since rotating a
// mean-zero field creates a mean.
enum class NonlinearStep { automatic, rotation, midpoint };

struct FlowConfig {
  double dt = 1e-3;
  double T = 1;
  Scheme scheme = Scheme::strang;
  NonlinearStep nonlinear = NonlinearStep::automatic;
  int stride = 1;

  int steps() const;
  void validate() const;
};

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FourierField> states;
  std::vector<ZakharovState> zakharov_states;
  std::vector<double> mass;
  std::vector<double> energy;

  double mass_drift() const;    // max relative deviation from the initial value
  double energy_drift() const;  // same, relative to max(|H_0|, 1)
};

void flow_step(const ModelSpec& model, FourierField& u, double dt, const FlowConfig& cfg = {});
void flow_step(const ModelSpec& model, ZakharovState& s, double dt, const FlowConfig& cfg = {});

Trajectory evolve(const ModelSpec& model, const FourierField& u0, const FlowConfig& cfg);
Trajectory evolve(const ModelSpec& model, const ZakharovState& s0, const FlowConfig& cfg);

// Final state only, no diagnostics.
FourierField advance(const ModelSpec& model, FourierField u, const FlowConfig& cfg);
ZakharovState advance(const ModelSpec& model, ZakharovState s, const FlowConfig& cfg);

// log2 of successive self-convergence error ratios at dt, dt/2, dt/4.
struct OrderEstimate {
  double order = 0;
  double err_coarse = 0;
  double err_fine = 0;
};
OrderEstimate richardson_order(const ModelSpec& model, const FourierField& u0, const FlowConfig& cfg);
OrderEstimate richardson_order(const ModelSpec& model, const ZakharovState& s0, const FlowConfig& cfg);

struct InvarianceRow {
  std::string label;
  Estimate before;
  Estimate after;
  double z = 0;  // |after - before| / combined stderr
  bool pass = true;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;
  double max_energy_drift = 0;
  double energy_tolerance = 1e-6;
  bool energy_ok = true;
  bool pass = true;
  std::size_t members = 0;
};

InvarianceReport invariance_test(const ModelSpec& model, const SampleEnsemble& ensemble,
                                 const FlowConfig& cfg, const std::vector<TestFunctional>& functionals,
                                 double energy_tolerance = 1e-6);

// Solutions of the truncated GP equation with V(0) = 0 in mild form,
// u(t) = e^{it Lap} phi + w(t), w = Phi(u0 + w), with
// Phi(u)(t) = i lambda int_0^t e^{i(t-tau) Lap} P[(V * |u|^2) u](tau) dtau.
struct DuhamelOptions {
  int panels = 16;
  int nodes = 8;  // Gauss-Legendre points per panel
  int max_iter = 200;
  double tol = 1e-12;
  int lipschitz_pairs = 8;
  std::uint64_t seed = 1;
};

// w sampled at the quadrature nodes of a panelled [0, T].
struct TimeSeriesField {
  std::vector<double> t;
  std::vector<FourierField> w;
};

TimeSeriesField duhamel_phi(const FourierField& phi, const FourierField& V, double lambda, double T,
                            const DuhamelOptions& opt, const TimeSeriesField* w = nullptr);
// Phi(e^{it Lap} phi) at time t.
FourierField duhamel_phi_at(const FourierField& phi, const FourierField& V, double lambda, double t,
                            const DuhamelOptions& opt);

struct DuhamelResult {
  FourierField w;          // w(T)
  FourierField u;          // e^{iT Lap} phi + w(T)
  TimeSeriesField series;
  std::vector<double> residuals;  // sup_t ||w_{k+1} - w_k||_{L^2}
  double contraction = 0;         // sampled Lipschitz quotient of w -> Phi(u0 + w)
  double residual_ratio = 0;      // geometric mean of successive residual ratios
  double horizon = 0;             // largest tested horizon with contraction < 1/2
  double phi0_norm = 0;           // sup_t ||Phi(u0)||
  double w_norm = 0;              // sup_t ||w||
  bool converged = false;
  std::string note;
};

DuhamelResult gp_fixed_point(const FourierField& phi, const FourierField& V, double lambda, double T,
                             const DuhamelOptions& opt = {});

}  // namespace gibbslab
