#pragma once

#include <string>
#include <vector>

#include "gibbslab/gibbs.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

// Points are real coordinate vectors; fields embed as (Re c_k, Im c_k) per
// lattice mode, with the squared wavevector kept so a dual Sobolev ground
// metric can be applied.
struct EmpiricalMeasure {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  std::vector<double> k_sq;  // per coordinate; empty for plain point clouds

  static EmpiricalMeasure uniform(std::vector<std::vector<double>> points);
  // Fields resampled onto `common` (zero padding for coarser truncations).
  static EmpiricalMeasure from_fields(const std::vector<FourierField>& fields, const Lattice& common);

  std::size_t size() const { return points.size(); }
  void validate() const;
};

struct CostSpec {
  enum class Ground { l2, h_minus };
  double order = 2;
  Ground ground = Ground::l2;
  double s = 0;

  double distance(const EmpiricalMeasure& a, std::size_t i, const EmpiricalMeasure& b, std::size_t j) const;
  double cost(const EmpiricalMeasure& a, std::size_t i, const EmpiricalMeasure& b, std::size_t j) const;
};

struct TransportPlan {
  std::vector<double> pi;  // row major, rows x cols
  std::size_t rows = 0;
  std::size_t cols = 0;
  double objective = 0;  // sum pi_ij cost_ij
  double row_residual = 0;
  double col_residual = 0;
};

struct TransportResult {
  double value = 0;  // W_s = objective^{1/s}
  TransportPlan plan;
};

constexpr std::size_t kExactTransportLimit = 256;

// Exact optimum by successive shortest paths on the bipartite network.
TransportResult wasserstein_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost);
TransportResult transport_exact(const std::vector<double>& C, const std::vector<double>& a,
                                const std::vector<double>& b, double order);

struct SinkhornOptions {
  double eps = 1e-3;  // final regularization, relative to the mean cost
  int max_iter = 20000;
  double tol = 1e-8;
  double scaling = 0.5;
};

struct SinkhornResult {
  double value = 0;        // (primal transport cost)^{1/s}
  double entropic = 0;     // regularized objective at the final eps
  double eps = 0;          // absolute final eps
  TransportPlan plan;
  int iterations = 0;
  bool converged = false;
  std::string note;
};

SinkhornResult sinkhorn(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost,
                        const SinkhornOptions& opt = {});
SinkhornResult sinkhorn(const std::vector<double>& C, const std::vector<double>& a,
                        const std::vector<double>& b, double order, const SinkhornOptions& opt = {});

// S_eps(mu, nu) = OT_eps(mu, nu) - (OT_eps(mu, mu) + OT_eps(nu, nu))/2 at a
// common absolute eps; approximates W_s^s.
struct DebiasedResult {
  double divergence = 0;
  double raw = 0;
  double eps = 0;
  bool converged = false;
};
DebiasedResult sinkhorn_divergence(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                   const CostSpec& cost, const SinkhornOptions& opt = {});

enum class ConditionalExpectation { projection, nearest_neighbour };

struct CouplingBound {
  double value = 0;
  double stderr_ = 0;
  ConditionalExpectation estimator = ConditionalExpectation::projection;
  int neighbours = 0;
  bool degenerate = false;
};

// Mean of ||x - E(x | F_n)||^2 over the ensemble, an upper bound for the
// squared transport distance between the n-truncation and the full field.
CouplingBound truncation_coupling_bound(const SampleEnsemble& e, int n,
                                        ConditionalExpectation how = ConditionalExpectation::projection,
                                        int neighbours = 10);

// 4 sum_{j > n} 1/j^2 = 4 psi'(n + 1)
double loop_tail_sum(int n);

struct RelativeEntropy {
  double value = 0;
  double stderr_ = 0;
  double log_Z = 0;
  double log_Z_n = 0;
  double ess = 0;
  bool reliable = true;
};

// Ent(nu_n | nu) for nu_n ~ exp(Phi(P_n u)) gamma and nu ~ exp(Phi(u)) gamma,
// both against the reference gamma at the full truncation, by importance
// sampling from gamma.
RelativeEntropy relative_entropy_truncation(const ModelSpec& model, int n, const std::vector<FourierField>& reference_samples,
                                            const PhaseDomain& domain = PhaseDomain::unrestricted());

struct TransportCheck {
  double w2_sq = 0;
  double entropy = 0;
  double entropy_stderr = 0;
  double alpha = 0;
  double rhs = 0;  // (2/alpha) Ent
  double slack = 0;
  bool pass = false;
  bool conclusive = true;
};

// omega given by weights exp(log_tilt) on the support of nu.
TransportCheck transport_inequality_check(const EmpiricalMeasure& nu, const std::vector<double>& log_tilt,
                                          double alpha, const CostSpec& cost, const SinkhornOptions& opt = {});

// 4 pi / (s (n-1)^{2s})
double gaussian_tail_bound(int n, double s);
// sum over |m| >= n in Z^2 of 2 / |m|^{2+2s}: direct up to radius R, integral beyond.
double lattice_tail_sum(int n, double s, int R = 2000);

}  // namespace gibbslab
