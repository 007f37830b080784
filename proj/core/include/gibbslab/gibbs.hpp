#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gibbslab/hamiltonians.hpp"
#include "gibbslab/numerics.hpp"
#include "gibbslab/spectral.hpp"

namespace gibbslab {

// Gaussian measure exp(-1/2 sum_k w_k |c_k|^2 / scale) on the field class, with
// w_k = |k|^{2 order} + rho. Complex fields get E|c_k|^2 = 2 scale / w_k; real
// (Hermitian) fields E|c_k|^2 = scale / w_k.
struct GaussianReference {
  Lattice lattice;
  bool real = false;
  bool zero_mode = false;
  double rho = 0;
  int order = 1;
  double scale = 1;

  static GaussianReference loop(const Lattice& lat);                  // massless, mean zero
  static GaussianReference massive(const Lattice& lat, double rho);  // includes k = 0
  static GaussianReference real_loop(const Lattice& lat);             // Hermitian, mean zero
  static GaussianReference white(const Lattice& lat);                 // Hermitian, unit precision

  double precision(std::size_t idx) const;
  double mode_variance(std::size_t idx) const;  // E|c_k|^2
  bool carries(std::size_t idx) const;
};

FourierField sample_free_field(const GaussianReference& ref, Rng& rng);
FourierField sample_free_field(const GaussianReference& ref, std::uint64_t seed);

struct PhaseDomain {
  enum class Kind { unrestricted, mass_ball, mass_and_sobolev, decay };
  Kind kind = Kind::unrestricted;
  double N = 0;
  double kappa = 0;
  double s = 0;
  double K1 = 0;
  double K2 = 0;
  double eps = 0;

  static PhaseDomain unrestricted() { return {}; }
  static PhaseDomain mass_ball(double N);
  static PhaseDomain mass_and_sobolev(double N, double kappa, double s);
  static PhaseDomain decay(double K1, double K2, double s, double eps);

  bool contains(const FourierField& u) const;
  std::string describe() const;
};

// sum_{k != 0} |k|^{2s} |c_k|^2, the quantity bounded by kappa in the Sobolev ball.
double sobolev_weight_sum(const FourierField& u, double s);

struct SampleEnsemble {
  std::vector<FourierField> fields;
  // Extra components per member (Zakharov: n_tilde, W); empty otherwise.
  std::vector<std::vector<FourierField>> aux;
  std::vector<double> weights;
  std::string model;
  std::string domain;
  std::string reference;
  std::uint64_t seed = 0;
  int thin = 1;

  std::size_t size() const { return fields.size(); }
};

struct ChainConfig {
  double beta = 0;  // 0 selects a pilot-tuned value
  int steps = 10000;
  int burn_in = 1000;
  int thin = 10;
  std::uint64_t seed = 1;
  std::uint64_t chain = 0;
  int pilot_steps = 400;
  double target_low = 0.25;
  double target_high = 0.40;
};

struct ChainStats {
  double beta = 0;
  double acceptance = 0;
  double burn_in_acceptance = 0;
  std::size_t steps = 0;
  std::size_t accepted = 0;
  std::string warning;
};

struct ChainResult {
  SampleEnsemble ensemble;
  ChainStats stats;
};

double pilot_beta(const ModelSpec& model, const PhaseDomain& domain, const GaussianReference& ref,
                  const ChainConfig& cfg);

ChainResult run_pcn_chain(const ModelSpec& model, const PhaseDomain& domain,
                          const GaussianReference& ref, const ChainConfig& cfg);

// Independent chains with streams (seed, chain id), merged in chain order.
ChainResult run_pcn_chains(const ModelSpec& model, const PhaseDomain& domain,
                           const GaussianReference& ref, const ChainConfig& cfg, int chains);

// Zakharov product measure: u by pCN (cubic NLS, lambda = 1, mass ball B),
// n_tilde and W exact Gaussian draws on the doubled lattice.
ChainResult sample_zakharov(const ModelSpec& model, const GaussianReference& ref,
                            const ChainConfig& cfg, int chains = 1);
ZakharovState zakharov_member(const SampleEnsemble& e, std::size_t i);

struct PartitionResult {
  double Z = 0;
  double stderr_ = 0;
  double log_Z = 0;
  double ess = 0;
  double log_max_weight = 0;
  bool reliable = true;
  std::size_t samples = 0;
};

// Importance sampling Z = E_ref[1_domain exp(Phi)].
PartitionResult partition_estimate(const ModelSpec& model, const PhaseDomain& domain,
                                   const GaussianReference& ref, std::size_t samples,
                                   std::uint64_t seed);
PartitionResult partition_estimate(const ModelSpec& model, const PhaseDomain& domain,
                                   const std::vector<FourierField>& reference_samples);

enum class Normalizability { stable, marginal, divergent };
std::string to_string(Normalizability c);

struct NormalizabilityRow {
  int n = 0;
  double log_max_weight = 0;  // sup over the truncated ball of -H_n
  PartitionResult partition;
};

struct NormalizabilityReport {
  int p = 0;
  double lambda = 0;
  double N = 0;
  std::vector<NormalizabilityRow> rows;
  Normalizability verdict = Normalizability::stable;
};

struct ProbeOptions {
  std::size_t z_samples = 2000;
  int random_starts = 4;
  int max_iter = 3000;
  std::uint64_t seed = 1;
  bool estimate_partition = true;
};

// Maximizes -H_n over the mass ball by preconditioned projected ascent from
// several starts; `warm` seeds one start.
double max_log_weight(const ModelSpec& model, double N, const Lattice& lat, const ProbeOptions& opt,
                      FourierField* warm = nullptr);

NormalizabilityReport normalizability_probe(int p, double lambda, double N,
                                            const std::vector<int>& n_list,
                                            const ProbeOptions& opt = {});

struct CriticalMassResult {
  double N0 = 0;
  double lower = 0;
  double upper = 0;
  int iterations = 0;
};
// Largest N on [lo, hi] whose probe is stable at the largest n, by bisection.
CriticalMassResult estimate_critical_mass(int p, double lambda, const std::vector<int>& n_list,
                                          double lo, double hi, int iterations,
                                          const ProbeOptions& opt);

struct TailRow {
  double kappa = 0;
  double tail = 0;
  double stderr_ = 0;
};

struct TailReport {
  double s = 0;
  std::vector<TailRow> rows;
  LinearFit fit;  // log tail against kappa^2
  bool degenerate = false;
};

TailReport tail_mass_estimate(const SampleEnsemble& e, double s, const std::vector<double>& kappas);

struct DecayMassResult {
  double empirical = 0;
  double stderr_ = 0;
  double bound = 0;
  bool bound_positive = false;
  bool hypothesis = false;  // K2 > 5, which also gives K2 exp(K2^2/2) > 4
};

double decay_mass_bound(double K1, double K2, double s);
// Mass of the decay domain under the field with standard complex Gaussian
// coefficients over |j|, i.e. the loop with E|c_j|^2 = 1/|j|^2.
DecayMassResult decay_domain_mass(double K1, double K2, double s, double eps, const Lattice& lat,
                                  std::size_t samples, std::uint64_t seed);

}  // namespace gibbslab
