#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gibbslab/functional.hpp"
#include "gibbslab/gibbs.hpp"
#include "gibbslab/numerics.hpp"

namespace gibbslab {

// Ent(f^2) = E[f^2 log f^2] - E[f^2] log E[f^2], jackknife stderr.
Estimate entropy_of_squares(std::span<const double> f);
Estimate entropy_of_functional(const SampleEnsemble& e, const TestFunctional& f);

// E ||grad f||^2 in the dual metric.
Estimate dirichlet_energy(const SampleEnsemble& e, const TestFunctional& f, const MetricSpec& metric);

enum class GapMode { lsi, poincare };

struct GapRow {
  std::string label;
  Estimate spread;  // Ent(f^2) or Var(f)
  Estimate energy;
  double ratio = 0;  // 2E/Ent, or E/Var
  double ratio_stderr = 0;
  bool skipped = false;
  std::string note;
};

struct GapReport {
  GapMode mode = GapMode::lsi;
  std::vector<GapRow> rows;
  double alpha_hat = 0;
  double alpha_stderr = 0;
  std::string argmin;
  std::optional<double> alpha_predicted;
  bool empty = false;
  bool pass = false;
};

// Every ratio bounds the best constant from above, so PASS means
// alpha_hat >= alpha_predicted - 3 stderr.
GapReport lsi_gap_report(const SampleEnsemble& e, const std::vector<TestFunctional>& dictionary,
                         const MetricSpec& metric, GapMode mode,
                         std::optional<double> alpha_predicted = std::nullopt);

struct ConcentrationReport {
  std::vector<double> t;
  std::vector<double> tail;
  LinearFit fit;  // log tail against t^2
  double bound_slope = 0;  // -alpha / (2 L^2)
  double tolerance = 0.1;
  bool bounded = false;
  bool flagged = false;
  bool pass = false;
  std::string note;
};

ConcentrationReport lipschitz_concentration(const SampleEnsemble& e, const TestFunctional& f, double L,
                                            double alpha, double tolerance = 0.1);
ConcentrationReport lipschitz_concentration(std::span<const double> values, double L, double alpha,
                                            double tolerance = 0.1);

// E exp(kappa f^2), with the largest single-sample share of the sum.
struct MomentEstimate {
  Estimate moment;
  double max_share = 0;
  bool flagged = false;
};
MomentEstimate exp_square_moment(std::span<const double> f, double kappa);

struct IncrementSeries {
  std::array<int, 2> m{0, 0};
  std::vector<cplx> d;  // d[r-1] sums c_j conj(c_{j+m}) over r-1 < |j| <= r
  bool truncated = false;
  std::string note;

  cplx total() const;
};

// Annular decomposition of the coefficient of |u|^2 at -m.
IncrementSeries multiplicative_increments(const FourierField& u, std::array<int, 2> m, int R = 0);
cplx modulus_sq_coefficient(const FourierField& u, std::array<int, 2> m);

struct OrthogonalityResult {
  Estimate re;
  Estimate im;
};
// Mean of d_{r1} conj(d_{r2}) over an ensemble.
OrthogonalityResult increment_orthogonality(const SampleEnsemble& e, std::array<int, 2> m, int r1, int r2);

struct EnvelopeReport {
  std::vector<double> r;
  std::vector<double> max_abs;
  LinearFit fit;  // log max |d_r| against log r
};
EnvelopeReport increment_envelope(const SampleEnsemble& e, std::array<int, 2> m, int r_min, int R);

struct ExpSquareRow {
  std::array<int, 2> m{0, 0};
  MomentEstimate full;
  MomentEstimate half;
  bool stable = false;
};

struct ExpSquareReport {
  double kappa = 0;
  std::vector<ExpSquareRow> rows;
  double spread = 0;  // max / min moment across m
  bool finite = true;
  bool stable = true;
  bool pass = false;
};

// E exp(kappa^2 |(|u|^2)^(m)|^2) for each m; stable when the first half of
// the ensemble agrees with the whole within 3 combined stderr.
ExpSquareReport exp_square_moment(const SampleEnsemble& e, const std::vector<std::array<int, 2>>& m_list,
                                  double kappa, double max_spread = 10);

// Rejection sampling of the standard complex Gaussian field with E|c_j|^2 =
// 1/|j|^2 restricted to the decay domain.
SampleEnsemble sample_decay_domain(const PhaseDomain& domain, const Lattice& lat, std::size_t count,
                                   std::uint64_t seed, double* acceptance = nullptr);

}  // namespace gibbslab
