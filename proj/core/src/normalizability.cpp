#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gibbslab/gibbs.hpp"

namespace gibbslab {

std::string to_string(Normalizability c) {
  switch (c) {
    case Normalizability::stable: return "stable";
    case Normalizability::marginal: return "marginal";
    case Normalizability::divergent: return "divergent";
  }
  return "?";
}

namespace {

void onto_ball(FourierField& u, double N) {
  double m = u.norm_sq();
  if (m > N) u *= std::sqrt(N / m);
}

FourierField bump(const Lattice& lat, double width, double N) {
  GridBuffer g;
  g.dim = 1;
  g.side = fft_friendly(8 * lat.n() + 1);
  g.values.resize(g.side);
  const double pi = std::numbers::pi;
  for (int m = 0; m < g.side; ++m) {
    double d = 2 * pi * m / g.side - pi;
    g.values[m] = std::exp(-d * d / (2 * width * width));
  }
  FourierField u = to_coeffs(g, lat, false, false);
  double s = u.norm_sq();
  if (s > 0) u *= std::sqrt(N / s);
  return u;
}

// Projected ascent of -H with steps preconditioned by (1 + |k|^2)^{-1}.
double ascend(const ModelSpec& model, FourierField& u, double N, int max_iter) {
  double F = -energy(model, u);
  double eta = 0.5;
  for (int it = 0; it < max_iter && eta > 1e-12; ++it) {
    FourierField G = gradient(model, u);
    for (std::size_t i = 0; i < G.c.size(); ++i) G.c[i] /= 1.0 + u.lattice.k_sq(i);
    bool moved = false;
    while (eta > 1e-12) {
      FourierField trial = u;
      trial.axpy(-eta, G);
      onto_ball(trial, N);
      double Ft = -energy(model, trial);
      if (Ft > F) {
        double gain = Ft - F;
        u = std::move(trial);
        F = Ft;
        eta *= 1.5;
        moved = true;
        if (gain < 1e-14 * (1 + std::abs(F))) eta = 0;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return F;
}

}  // namespace

double max_log_weight(const ModelSpec& model, double N, const Lattice& lat, const ProbeOptions& opt,
                      FourierField* warm) {
  if (lat.dim() != 1) throw std::invalid_argument("normalizability probe is one dimensional");
  std::vector<FourierField> starts;
  const double pi = std::numbers::pi;
  for (double w : {1.0, 0.5, 0.25, 0.1, 2 * pi / lat.n(), pi / lat.n()}) starts.push_back(bump(lat, w, N));
  GaussianReference ref = GaussianReference::loop(lat);
  for (int r = 0; r < opt.random_starts; ++r) {
    Rng rng = make_stream(opt.seed, 0x5EEDu + r);
    FourierField u = sample_free_field(ref, rng);
    double s = u.norm_sq();
    if (s > 0) u *= std::sqrt(N / s);
    starts.push_back(std::move(u));
  }
  if (warm && !warm->c.empty()) {
    FourierField w = resample(*warm, lat);
    onto_ball(w, N);
    starts.push_back(std::move(w));
  }
  std::vector<double> F(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { F[i] = ascend(model, starts[i], N, opt.max_iter); });
  std::size_t best = std::max_element(F.begin(), F.end()) - F.begin();
  double out = std::max(F[best], 0.0);  // u = 0 is always admissible
  if (warm) *warm = starts[best];
  return out;
}

NormalizabilityReport normalizability_probe(int p, double lambda, double N,
                                            const std::vector<int>& n_list,
                                            const ProbeOptions& opt) {
  if (n_list.size() < 2) throw std::invalid_argument("probe needs at least two cutoffs");
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw std::invalid_argument("cutoffs must increase");
  ModelSpec model = ModelSpec::nls(p, lambda, 1);
  model.validate();
  NormalizabilityReport rep;
  rep.p = p;
  rep.lambda = lambda;
  rep.N = N;
  FourierField warm;
  for (int n : n_list) {
    Lattice lat(1, n, std::max(3, (p + 1) / 2));
    NormalizabilityRow row;
    row.n = n;
    row.log_max_weight = max_log_weight(model, N, lat, opt, &warm);
    if (opt.estimate_partition)
      row.partition = partition_estimate(model, PhaseDomain::mass_ball(N), GaussianReference::loop(lat),
                                         opt.z_samples, opt.seed + std::uint64_t(n));
    rep.rows.push_back(row);
  }
  std::vector<double> d;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    d.push_back(rep.rows[i].log_max_weight - rep.rows[i - 1].log_max_weight);
  double tol = 1e-6 * std::max(1.0, std::abs(rep.rows.back().log_max_weight));
  bool all_up = std::all_of(d.begin(), d.end(), [tol](double x) { return x > tol; });
  bool shrinking = true;
  for (std::size_t i = 1; i < d.size(); ++i)
    if (d[i] > 0.5 * d[i - 1] + tol) shrinking = false;
  if (all_up && d.back() >= d.front()) rep.verdict = Normalizability::divergent;
  else if (d.back() <= tol || shrinking) rep.verdict = Normalizability::stable;
  else rep.verdict = Normalizability::marginal;
  return rep;
}

CriticalMassResult estimate_critical_mass(int p, double lambda, const std::vector<int>& n_list,
                                          double lo, double hi, int iterations,
                                          const ProbeOptions& opt) {
  if (!(lo > 0 && hi > lo)) throw std::invalid_argument("critical mass bracket needs 0 < lo < hi");
  ProbeOptions o = opt;
  o.estimate_partition = false;
  CriticalMassResult r;
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    auto rep = normalizability_probe(p, lambda, mid, n_list, o);
    if (rep.verdict == Normalizability::stable) lo = mid;
    else hi = mid;
    ++r.iterations;
  }
  r.lower = lo;
  r.upper = hi;
  r.N0 = lo;
  return r;
}

}  // namespace gibbslab
