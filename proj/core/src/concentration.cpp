#include "gibbslab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gibbslab {

namespace {

double xlogx(double a) { return a > 0 ? a * std::log(a) : 0.0; }

double entropy_from_sums(double s1, double s2, double n) {
  double m = s1 / n;
  return s2 / n - xlogx(m);
}

// Jackknife over leave-one-out values `loo` of a statistic.
double jackknife_stderr(std::span<const double> loo) {
  double n = double(loo.size());
  if (n < 2) return 0;
  double m = mean(loo), s = 0;
  for (double v : loo) s += (v - m) * (v - m);
  return std::sqrt((n - 1) / n * s);
}

std::vector<double> values_of(const SampleEnsemble& e, const TestFunctional& f) {
  std::vector<double> v(e.size());
  parallel_for(e.size(), [&](std::size_t i) { v[i] = f.value(e.fields[i]); });
  return v;
}

std::vector<double> energies_of(const SampleEnsemble& e, const TestFunctional& f, const MetricSpec& metric) {
  std::vector<double> g(e.size());
  parallel_for(e.size(), [&](std::size_t i) { g[i] = metric.norm_sq(f.gradient(e.fields[i])); });
  return g;
}

}  // namespace

Estimate entropy_of_squares(std::span<const double> f) {
  std::size_t S = f.size();
  if (S == 0) return {};
  std::vector<double> a(S), b(S);
  for (std::size_t i = 0; i < S; ++i) {
    a[i] = f[i] * f[i];
    b[i] = xlogx(a[i]);
  }
  bool constant = std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; });
  if (constant) return {0.0, 0.0};
  double s1 = compensated_sum(a), s2 = compensated_sum(b), n = double(S);
  Estimate e;
  e.value = std::max(entropy_from_sums(s1, s2, n), 0.0);
  std::vector<double> loo(S);
  for (std::size_t i = 0; i < S; ++i) loo[i] = entropy_from_sums(s1 - a[i], s2 - b[i], n - 1);
  e.stderr_ = jackknife_stderr(loo);
  return e;
}

Estimate entropy_of_functional(const SampleEnsemble& e, const TestFunctional& f) {
  auto v = values_of(e, f);
  return entropy_of_squares(v);
}

Estimate dirichlet_energy(const SampleEnsemble& e, const TestFunctional& f, const MetricSpec& metric) {
  auto g = energies_of(e, f, metric);
  return mean_estimate(g);
}

GapReport lsi_gap_report(const SampleEnsemble& e, const std::vector<TestFunctional>& dictionary,
                         const MetricSpec& metric, GapMode mode, std::optional<double> alpha_predicted) {
  GapReport rep;
  rep.mode = mode;
  rep.alpha_predicted = alpha_predicted;
  std::size_t S = e.size();
  if (dictionary.empty() || S < 2) {
    rep.empty = true;
    return rep;
  }
  double n = double(S);
  rep.rows.resize(dictionary.size());
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    const auto& f = dictionary[k];
    GapRow& row = rep.rows[k];
    row.label = f.label;
    auto v = values_of(e, f);
    auto g = energies_of(e, f, metric);
    row.energy = mean_estimate(g);
    double sg = compensated_sum(g);
    std::vector<double> a(S), b(S);
    double s1, s2;
    if (mode == GapMode::lsi) {
      for (std::size_t i = 0; i < S; ++i) {
        a[i] = v[i] * v[i];
        b[i] = xlogx(a[i]);
      }
      row.spread = entropy_of_squares(v);
    } else {
      for (std::size_t i = 0; i < S; ++i) {
        a[i] = v[i];
        b[i] = v[i] * v[i];
      }
      double var = variance(v);
      // jackknife of the plug-in variance matches the delta method closely
      s1 = compensated_sum(a);
      s2 = compensated_sum(b);
      std::vector<double> loo(S);
      for (std::size_t i = 0; i < S; ++i) {
        double m = (s1 - a[i]) / (n - 1);
        loo[i] = (s2 - b[i]) / (n - 1) - m * m;
      }
      row.spread = {var, jackknife_stderr(loo)};
    }
    double floor = 1e-12 * std::max(1.0, mean(std::span<const double>(a)));
    if (!(row.spread.value > floor) || row.spread.value <= 3 * row.spread.stderr_) {
      row.skipped = true;
      row.note = "spread below noise floor";
      continue;
    }
    double c = mode == GapMode::lsi ? 2.0 : 1.0;
    row.ratio = c * row.energy.value / row.spread.value;
    s1 = compensated_sum(a);
    s2 = compensated_sum(b);
    std::vector<double> loo(S);
    for (std::size_t i = 0; i < S; ++i) {
      double sp;
      if (mode == GapMode::lsi) sp = entropy_from_sums(s1 - a[i], s2 - b[i], n - 1);
      else {
        double m = (s1 - a[i]) / (n - 1);
        sp = (s2 - b[i]) / (n - 1) - m * m;
      }
      loo[i] = c * ((sg - g[i]) / (n - 1)) / sp;
    }
    row.ratio_stderr = jackknife_stderr(loo);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.rows) {
    if (row.skipped) continue;
    if (row.ratio < best) {
      best = row.ratio;
      rep.alpha_hat = row.ratio;
      rep.alpha_stderr = row.ratio_stderr;
      rep.argmin = row.label;
    }
  }
  if (!std::isfinite(best)) {
    rep.empty = true;
    return rep;
  }
  rep.pass = !alpha_predicted || rep.alpha_hat >= *alpha_predicted - 3 * rep.alpha_stderr;
  return rep;
}

ConcentrationReport lipschitz_concentration(std::span<const double> values, double L, double alpha,
                                            double tolerance) {
  if (!(L > 0) || !(alpha > 0)) throw std::invalid_argument("concentration needs L, alpha > 0");
  ConcentrationReport r;
  r.tolerance = tolerance;
  r.bound_slope = -alpha / (2 * L * L);
  std::size_t S = values.size();
  double m = mean(values);
  std::vector<double> dev(S);
  for (std::size_t i = 0; i < S; ++i) dev[i] = std::abs(values[i] - m);
  std::sort(dev.begin(), dev.end());
  if (S < 50 || dev.back() == 0) {
    r.flagged = true;
    r.note = "too few samples";
    return r;
  }
  // thresholds at upper quantiles, keeping at least `min_count` exceedances
  std::size_t min_count = std::max<std::size_t>(10, S / 1000);
  std::vector<double> xs, ys;
  for (double q : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998}) {
    double t = dev[std::size_t(q * double(S - 1))];
    std::size_t c = S - std::size_t(std::upper_bound(dev.begin(), dev.end(), t) - dev.begin());
    if (c < min_count || t <= 0) continue;
    if (!r.t.empty() && t <= r.t.back()) continue;
    r.t.push_back(t);
    r.tail.push_back(double(c) / double(S));
    xs.push_back(t * t);
    ys.push_back(std::log(r.tail.back()));
  }
  if (xs.size() < 3) {
    r.bounded = true;
    r.pass = true;
    r.note = "tail vanishes beyond the range of f";
    return r;
  }
  r.fit = linear_fit(xs, ys);
  r.pass = r.fit.slope <= r.bound_slope * (1 - tolerance);
  return r;
}

ConcentrationReport lipschitz_concentration(const SampleEnsemble& e, const TestFunctional& f, double L,
                                            double alpha, double tolerance) {
  auto v = values_of(e, f);
  return lipschitz_concentration(v, L, alpha, tolerance);
}

MomentEstimate exp_square_moment(std::span<const double> f, double kappa) {
  MomentEstimate r;
  std::vector<double> x(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) x[i] = std::exp(kappa * f[i] * f[i]);
  r.moment = mean_estimate(x);
  double s = compensated_sum(x);
  r.max_share = s > 0 ? *std::max_element(x.begin(), x.end()) / s : 0.0;
  r.flagged = r.max_share > 0.5 || !std::isfinite(s);
  return r;
}

cplx IncrementSeries::total() const {
  cplx s = 0;
  for (cplx v : d) s += v;
  return s;
}

IncrementSeries multiplicative_increments(const FourierField& u, std::array<int, 2> m, int R) {
  const Lattice& lat = u.lattice;
  if (lat.dim() != 2) throw std::invalid_argument("increments are defined for 2D fields");
  if (m[0] == 0 && m[1] == 0) throw std::invalid_argument("increments need m != 0");
  IncrementSeries s;
  s.m = m;
  int reach = int(std::ceil(std::sqrt(2.0) * lat.n()));
  if (R <= 0) R = reach;
  if (R > reach) {
    s.note = "R beyond lattice, truncated to " + std::to_string(reach);
    s.truncated = true;
    R = reach;
  }
  s.d.assign(R, 0.0);
  int n = lat.n();
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b) {
      if (a == 0 && b == 0) continue;
      int a2 = a + m[0], b2 = b + m[1];
      if (!lat.contains(a2, b2)) continue;
      int r = int(std::ceil(std::sqrt(double(a * a + b * b)) - 1e-12));
      if (r < 1 || r > R) continue;
      s.d[r - 1] += u.at(a, b) * std::conj(u.at(a2, b2));
    }
  return s;
}

cplx modulus_sq_coefficient(const FourierField& u, std::array<int, 2> m) {
  Lattice wide = u.lattice.with_cutoff(2 * u.lattice.n());
  FourierField A = modulus_sq(u, wide);
  return A.at(-m[0], -m[1]);
}

OrthogonalityResult increment_orthogonality(const SampleEnsemble& e, std::array<int, 2> m, int r1, int r2) {
  std::vector<double> re(e.size()), im(e.size());
  parallel_for(e.size(), [&](std::size_t i) {
    auto s = multiplicative_increments(e.fields[i], m, std::max(r1, r2));
    cplx p = s.d[r1 - 1] * std::conj(s.d[r2 - 1]);
    re[i] = p.real();
    im[i] = p.imag();
  });
  return {mean_estimate(re), mean_estimate(im)};
}

EnvelopeReport increment_envelope(const SampleEnsemble& e, std::array<int, 2> m, int r_min, int R) {
  EnvelopeReport rep;
  std::vector<std::vector<double>> per(e.size());
  parallel_for(e.size(), [&](std::size_t i) {
    auto s = multiplicative_increments(e.fields[i], m, R);
    per[i].resize(s.d.size());
    for (std::size_t r = 0; r < s.d.size(); ++r) per[i][r] = std::abs(s.d[r]);
  });
  if (per.empty()) return rep;
  std::size_t len = per[0].size();
  std::vector<double> xs, ys;
  for (std::size_t r = std::max(r_min, 1) - 1; r < len; ++r) {
    double mx = 0;
    for (const auto& p : per) mx = std::max(mx, p[r]);
    rep.r.push_back(double(r + 1));
    rep.max_abs.push_back(mx);
    if (mx > 0) {
      xs.push_back(std::log(double(r + 1)));
      ys.push_back(std::log(mx));
    }
  }
  if (xs.size() >= 2) rep.fit = linear_fit(xs, ys);
  return rep;
}

ExpSquareReport exp_square_moment(const SampleEnsemble& e, const std::vector<std::array<int, 2>>& m_list,
                                  double kappa, double max_spread) {
  ExpSquareReport rep;
  rep.kappa = kappa;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (auto m : m_list) {
    std::vector<double> a(e.size());
    parallel_for(e.size(), [&](std::size_t i) {
      a[i] = std::abs(multiplicative_increments(e.fields[i], m, 0).total());
    });
    ExpSquareRow row;
    row.m = m;
    row.full = exp_square_moment(a, kappa * kappa);
    std::span<const double> first(a.data(), a.size() / 2);
    row.half = exp_square_moment(first, kappa * kappa);
    double se = std::hypot(row.full.moment.stderr_, row.half.moment.stderr_);
    row.stable = std::abs(row.full.moment.value - row.half.moment.value) <= 3 * se + 1e-12;
    rep.finite = rep.finite && std::isfinite(row.full.moment.value) && !row.full.flagged;
    rep.stable = rep.stable && row.stable;
    lo = std::min(lo, row.full.moment.value);
    hi = std::max(hi, row.full.moment.value);
    rep.rows.push_back(row);
  }
  rep.spread = lo > 0 ? hi / lo : INFINITY;
  rep.pass = rep.finite && rep.stable && rep.spread <= max_spread;
  return rep;
}

SampleEnsemble sample_decay_domain(const PhaseDomain& domain, const Lattice& lat, std::size_t count,
                                   std::uint64_t seed, double* acceptance) {
  GaussianReference ref = GaussianReference::loop(lat);
  ref.scale = 0.5;
  SampleEnsemble e;
  e.domain = domain.describe();
  e.reference = "loop(scale=0.5)";
  e.seed = seed;
  std::size_t tried = 0;
  const std::size_t batch = 256;
  while (e.fields.size() < count) {
    std::vector<FourierField> xs(batch);
    std::vector<char> ok(batch);
    parallel_for(batch, [&](std::size_t i) {
      Rng rng = make_stream(seed, tried + i);
      xs[i] = sample_free_field(ref, rng);
      ok[i] = domain.contains(xs[i]);
    });
    for (std::size_t i = 0; i < batch && e.fields.size() < count; ++i) {
      ++tried;
      if (ok[i]) e.fields.push_back(std::move(xs[i]));
    }
    if (tried > 1000 * count + 10000 && e.fields.size() * 1000 < tried)
      throw std::runtime_error("decay domain has negligible mass; relax K1, K2");
  }
  if (acceptance) *acceptance = double(e.fields.size()) / double(tried);
  return e;
}

}  // namespace gibbslab
