#include "gibbslab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

GaussianReference GaussianReference::loop(const Lattice& lat) {
  GaussianReference r;
  r.lattice = lat;
  return r;
}

GaussianReference GaussianReference::massive(const Lattice& lat, double rho) {
  if (rho <= 0) throw std::invalid_argument("massive reference needs rho > 0");
  GaussianReference r;
  r.lattice = lat;
  r.rho = rho;
  r.zero_mode = true;
  return r;
}

GaussianReference GaussianReference::real_loop(const Lattice& lat) {
  GaussianReference r;
  r.lattice = lat;
  r.real = true;
  return r;
}

GaussianReference GaussianReference::white(const Lattice& lat) {
  GaussianReference r;
  r.lattice = lat;
  r.real = true;
  r.order = 0;
  return r;
}

double GaussianReference::precision(std::size_t idx) const {
  double k2 = lattice.k_sq(idx);
  return (order == 0 ? 1.0 : std::pow(k2, order)) + rho;
}

bool GaussianReference::carries(std::size_t idx) const {
  return idx != lattice.origin() || zero_mode;
}

double GaussianReference::mode_variance(std::size_t idx) const {
  if (!carries(idx)) return 0.0;
  double w = precision(idx);
  if (!real) return 2.0 * scale / w;
  return scale / w;
}

FourierField sample_free_field(const GaussianReference& ref, Rng& rng) {
  const Lattice& lat = ref.lattice;
  FourierField f(lat, ref.real, ref.zero_mode);
  std::normal_distribution<double> g;
  std::size_t o = lat.origin();
  if (!ref.real) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      if (!ref.carries(i)) continue;
      double sd = std::sqrt(ref.scale / ref.precision(i));
      double a = g(rng), b = g(rng);
      f.c[i] = sd * cplx(a, b);
    }
    return f;
  }
  for (std::size_t i = 0; i < o; ++i) {
    double sd = std::sqrt(ref.scale / (2.0 * ref.precision(i)));
    double a = g(rng), b = g(rng);
    f.c[i] = sd * cplx(a, b);
    f.c[lat.mirror(i)] = std::conj(f.c[i]);
  }
  if (ref.zero_mode) f.c[o] = std::sqrt(ref.scale / ref.precision(o)) * g(rng);
  return f;
}

FourierField sample_free_field(const GaussianReference& ref, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return sample_free_field(ref, rng);
}

PhaseDomain PhaseDomain::mass_ball(double N) {
  if (N <= 0) throw std::invalid_argument("mass ball needs N > 0");
  PhaseDomain d;
  d.kind = Kind::mass_ball;
  d.N = N;
  return d;
}

PhaseDomain PhaseDomain::mass_and_sobolev(double N, double kappa, double s) {
  if (N <= 0 || kappa <= 0) throw std::invalid_argument("mass/Sobolev ball needs N, kappa > 0");
  if (!(s > 0.25 && s < 0.5)) throw std::invalid_argument("mass/Sobolev ball needs 1/4 < s < 1/2");
  PhaseDomain d;
  d.kind = Kind::mass_and_sobolev;
  d.N = N;
  d.kappa = kappa;
  d.s = s;
  return d;
}

PhaseDomain PhaseDomain::decay(double K1, double K2, double s, double eps) {
  if (!(s > 0 && s < 0.25)) throw std::invalid_argument("decay domain needs 0 < s < 1/4");
  if (!(eps > 0 && eps < 0.125)) throw std::invalid_argument("decay domain needs 0 < eps < 1/8");
  PhaseDomain d;
  d.kind = Kind::decay;
  d.K1 = K1;
  d.K2 = K2;
  d.s = s;
  d.eps = eps;
  return d;
}

double sobolev_weight_sum(const FourierField& u, double s) { return sobolev_seminorm_sq(u, s); }

bool PhaseDomain::contains(const FourierField& u) const {
  switch (kind) {
    case Kind::unrestricted:
      return true;
    case Kind::mass_ball:
      return u.norm_sq() <= N;
    case Kind::mass_and_sobolev:
      return u.norm_sq() <= N && sobolev_weight_sum(u, s) <= kappa;
    case Kind::decay: {
      double h = sobolev_norm(u, -s);
      if (h > K1) return false;
      double expo = -0.75 - eps;
      for (std::size_t i = 0; i < u.c.size(); ++i) {
        double k2 = u.lattice.k_sq(i);
        if (k2 == 0) continue;
        if (std::abs(u.c[i]) > K2 * std::pow(k2, 0.5 * expo)) return false;
      }
      return true;
    }
  }
  return false;
}

std::string PhaseDomain::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::unrestricted: os << "unrestricted"; break;
    case Kind::mass_ball: os << "mass_ball(N=" << N << ")"; break;
    case Kind::mass_and_sobolev:
      os << "mass_and_sobolev(N=" << N << ",kappa=" << kappa << ",s=" << s << ")";
      break;
    case Kind::decay:
      os << "decay(K1=" << K1 << ",K2=" << K2 << ",s=" << s << ",eps=" << eps << ")";
      break;
  }
  return os.str();
}

namespace {

std::string describe(const GaussianReference& r) {
  std::ostringstream os;
  os << (r.real ? "real" : "complex") << "(D=" << r.lattice.dim() << ",n=" << r.lattice.n()
     << ",rho=" << r.rho << ",order=" << r.order << ",scale=" << r.scale
     << ",zero_mode=" << (r.zero_mode ? 1 : 0) << ")";
  return os.str();
}

struct PcnRun {
  std::vector<FourierField> samples;
  std::size_t accepted = 0;
  std::size_t accepted_burn = 0;
  std::size_t steps = 0;
};

PcnRun pcn(const ModelSpec& model, const PhaseDomain& domain, const GaussianReference& ref,
           double beta, int burn_in, int steps, int thin, Rng& rng) {
  PcnRun run;
  FourierField u(ref.lattice, ref.real, ref.zero_mode);
  double phi = gibbs_potential(model, u);
  double keep = std::sqrt(1.0 - beta * beta);
  std::uniform_real_distribution<double> unif;
  for (int t = 0; t < burn_in + steps; ++t) {
    FourierField prop = sample_free_field(ref, rng);
    prop *= beta;
    prop.axpy(keep, u);
    double r = unif(rng);
    bool ok = false;
    if (domain.contains(prop)) {
      double phi_new = gibbs_potential(model, prop);
      if (std::log(r) < phi_new - phi) {
        u = std::move(prop);
        phi = phi_new;
        ok = true;
      }
    }
    if (ok) {
      if (t < burn_in) ++run.accepted_burn;
      else ++run.accepted;
    }
    if (t >= burn_in && (t - burn_in + 1) % thin == 0) run.samples.push_back(u);
  }
  run.steps = std::size_t(steps);
  return run;
}

}  // namespace

double pilot_beta(const ModelSpec& model, const PhaseDomain& domain, const GaussianReference& ref,
                  const ChainConfig& cfg) {
  double beta = 1.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    Rng rng = make_stream(cfg.seed, (cfg.chain << 20) + 0xB17u + attempt);
    PcnRun run = pcn(model, domain, ref, beta, 0, cfg.pilot_steps, cfg.pilot_steps, rng);
    double acc = double(run.accepted) / double(std::max(1, cfg.pilot_steps));
    if (acc >= cfg.target_low) return beta;
    beta *= 0.5;
  }
  return beta;
}

ChainResult run_pcn_chain(const ModelSpec& model, const PhaseDomain& domain,
                          const GaussianReference& ref, const ChainConfig& cfg) {
  if (cfg.thin < 1 || cfg.steps < 1 || cfg.burn_in < 0)
    throw std::invalid_argument("chain needs steps >= 1, thin >= 1, burn_in >= 0");
  if (cfg.beta < 0 || cfg.beta > 1) throw std::invalid_argument("pCN step beta must lie in (0, 1]");
  ChainResult out;
  double beta = cfg.beta > 0 ? cfg.beta : pilot_beta(model, domain, ref, cfg);
  Rng rng = make_stream(cfg.seed, cfg.chain);
  PcnRun run = pcn(model, domain, ref, beta, cfg.burn_in, cfg.steps, cfg.thin, rng);
  out.ensemble.fields = std::move(run.samples);
  out.ensemble.model = model.name();
  out.ensemble.domain = domain.describe();
  out.ensemble.reference = describe(ref);
  out.ensemble.seed = cfg.seed;
  out.ensemble.thin = cfg.thin;
  out.stats.beta = beta;
  out.stats.steps = run.steps;
  out.stats.accepted = run.accepted;
  out.stats.acceptance = double(run.accepted) / double(run.steps);
  out.stats.burn_in_acceptance =
      cfg.burn_in > 0 ? double(run.accepted_burn) / double(cfg.burn_in) : out.stats.acceptance;
  if (out.stats.burn_in_acceptance < 0.01) {
    std::ostringstream os;
    os << "acceptance " << out.stats.burn_in_acceptance << " below 1% during burn-in; try beta="
       << beta / 4;
    out.stats.warning = os.str();
  }
  return out;
}

ChainResult run_pcn_chains(const ModelSpec& model, const PhaseDomain& domain,
                           const GaussianReference& ref, const ChainConfig& cfg, int chains) {
  if (chains < 1) throw std::invalid_argument("need at least one chain");
  ChainConfig base = cfg;
  if (base.beta == 0) base.beta = pilot_beta(model, domain, ref, cfg);
  std::vector<ChainResult> parts(chains);
  parallel_for(std::size_t(chains), [&](std::size_t c) {
    ChainConfig cc = base;
    cc.chain = cfg.chain + c;
    parts[c] = run_pcn_chain(model, domain, ref, cc);
  });
  ChainResult out = std::move(parts[0]);
  std::size_t acc = out.stats.accepted, steps = out.stats.steps;
  for (int c = 1; c < chains; ++c) {
    auto& f = parts[c].ensemble.fields;
    out.ensemble.fields.insert(out.ensemble.fields.end(), std::make_move_iterator(f.begin()),
                               std::make_move_iterator(f.end()));
    acc += parts[c].stats.accepted;
    steps += parts[c].stats.steps;
    out.stats.burn_in_acceptance = std::min(out.stats.burn_in_acceptance, parts[c].stats.burn_in_acceptance);
    if (out.stats.warning.empty()) out.stats.warning = parts[c].stats.warning;
  }
  out.stats.accepted = acc;
  out.stats.steps = steps;
  out.stats.acceptance = double(acc) / double(steps);
  return out;
}

ChainResult sample_zakharov(const ModelSpec& model, const GaussianReference& ref,
                            const ChainConfig& cfg, int chains) {
  if (model.kind != ModelKind::zakharov) throw std::invalid_argument("not a Zakharov model");
  ModelSpec nls = ModelSpec::nls(4, 1.0, 1);
  ChainResult out = run_pcn_chains(nls, PhaseDomain::mass_ball(model.B), ref, cfg, chains);
  out.ensemble.model = model.name();
  Lattice wide = ref.lattice.with_cutoff(2 * ref.lattice.n());
  GaussianReference nref = GaussianReference::white(wide);
  GaussianReference wref = GaussianReference::real_loop(wide);
  std::size_t count = out.ensemble.fields.size();
  out.ensemble.aux.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, (std::uint64_t(1) << 40) + i);
    out.ensemble.aux[i] = {sample_free_field(nref, rng), sample_free_field(wref, rng)};
  });
  return out;
}

ZakharovState zakharov_member(const SampleEnsemble& e, std::size_t i) {
  if (e.aux.size() != e.fields.size() || e.aux[i].size() != 2)
    throw std::invalid_argument("ensemble does not carry Zakharov components");
  return from_canonical({e.fields[i], e.aux[i][0], e.aux[i][1]});
}

PartitionResult partition_estimate(const ModelSpec& model, const PhaseDomain& domain,
                                   const std::vector<FourierField>& xs) {
  PartitionResult r;
  r.samples = xs.size();
  if (xs.empty()) {
    r.reliable = false;
    return r;
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> phi(xs.size(), ninf);
  parallel_for(xs.size(), [&](std::size_t i) {
    if (domain.contains(xs[i])) phi[i] = gibbs_potential(model, xs[i]);
  });
  double m = *std::max_element(phi.begin(), phi.end());
  r.log_max_weight = m;
  if (m == ninf) {
    r.reliable = false;
    r.log_Z = ninf;
    return r;
  }
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) w[i] = phi[i] == ninf ? 0.0 : std::exp(phi[i] - m);
  Estimate e = mean_estimate(w);
  double s1 = compensated_sum(w), s2 = 0;
  for (double v : w) s2 += v * v;
  r.ess = s1 * s1 / s2;
  r.Z = std::exp(m) * e.value;
  r.stderr_ = std::exp(m) * e.stderr_;
  r.log_Z = m + std::log(e.value);
  r.reliable = r.ess >= 30;
  return r;
}

PartitionResult partition_estimate(const ModelSpec& model, const PhaseDomain& domain,
                                   const GaussianReference& ref, std::size_t samples,
                                   std::uint64_t seed) {
  std::vector<FourierField> xs(samples);
  parallel_for(samples, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    xs[i] = sample_free_field(ref, rng);
  });
  return partition_estimate(model, domain, xs);
}

TailReport tail_mass_estimate(const SampleEnsemble& e, double s, const std::vector<double>& kappas) {
  if (!(s > 0.25 && s < 0.5)) throw std::invalid_argument("tail estimate needs 1/4 < s < 1/2");
  TailReport r;
  r.s = s;
  std::vector<double> q(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) q[i] = sobolev_weight_sum(e.fields[i], s);
  double S = double(std::max<std::size_t>(1, q.size()));
  std::vector<double> xs, ys;
  for (double k : kappas) {
    std::size_t c = std::count_if(q.begin(), q.end(), [k](double v) { return v > k; });
    TailRow row;
    row.kappa = k;
    row.tail = double(c) / S;
    row.stderr_ = std::sqrt(row.tail * (1 - row.tail) / S);
    r.rows.push_back(row);
    if (c >= 5) {
      xs.push_back(k * k);
      ys.push_back(std::log(row.tail));
    }
  }
  if (xs.size() < 3) {
    r.degenerate = true;
    return r;
  }
  r.fit = linear_fit(xs, ys);
  return r;
}

double decay_mass_bound(double K1, double K2, double s) {
  const double pi = std::numbers::pi;
  double a = std::exp(-2.0 * (6.0 + pi) * std::exp(-K2 * K2 / 2.0) / (K2 * std::sqrt(2 * pi)));
  double b = std::exp(-K1 * K1 / 4.0 + pi / (2.0 * s) + 5.0);
  return a - b;
}

DecayMassResult decay_domain_mass(double K1, double K2, double s, double eps, const Lattice& lat,
                                  std::size_t samples, std::uint64_t seed) {
  PhaseDomain dom = PhaseDomain::decay(K1, K2, s, eps);
  GaussianReference ref = GaussianReference::loop(lat);
  ref.scale = 0.5;
  std::vector<double> hit(samples, 0.0);
  parallel_for(samples, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    hit[i] = dom.contains(sample_free_field(ref, rng)) ? 1.0 : 0.0;
  });
  DecayMassResult r;
  Estimate e = mean_estimate(hit);
  r.empirical = e.value;
  r.stderr_ = std::sqrt(std::max(e.value * (1 - e.value), 0.0) / double(std::max<std::size_t>(samples, 1)));
  r.bound = decay_mass_bound(K1, K2, s);
  r.bound_positive = r.bound > 0;
  r.hypothesis = K2 > 5 && K2 * std::exp(K2 * K2 / 2) > 4;
  return r;
}

}  // namespace gibbslab
