#include <cmath>
#include <sstream>

#include "gibbslab/flow.hpp"

namespace gibbslab {

namespace {

constexpr cplx I(0, 1);

struct Panels {
  QuadratureRule rule;
  std::vector<std::vector<double>> S;  // S[j][l] = int_{-1}^{x_j} l_l(x) dx
  int P = 0;
  double h = 0;
};

double lagrange(const std::vector<double>& x, int l, double y) {
  double v = 1;
  for (std::size_t m = 0; m < x.size(); ++m)
    if (int(m) != l) v *= (y - x[m]) / (x[l] - x[m]);
  return v;
}

Panels make_panels(double T, const DuhamelOptions& opt) {
  if (opt.panels < 1 || opt.nodes < 1) throw std::invalid_argument("quadrature needs panels, nodes >= 1");
  Panels p;
  p.rule = gauss_legendre(opt.nodes);
  p.P = opt.panels;
  p.h = T / opt.panels;
  int g = opt.nodes;
  const auto& x = p.rule.nodes;
  p.S.assign(g, std::vector<double>(g, 0.0));
  for (int j = 0; j < g; ++j) {
    double half = 0.5 * (x[j] + 1.0);
    for (int q = 0; q < g; ++q) {
      double y = -1.0 + half * (p.rule.nodes[q] + 1.0);
      for (int l = 0; l < g; ++l) p.S[j][l] += half * p.rule.weights[q] * lagrange(x, l, y);
    }
  }
  return p;
}

void free_propagate(FourierField& f, double t) {
  for (std::size_t i = 0; i < f.c.size(); ++i) f.c[i] *= std::exp(-I * (f.lattice.k_sq(i) * t));
}

FourierField nonlinearity(const FourierField& V, double lambda, const FourierField& u) {
  FourierField W = modulus_sq(u, u.lattice.with_cutoff(2 * u.lattice.n()));
  for (std::size_t i = 0; i < W.c.size(); ++i) W.c[i] *= potential_even(V, W.lattice.wavevector(i));
  const FourierField* in[] = {&W, &u};
  FourierField f = pointwise(in, u.lattice, 2, [](std::span<const cplx> z) { return z[0].real() * z[1]; },
                             false, u.zero_mode);
  f *= I * lambda;
  return f;
}

std::vector<double> node_times(const Panels& p) {
  std::vector<double> t;
  for (int k = 0; k < p.P; ++k)
    for (double x : p.rule.nodes) t.push_back(p.h * (k + 0.5 * (x + 1.0)));
  t.push_back(p.h * p.P);
  return t;
}

TimeSeriesField phi_impl(const FourierField& phi, const FourierField& V, double lambda,
                         const Panels& p, const TimeSeriesField* w) {
  TimeSeriesField out;
  out.t = node_times(p);
  std::size_t count = out.t.size();
  int g = int(p.rule.nodes.size());
  // interaction-picture integrand e^{-i tau Lap} N(u(tau)) at every node
  std::vector<FourierField> integrand(count - 1);
  parallel_for(count - 1, [&](std::size_t a) {
    double tau = out.t[a];
    FourierField u = phi;
    free_propagate(u, tau);
    if (w) u += w->w[a];
    FourierField f = nonlinearity(V, lambda, u);
    free_propagate(f, -tau);
    integrand[a] = std::move(f);
  });
  out.w.resize(count);
  FourierField acc(phi.lattice, false, phi.zero_mode);
  for (int k = 0; k < p.P; ++k) {
    for (int j = 0; j < g; ++j) {
      FourierField v = acc;
      for (int l = 0; l < g; ++l) v.axpy(0.5 * p.h * p.S[j][l], integrand[k * g + l]);
      free_propagate(v, out.t[k * g + j]);
      out.w[k * g + j] = std::move(v);
    }
    for (int l = 0; l < g; ++l) acc.axpy(0.5 * p.h * p.rule.weights[l], integrand[k * g + l]);
  }
  free_propagate(acc, out.t.back());
  out.w.back() = std::move(acc);
  return out;
}

double sup_diff(const TimeSeriesField& a, const TimeSeriesField& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.w.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < a.w[i].c.size(); ++k) s += std::norm(a.w[i].c[k] - b.w[i].c[k]);
    d = std::max(d, std::sqrt(s));
  }
  return d;
}

double sup_norm(const TimeSeriesField& a) {
  double d = 0;
  for (const auto& f : a.w) d = std::max(d, std::sqrt(f.norm_sq()));
  return d;
}

void check_inputs(const FourierField& phi, const FourierField& V) {
  if (phi.lattice.dim() != 2 || V.lattice.dim() != 2) throw std::invalid_argument("GP Duhamel map is two dimensional");
  if (std::abs(V.c[V.lattice.origin()]) > 1e-14) throw std::invalid_argument("Duhamel map needs V(0) = 0");
}

TimeSeriesField constant_series(const std::vector<double>& t, const FourierField& f) {
  TimeSeriesField s;
  s.t = t;
  s.w.assign(t.size(), f);
  return s;
}

// max over random pairs of ||Phi(u0+w1) - Phi(u0+w2)|| / ||w1 - w2|| near `centre`
double lipschitz_quotient(const FourierField& phi, const FourierField& V, double lambda, const Panels& p,
                          const TimeSeriesField& centre, double radius, const DuhamelOptions& opt) {
  GaussianReference ref = GaussianReference::loop(phi.lattice);
  ref.zero_mode = phi.zero_mode;
  if (ref.zero_mode) ref.rho = 1;
  double q = 0;
  for (int k = 0; k < opt.lipschitz_pairs; ++k) {
    Rng rng = make_stream(opt.seed, 0xD0u + k);
    FourierField d1 = sample_free_field(ref, rng), d2 = sample_free_field(ref, rng);
    d1 *= radius / std::sqrt(std::max(d1.norm_sq(), 1e-300));
    d2 *= radius / std::sqrt(std::max(d2.norm_sq(), 1e-300));
    TimeSeriesField w1 = centre, w2 = centre;
    for (auto& f : w1.w) f += d1;
    for (auto& f : w2.w) f += d2;
    TimeSeriesField a = phi_impl(phi, V, lambda, p, &w1), b = phi_impl(phi, V, lambda, p, &w2);
    double den = sup_diff(w1, w2);
    if (den > 0) q = std::max(q, sup_diff(a, b) / den);
  }
  return q;
}

}  // namespace

TimeSeriesField duhamel_phi(const FourierField& phi, const FourierField& V, double lambda, double T,
                            const DuhamelOptions& opt, const TimeSeriesField* w) {
  check_inputs(phi, V);
  if (!(T > 0)) throw std::invalid_argument("Duhamel horizon must be positive");
  return phi_impl(phi, V, lambda, make_panels(T, opt), w);
}

FourierField duhamel_phi_at(const FourierField& phi, const FourierField& V, double lambda, double t,
                            const DuhamelOptions& opt) {
  return duhamel_phi(phi, V, lambda, t, opt).w.back();
}

DuhamelResult gp_fixed_point(const FourierField& phi, const FourierField& V, double lambda, double T,
                             const DuhamelOptions& opt) {
  check_inputs(phi, V);
  if (!(T > 0)) throw std::invalid_argument("Duhamel horizon must be positive");
  Panels p = make_panels(T, opt);
  DuhamelResult r;
  TimeSeriesField w = phi_impl(phi, V, lambda, p, nullptr);
  r.phi0_norm = sup_norm(w);
  double radius = std::max(r.phi0_norm, 1e-3 * std::sqrt(phi.norm_sq()));

  TimeSeriesField zero = constant_series(w.t, FourierField(phi.lattice, false, phi.zero_mode));
  r.contraction = lipschitz_quotient(phi, V, lambda, p, zero, radius, opt);

  // largest horizon T, T/2, T/4, ... whose sampled quotient is below 1/2
  double h = T, q = r.contraction;
  for (int k = 0; k < 8; ++k) {
    if (q < 0.5) {
      r.horizon = h;
      break;
    }
    h *= 0.5;
    Panels ph = make_panels(h, opt);
    TimeSeriesField z = constant_series(node_times(ph), zero.w[0]);
    q = lipschitz_quotient(phi, V, lambda, ph, z, radius, opt);
  }

  if (r.contraction >= 1) {
    std::ostringstream os;
    os << "contraction " << r.contraction << " >= 1 at T=" << T << "; shrink the horizon";
    if (r.horizon > 0) os << " (contracting at T=" << r.horizon << ")";
    r.note = os.str();
  }

  for (int it = 1; it < opt.max_iter; ++it) {
    TimeSeriesField next = phi_impl(phi, V, lambda, p, &w);
    double res = sup_diff(next, w);
    r.residuals.push_back(res);
    w = std::move(next);
    if (res <= opt.tol) {
      r.converged = true;
      break;
    }
    if (!std::isfinite(res) || (r.residuals.size() > 5 && res > 1e6 * r.residuals.front())) break;
  }
  if (r.residuals.size() >= 2) {
    double lr = 0;
    int cnt = 0;
    for (std::size_t i = 1; i < r.residuals.size(); ++i)
      if (r.residuals[i] > 0 && r.residuals[i - 1] > 0) {
        lr += std::log(r.residuals[i] / r.residuals[i - 1]);
        ++cnt;
      }
    r.residual_ratio = cnt ? std::exp(lr / cnt) : 0.0;
  }
  if (!r.converged && r.note.empty()) r.note = "fixed-point iteration did not reach tolerance";
  r.w_norm = sup_norm(w);
  r.w = w.w.back();
  r.u = phi;
  free_propagate(r.u, T);
  r.u += r.w;
  r.series = std::move(w);
  return r;
}

}  // namespace gibbslab
