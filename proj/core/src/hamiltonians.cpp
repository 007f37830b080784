#include "gibbslab/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gibbslab {

namespace {

constexpr double pi = std::numbers::pi;

double kinetic(const FourierField& u) {
  double s = 0;
  for (std::size_t i = 0; i < u.c.size(); ++i) s += u.lattice.k_sq(i) * std::norm(u.c[i]);
  return 0.5 * s;
}

double kinetic_form(const FourierField& v) { return 2.0 * kinetic(v); }

Lattice doubled(const Lattice& lat) { return lat.with_cutoff(2 * lat.n()); }

void check_pair(const FourierField& u, const FourierField& v) {
  if (!(u.lattice == v.lattice)) throw std::invalid_argument("fields live on different lattices");
}

void check_dim(const ModelSpec& m, const FourierField& u) {
  if (u.lattice.dim() != m.dim)
    throw std::invalid_argument("model is " + std::to_string(m.dim) + "D but field is " +
                                std::to_string(u.lattice.dim()) + "D");
}

double power_mean(const FourierField& u, int p) {
  const FourierField* in[] = {&u};
  return grid_integral(in, p, [p](std::span<const cplx> z) {
    double a = std::norm(z[0]);
    return p % 2 == 0 ? std::pow(a, p / 2) : std::pow(a, 0.5 * p);
  });
}

double cube_mean(const FourierField& u) {
  const FourierField* in[] = {&u};
  return grid_integral(in, 3, [](std::span<const cplx> z) { return std::pow(z[0].real(), 3); });
}

// sum_m Re V(m) f(m) conj(g(m)) over the potential's support.
double potential_pairing(const FourierField& V, const FourierField& f, const FourierField& g) {
  double s = 0;
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    auto m = f.lattice.wavevector(i);
    double w = potential_even(V, m);
    if (w != 0) s += w * (f.c[i] * std::conj(g.c[i])).real();
  }
  return s;
}

double wick_coefficient(const ModelSpec& m, const Lattice& lat) {
  return m.lambda * m.kappa * m.V.c[m.V.lattice.origin()].real() *
         (number_operator(lat.n(), m.rho) + m.B);
}

double v_zero(const ModelSpec& m) { return m.V.c[m.V.lattice.origin()].real(); }

}  // namespace

ModelSpec ModelSpec::nls(int p, double lambda, int dim) {
  ModelSpec m;
  m.kind = ModelKind::nls;
  m.p = p;
  m.lambda = lambda;
  m.dim = dim;
  m.validate();
  return m;
}

ModelSpec ModelSpec::kdv(double lambda) {
  ModelSpec m;
  m.kind = ModelKind::kdv;
  m.p = 3;
  m.lambda = lambda;
  m.validate();
  return m;
}

ModelSpec ModelSpec::zakharov(double B) {
  ModelSpec m;
  m.kind = ModelKind::zakharov;
  m.p = 4;
  m.lambda = 1.0;
  m.B = B;
  m.validate();
  return m;
}

ModelSpec ModelSpec::gp(FourierField V, double lambda, double kappa, double rho, double B,
                        GpForm form) {
  ModelSpec m;
  m.kind = ModelKind::gp;
  m.dim = 2;
  m.p = 4;
  m.V = std::move(V);
  m.lambda = lambda;
  m.kappa = kappa;
  m.rho = rho;
  m.B = B;
  m.form = form;
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  switch (kind) {
    case ModelKind::nls:
      if (p < 2 || p > 8) throw std::invalid_argument("NLS exponent must lie in [2, 8]");
      if (dim != 1 && dim != 2) throw std::invalid_argument("NLS dimension must be 1 or 2");
      break;
    case ModelKind::kdv:
      if (lambda < 0) throw std::invalid_argument("KdV needs lambda >= 0");
      if (dim != 1) throw std::invalid_argument("KdV is one dimensional");
      break;
    case ModelKind::zakharov:
      if (dim != 1) throw std::invalid_argument("Zakharov is one dimensional");
      if (B <= 0) throw std::invalid_argument("Zakharov needs a positive mass radius B");
      break;
    case ModelKind::gp:
      if (dim != 2) throw std::invalid_argument("GP is two dimensional");
      if (V.c.empty() || V.lattice.dim() != 2) throw std::invalid_argument("GP needs a 2D potential");
      if (!V.hermitian(1e-12)) throw std::invalid_argument("GP potential must be real valued");
      if (form == GpForm::renormalized && rho <= 0)
        throw std::invalid_argument("renormalized GP needs rho > 0");
      break;
  }
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::nls: return "nls";
    case ModelKind::kdv: return "kdv";
    case ModelKind::zakharov: return "zakharov";
    case ModelKind::gp: return "gp";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "nls") return ModelKind::nls;
  if (s == "kdv") return ModelKind::kdv;
  if (s == "zakharov") return ModelKind::zakharov;
  if (s == "gp") return ModelKind::gp;
  throw std::invalid_argument("unknown model '" + s + "'");
}

double number_operator(int n, double rho) {
  if (n < 0 || rho <= 0) throw std::invalid_argument("number_operator needs n >= 0, rho > 0");
  double s = 0;
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b) s += 2.0 / (double(a) * a + double(b) * b + rho);
  return s;
}

double potential_even(const FourierField& V, std::array<int, 2> m) {
  if (!V.lattice.contains(m[0], m[1])) return 0.0;
  return V.c[V.lattice.index(m[0], m[1])].real();
}

double sup_abs_potential(const FourierField& V) {
  GridBuffer g = to_grid(V, fft_friendly(16 * V.lattice.side()));
  double s = 0;
  for (auto& z : g.values) s = std::max(s, std::abs(z));
  return s;
}

FourierField cosine_potential(const Lattice& lat) {
  if (lat.dim() != 2 || lat.n() < 1) throw std::invalid_argument("cosine potential needs a 2D lattice");
  FourierField V(lat, true, true);
  V.at(1, 0) = V.at(-1, 0) = V.at(0, 1) = V.at(0, -1) = 0.5;
  return V;
}

FourierField soft_sphere_potential(const Lattice& lat, double height, double width) {
  if (lat.dim() != 2) throw std::invalid_argument("soft sphere potential needs a 2D lattice");
  if (!(width > 0)) throw std::invalid_argument("soft sphere width must be positive");
  FourierField V(lat, true, true);
  for (std::size_t i = 0; i < V.c.size(); ++i)
    V.c[i] = height * width * width / (2 * pi) * std::exp(-0.5 * width * width * lat.k_sq(i));
  return V;
}

ZakharovCanonical to_canonical(const ZakharovState& s) {
  const double r2 = std::sqrt(2.0);
  ZakharovCanonical c;
  c.u = s.u;
  FourierField A = modulus_sq(s.u, s.n.lattice);
  c.n_tilde = s.n;
  c.n_tilde += A;
  c.n_tilde *= 1.0 / r2;
  c.n_tilde.real = true;
  c.W = FourierField(s.v.lattice, true, false);
  for (std::size_t i = 0; i < s.v.c.size(); ++i) {
    int k = s.v.lattice.wavevector(i)[0];
    if (k != 0) c.W.c[i] = -s.v.c[i] / (double(k) * k * r2);
  }
  return c;
}

ZakharovState from_canonical(const ZakharovCanonical& c) {
  const double r2 = std::sqrt(2.0);
  ZakharovState s;
  s.u = c.u;
  FourierField A = modulus_sq(c.u, c.n_tilde.lattice);
  s.n = r2 * c.n_tilde;
  s.n -= A;
  s.n.real = true;
  s.v = FourierField(c.W.lattice, true, false);
  for (std::size_t i = 0; i < c.W.c.size(); ++i) {
    int k = c.W.lattice.wavevector(i)[0];
    s.v.c[i] = -double(k) * k * r2 * c.W.c[i];
  }
  return s;
}

double energy(const ModelSpec& m, const FourierField& u) {
  check_dim(m, u);
  double h = kinetic(u) + 0.5 * m.mass_shift * u.norm_sq();
  switch (m.kind) {
    case ModelKind::nls:
      return h - m.lambda / m.p * power_mean(u, m.p);
    case ModelKind::kdv:
      return h - m.lambda / 6.0 * cube_mean(u);
    case ModelKind::gp: {
      FourierField A = modulus_sq(u, doubled(u.lattice));
      double inter = 0.25 * m.lambda * potential_pairing(m.V, A, A);
      double mass = u.norm_sq();
      if (m.form == GpForm::renormalized) return h - inter + 0.5 * wick_coefficient(m, u.lattice) * mass;
      return h - inter + 0.25 * m.lambda * v_zero(m) * mass * mass;
    }
    case ModelKind::zakharov:
      throw std::invalid_argument("Zakharov energy needs the full (u, n, v) state");
  }
  return 0;
}

double energy(const ModelSpec& m, const ZakharovState& s) {
  if (m.kind != ModelKind::zakharov) throw std::invalid_argument("not a Zakharov model");
  FourierField A = modulus_sq(s.u, s.n.lattice);
  double e = kinetic(s.u) + 0.25 * s.n.norm_sq() + 0.5 * inner(s.n, A);
  double wv = 0;
  for (std::size_t i = 0; i < s.v.c.size(); ++i) {
    double k2 = s.v.lattice.k_sq(i);
    if (k2 > 0) wv += std::norm(s.v.c[i]) / k2;
  }
  return e + 0.25 * wv;
}

double zakharov_energy_canonical(const ZakharovCanonical& c) {
  return kinetic(c.u) - 0.25 * power_mean(c.u, 4) + 0.5 * c.n_tilde.norm_sq() + kinetic(c.W);
}

double gibbs_potential(const ModelSpec& m, const FourierField& u) {
  if (m.kind == ModelKind::zakharov) return 0.25 * power_mean(u, 4);
  return kinetic(u) - energy(m, u);
}

FourierField gradient(const ModelSpec& m, const FourierField& u) {
  check_dim(m, u);
  FourierField g = u;
  for (std::size_t i = 0; i < g.c.size(); ++i) g.c[i] *= u.lattice.k_sq(i) + m.mass_shift;
  const FourierField* in[] = {&u};
  switch (m.kind) {
    case ModelKind::nls: {
      int p = m.p;
      FourierField nl = pointwise(in, u.lattice, p - 1, [p](std::span<const cplx> z) {
        double a = std::norm(z[0]);
        return a == 0 ? cplx(0) : std::pow(a, 0.5 * (p - 2)) * z[0];
      }, u.real, u.zero_mode);
      g.axpy(-m.lambda, nl);
      break;
    }
    case ModelKind::kdv: {
      FourierField sq = pointwise(in, u.lattice, 2, [](std::span<const cplx> z) {
        return cplx(z[0].real() * z[0].real());
      }, true, u.zero_mode);
      g.axpy(-0.5 * m.lambda, sq);
      break;
    }
    case ModelKind::gp: {
      FourierField W = modulus_sq(u, doubled(u.lattice));
      for (std::size_t i = 0; i < W.c.size(); ++i) W.c[i] *= potential_even(m.V, W.lattice.wavevector(i));
      const FourierField* in2[] = {&W, &u};
      FourierField nl = pointwise(in2, u.lattice, 2, [](std::span<const cplx> z) {
        return z[0].real() * z[1];
      }, false, u.zero_mode);
      g.axpy(-m.lambda, nl);
      double mass_coef = m.form == GpForm::renormalized ? wick_coefficient(m, u.lattice)
                                                         : m.lambda * v_zero(m) * u.norm_sq();
      g.axpy(mass_coef, u);
      break;
    }
    case ModelKind::zakharov:
      throw std::invalid_argument("Zakharov gradient needs the full (u, n, v) state");
  }
  return g;
}

ZakharovState gradient(const ModelSpec& m, const ZakharovState& s) {
  if (m.kind != ModelKind::zakharov) throw std::invalid_argument("not a Zakharov model");
  ZakharovState g;
  g.u = s.u;
  for (std::size_t i = 0; i < g.u.c.size(); ++i) g.u.c[i] *= s.u.lattice.k_sq(i);
  const FourierField* in[] = {&s.n, &s.u};
  FourierField nu = pointwise(in, s.u.lattice, 2, [](std::span<const cplx> z) {
    return z[0].real() * z[1];
  }, false, true);
  g.u += nu;
  g.n = s.n;
  g.n += modulus_sq(s.u, s.n.lattice);
  g.n *= 0.5;
  g.v = s.v;
  for (std::size_t i = 0; i < g.v.c.size(); ++i) {
    double k2 = s.v.lattice.k_sq(i);
    g.v.c[i] = k2 > 0 ? 0.5 * s.v.c[i] / k2 : cplx(0);
  }
  return g;
}

HessianProbe hessian_quadratic_form(const ModelSpec& m, const FourierField& u,
                                    const FourierField& v) {
  check_pair(u, v);
  check_dim(m, u);
  HessianProbe h;
  h.kinetic = kinetic_form(v) + m.mass_shift * v.norm_sq();
  const FourierField* in[] = {&u, &v};
  switch (m.kind) {
    case ModelKind::nls: {
      int p = m.p;
      double q = 0.5 * p;
      double form = grid_integral(in, p, [q](std::span<const cplx> z) {
        double a = std::norm(z[0]);
        double b = 2.0 * (std::conj(z[0]) * z[1]).real();
        double c = std::norm(z[1]);
        double t1 = (q - 1.0) == 0 || a == 0 ? 0.0 : 0.5 * (q - 1.0) * std::pow(a, q - 2.0) * b * b;
        double t2 = q == 1.0 ? c : (a == 0 ? 0.0 : std::pow(a, q - 1.0) * c);
        return t1 + t2;
      });
      h.interaction = -m.lambda * form;
      break;
    }
    case ModelKind::kdv:
      h.interaction = -m.lambda * grid_integral(in, 3, [](std::span<const cplx> z) {
        return z[0].real() * z[1].real() * z[1].real();
      });
      break;
    case ModelKind::gp: {
      Lattice L2 = doubled(u.lattice);
      FourierField A = modulus_sq(u, L2);
      FourierField C = modulus_sq(v, L2);
      FourierField Bf = pointwise(in, L2, 2, [](std::span<const cplx> z) {
        return cplx(2.0 * (std::conj(z[0]) * z[1]).real());
      }, true, true);
      double u2 = potential_pairing(m.V, Bf, Bf) + 2.0 * potential_pairing(m.V, A, C);
      h.interaction = -0.5 * m.lambda * u2;
      if (m.form == GpForm::renormalized) {
        h.kinetic += wick_coefficient(m, u.lattice) * v.norm_sq();
      } else {
        double uv = inner(u, v);
        h.interaction += m.lambda * v_zero(m) * (2.0 * uv * uv + u.norm_sq() * v.norm_sq());
      }
      break;
    }
    case ModelKind::zakharov:
      throw std::invalid_argument("Zakharov Hessian needs the full (u, n, v) state");
  }
  h.value = h.kinetic + h.interaction;
  return h;
}

HessianProbe hessian_quadratic_form(const ModelSpec& m, const ZakharovState& s,
                                    const ZakharovState& d) {
  if (m.kind != ModelKind::zakharov) throw std::invalid_argument("not a Zakharov model");
  HessianProbe h;
  double wv = 0;
  for (std::size_t i = 0; i < d.v.c.size(); ++i) {
    double k2 = d.v.lattice.k_sq(i);
    if (k2 > 0) wv += std::norm(d.v.c[i]) / k2;
  }
  h.kinetic = kinetic_form(d.u) + 0.5 * d.n.norm_sq() + 0.5 * wv;
  const FourierField* in[] = {&s.u, &d.u, &s.n, &d.n};
  h.interaction = grid_integral(in, 3, [](std::span<const cplx> z) {
    double b = 2.0 * (std::conj(z[0]) * z[1]).real();
    return z[2].real() * std::norm(z[1]) + z[3].real() * b;
  });
  h.value = h.kinetic + h.interaction;
  return h;
}

IdentitySides nls_convexity_identity(const FourierField& f, const FourierField& g,
                                     const FourierField& p, const FourierField& q, double t) {
  if (!(t > 0 && t < 1)) throw std::invalid_argument("convexity identity needs 0 < t < 1");
  const FourierField* in[] = {&f, &g, &p, &q};
  IdentitySides r;
  r.lhs = grid_integral(in, 4, [t](std::span<const cplx> z) {
    double F = z[0].real(), G = z[1].real(), P = z[2].real(), Q = z[3].real();
    double a = F * F + G * G, b = P * P + Q * Q;
    double x = t * F + (1 - t) * P, y = t * G + (1 - t) * Q;
    double c = x * x + y * y;
    return t * a * a + (1 - t) * b * b - c * c;
  });
  r.rhs = grid_integral(in, 4, [t](std::span<const cplx> z) {
    double F = z[0].real(), G = z[1].real(), P = z[2].real(), Q = z[3].real();
    double s = 1 - t, w = t * s;
    double dfp = F - P, dgq = G - Q;
    double e = w * dfp * dfp * ((1 + t + t * t) * F * F + (2 + 2 * t - 2 * t * t) * F * P +
                                (2 - t + s * s) * P * P);
    e += w * dgq * dgq * ((1 + t + t * t) * G * G + (2 + 2 * t - 2 * t * t) * G * Q +
                          (2 - t + s * s) * Q * Q);
    e += 2 * w * dfp * dgq * (F + P) * ((1 + t) * G + s * Q);
    e += 2 * w * dgq * dgq * P * P;
    double m = t * G + s * Q;
    e += 2 * w * dfp * dfp * m * m;
    return e;
  });
  return r;
}

MarginResult convexity_margin(const ModelSpec& m, const FourierField& u, const FourierField& v,
                              double t, double N) {
  check_pair(u, v);
  if (!(t > 0 && t < 1)) throw std::invalid_argument("convexity margin needs 0 < t < 1");
  FourierField mid = t * u;
  mid.axpy(1 - t, v);
  MarginResult r;
  r.gap = t * energy(m, u) + (1 - t) * energy(m, v) - energy(m, mid);
  FourierField w = u - v;
  double dw = kinetic_form(w);
  double ts = t * (1 - t);
  if (m.lambda == 0 && m.mass_shift == 0) {
    r.bound = 0.5 * ts * dw;
  } else if (m.kind == ModelKind::nls && m.p == 6 && m.mass_shift > 0) {
    r.bound = 0.5 * ts * (0.5 * dw + 0.5 * w.norm_sq());
  } else {
    auto alpha = lsi_constant_predicted(m, N);
    bool closed = (m.kind == ModelKind::nls && m.p == 4 && m.dim == 1) || m.kind == ModelKind::kdv ||
                  (m.kind == ModelKind::gp && m.form == GpForm::renormalized);
    if (alpha && closed) {
      double a = m.kind == ModelKind::gp ? 1.0 : *alpha;
      r.bound = 0.5 * ts * a * dw;
    } else {
      r.in_regime = false;
      r.bound = 0;
    }
  }
  r.margin = r.gap - r.bound;
  return r;
}

std::optional<double> lsi_constant_predicted(const ModelSpec& m, double N) {
  switch (m.kind) {
    case ModelKind::nls:
      if (m.lambda == 0) return 1.0;
      if (m.p == 4 && m.dim == 1 && m.lambda > 0 && m.lambda * N < 3.0 / (14.0 * pi * pi))
        return 1.0 - 14.0 * pi * pi * N * m.lambda / 3.0;
      if (m.p == 6 && m.dim == 1 && m.mass_shift > 0 && m.lambda > 0 && m.lambda <= 1)
        return 0.5 * std::exp(-N * m.mass_shift);
      return std::nullopt;
    case ModelKind::kdv:
      if (m.lambda * std::sqrt(N) < 3.0 / (pi * pi)) return 1.0 - pi * pi * m.lambda * std::sqrt(N) / 3.0;
      return std::nullopt;
    case ModelKind::zakharov:
      if (m.B < 3.0 / (14.0 * pi * pi)) return 1.0 - 14.0 * pi * pi * m.B / 3.0;
      return std::nullopt;
    case ModelKind::gp:
      if (m.lambda == 0) return 1.0;
      if (m.form == GpForm::renormalized && m.kappa * v_zero(m) > 3.0 * sup_abs_potential(m.V))
        return 0.5;
      return std::nullopt;
  }
  return std::nullopt;
}

double critical_mass_shift(double N0, double kappa, double s) {
  if (!(s > 0.25 && s < 0.5)) throw std::invalid_argument("mass shift needs 1/4 < s < 1/2");
  double base = std::pow(40.0, 4 * s + 1) * std::pow(2 * pi * kappa, 4) / 9.0;
  return 2.0 * N0 * N0 * std::pow(base, 1.0 / (4 * s - 1));
}

BlockProbeReport block_convexity_probe(std::array<int, 2> J, const ModelSpec& m, double N,
                                       int trials, const Lattice& lat, std::uint64_t seed) {
  if (m.kind != ModelKind::nls) throw std::invalid_argument("block probe is defined for NLS");
  if (lat.dim() != m.dim) throw std::invalid_argument("lattice/model dimension mismatch");
  int D = lat.dim();
  std::vector<std::size_t> block;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    auto k = lat.wavevector(i);
    bool in = in_dyadic_block(J[0], k[0]) && (D == 1 || in_dyadic_block(J[1], k[1]));
    if (in) block.push_back(i);
  }
  std::size_t expect = dyadic_block_size(J[0]) * (D == 2 ? dyadic_block_size(J[1]) : 1);
  if (block.empty() || block.size() != expect)
    throw std::invalid_argument("dyadic block is empty or not contained in the lattice");
  BlockProbeReport r;
  r.block_size = block.size();
  r.trials = trials;
  r.kinetic_floor = 1e300;
  for (auto i : block) r.kinetic_floor = std::min(r.kinetic_floor, lat.k_sq(i));
  r.scaling = 0.25 * D * std::pow(double(block.size()), 2.0 / D);
  r.min_ratio = 1e300;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_stream(seed, std::uint64_t(t));
    FourierField u(lat), v(lat);
    for (auto i : block) {
      u.c[i] = cplx(gauss(rng), gauss(rng));
      v.c[i] = cplx(gauss(rng), gauss(rng));
    }
    double radius = std::sqrt(N) * std::pow(unif(rng), 1.0 / (2.0 * block.size()));
    u *= radius / std::sqrt(u.norm_sq());
    double ratio = hessian_quadratic_form(m, u, v).value / v.norm_sq();
    r.min_ratio = std::min(r.min_ratio, ratio);
  }
  return r;
}

}  // namespace gibbslab
