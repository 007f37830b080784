#include "gibbslab/flow.hpp"

#include <cmath>
#include <sstream>

namespace gibbslab {

int FlowConfig::steps() const { return int(std::llround(T / dt)); }

void FlowConfig::validate() const {
  if (!(dt > 0) || !(T > 0)) throw std::invalid_argument("flow needs dt > 0 and T > 0");
  if (dt > T) throw std::invalid_argument("flow needs dt <= T");
  if (stride < 1) throw std::invalid_argument("record stride must be >= 1");
}

namespace {

constexpr cplx I(0, 1);

double rel_drift(const std::vector<double>& x, double floor) {
  if (x.empty()) return 0;
  double d = 0, ref = std::max(std::abs(x[0]), floor);
  for (double v : x) d = std::max(d, std::abs(v - x[0]) / ref);
  return d;
}

void rotate_modes(FourierField& u, double dt, const std::function<double(std::size_t)>& omega) {
  for (std::size_t i = 0; i < u.c.size(); ++i) u.c[i] *= std::exp(-I * (omega(i) * dt));
}

double gp_mass_coefficient(const ModelSpec& m, const FourierField& u) {
  double v0 = m.V.c[m.V.lattice.origin()].real();
  if (m.form == GpForm::renormalized)
    return m.lambda * m.kappa * v0 * (number_operator(u.lattice.n(), m.rho) + m.B);
  return m.lambda * v0 * u.norm_sq();
}

// Exact flow of the quadratic part.
void linear_step(const ModelSpec& m, FourierField& u, double dt) {
  const Lattice& lat = u.lattice;
  switch (m.kind) {
    case ModelKind::nls:
      rotate_modes(u, dt, [&](std::size_t i) { return lat.k_sq(i) + m.mass_shift; });
      break;
    case ModelKind::gp: {
      double c = gp_mass_coefficient(m, u) + m.mass_shift;
      rotate_modes(u, dt, [&](std::size_t i) { return lat.k_sq(i) + c; });
      break;
    }
    case ModelKind::kdv:
      for (std::size_t i = 0; i < u.c.size(); ++i) {
        double k = lat.wavevector(i)[0];
        u.c[i] *= std::exp(I * (k * k * k * dt));
      }
      break;
    case ModelKind::zakharov:
      rotate_modes(u, dt, [&](std::size_t i) { return lat.k_sq(i); });
      break;
  }
}

FourierField gp_potential_field(const ModelSpec& m, const FourierField& u) {
  FourierField W = modulus_sq(u, u.lattice.with_cutoff(2 * u.lattice.n()));
  for (std::size_t i = 0; i < W.c.size(); ++i) W.c[i] *= potential_even(m.V, W.lattice.wavevector(i));
  return W;
}

// Nonlinear vector field, dealiased and projected onto u's class.
FourierField nonlinear_field(const ModelSpec& m, const FourierField& u) {
  const FourierField* in[] = {&u};
  switch (m.kind) {
    case ModelKind::nls: {
      int p = m.p;
      FourierField f = pointwise(in, u.lattice, p - 1, [p](std::span<const cplx> z) {
        double a = std::norm(z[0]);
        return a == 0 ? cplx(0) : std::pow(a, 0.5 * (p - 2)) * z[0];
      }, u.real, u.zero_mode);
      f *= I * m.lambda;
      return f;
    }
    case ModelKind::gp: {
      FourierField W = gp_potential_field(m, u);
      const FourierField* in2[] = {&W, &u};
      FourierField f = pointwise(in2, u.lattice, 2, [](std::span<const cplx> z) { return z[0].real() * z[1]; },
                                 u.real, u.zero_mode);
      f *= I * m.lambda;
      return f;
    }
    case ModelKind::kdv: {
      FourierField sq = pointwise(in, u.lattice, 2, [](std::span<const cplx> z) { return z[0] * z[0]; },
                                  true, u.zero_mode);
      for (std::size_t i = 0; i < sq.c.size(); ++i) {
        double k = u.lattice.wavevector(i)[0];
        sq.c[i] *= -0.5 * m.lambda * I * k;
      }
      return sq;
    }
    case ModelKind::zakharov:
      break;
  }
  throw std::invalid_argument("no single-field nonlinearity for this model");
}

double diff_norm(const FourierField& a, const FourierField& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.c.size(); ++i) s += std::norm(a.c[i] - b.c[i]);
  return std::sqrt(s);
}

// y = u + dt F((u + y)/2) by fixed-point iteration.
template <class F>
FourierField midpoint(const FourierField& u, double dt, F&& field) {
  FourierField y = u;
  y.axpy(dt, field(u));
  double scale = std::sqrt(u.norm_sq()) + 1e-300;
  for (int it = 0; it < 200; ++it) {
    FourierField mid = u;
    mid += y;
    mid *= 0.5;
    FourierField next = u;
    next.axpy(dt, field(mid));
    double d = diff_norm(next, y);
    y = std::move(next);
    if (d <= 1e-15 * scale) return y;
  }
  throw FlowError("implicit midpoint did not converge; reduce dt");
}

void rotation_step(const ModelSpec& m, FourierField& u, double dt) {
  const Lattice& lat = u.lattice;
  GridBuffer g = to_grid(u, lat.side());
  if (m.kind == ModelKind::nls) {
    double e = 0.5 * (m.p - 2);
    for (auto& v : g.values) v *= std::exp(I * (m.lambda * dt * std::pow(std::norm(v), e)));
  } else {
    GridBuffer a = g;
    for (auto& v : a.values) v = std::norm(v);
    FourierField A = to_coeffs(a, lat, true, true);
    for (std::size_t i = 0; i < A.c.size(); ++i) A.c[i] *= potential_even(m.V, lat.wavevector(i));
    GridBuffer phi = to_grid(A, lat.side());
    for (std::size_t i = 0; i < g.values.size(); ++i)
      g.values[i] *= std::exp(I * (m.lambda * dt * phi.values[i].real()));
  }
  u = to_coeffs(g, lat, false, true);
}

void kdv_rk4(const ModelSpec& m, FourierField& u, double dt) {
  FourierField k1 = nonlinear_field(m, u);
  FourierField y = u;
  y.axpy(0.5 * dt, k1);
  FourierField k2 = nonlinear_field(m, y);
  y = u;
  y.axpy(0.5 * dt, k2);
  FourierField k3 = nonlinear_field(m, y);
  y = u;
  y.axpy(dt, k3);
  FourierField k4 = nonlinear_field(m, y);
  u.axpy(dt / 6, k1);
  u.axpy(dt / 3, k2);
  u.axpy(dt / 3, k3);
  u.axpy(dt / 6, k4);
}

void nonlinear_step(const ModelSpec& m, FourierField& u, double dt, NonlinearStep how) {
  if (m.lambda == 0) return;
  if (m.kind == ModelKind::kdv) {
    kdv_rk4(m, u, dt);
    return;
  }
  if (how == NonlinearStep::automatic)
    how = u.zero_mode ? NonlinearStep::rotation : NonlinearStep::midpoint;
  if (how == NonlinearStep::rotation) {
    if (!u.zero_mode) throw std::invalid_argument("phase rotation needs a field with its zero mode");
    rotation_step(m, u, dt);
  } else {
    u = midpoint(u, dt, [&](const FourierField& x) { return nonlinear_field(m, x); });
  }
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw FlowError(std::string("non-finite ") + what + " during flow step");
}

// Zakharov substeps: Schrodinger on u, free wave on (n, v), coupling with n frozen.
void zk_wave(ZakharovState& s, double h) {
  for (std::size_t i = 0; i < s.n.c.size(); ++i) {
    double k = std::sqrt(s.n.lattice.k_sq(i));
    if (k == 0) continue;
    cplx n0 = s.n.c[i], v0 = s.v.c[i];
    double c = std::cos(k * h), sn = std::sin(k * h);
    s.n.c[i] = n0 * c + v0 * (sn / k);
    s.v.c[i] = -k * n0 * sn + v0 * c;
  }
}

void zk_coupling(ZakharovState& s, double h) {
  const FourierField n = s.n;
  auto field = [&](const FourierField& x) {
    const FourierField* in[] = {&n, &x};
    FourierField f = pointwise(in, x.lattice, 2, [](std::span<const cplx> z) { return z[0].real() * z[1]; },
                               false, x.zero_mode);
    f *= -I;
    return f;
  };
  FourierField u1 = midpoint(s.u, h, field);
  FourierField mid = s.u;
  mid += u1;
  mid *= 0.5;
  FourierField A = modulus_sq(mid, s.v.lattice);
  for (std::size_t i = 0; i < s.v.c.size(); ++i) s.v.c[i] -= h * s.v.lattice.k_sq(i) * A.c[i];
  s.u = std::move(u1);
}

}  // namespace

void flow_step(const ModelSpec& model, FourierField& u, double dt, const FlowConfig& cfg) {
  if (model.kind == ModelKind::zakharov) throw std::invalid_argument("Zakharov flow needs (u, n, v)");
  if (u.lattice.dim() != model.dim) throw std::invalid_argument("field dimension does not match model");
  if (cfg.scheme == Scheme::strang) {
    linear_step(model, u, 0.5 * dt);
    nonlinear_step(model, u, dt, cfg.nonlinear);
    linear_step(model, u, 0.5 * dt);
  } else {
    linear_step(model, u, dt);
    nonlinear_step(model, u, dt, cfg.nonlinear);
  }
  check_finite(u.norm_sq(), "field");
}

void flow_step(const ModelSpec& model, ZakharovState& s, double dt, const FlowConfig& cfg) {
  if (model.kind != ModelKind::zakharov) throw std::invalid_argument("not a Zakharov model");
  if (cfg.scheme == Scheme::strang) {
    linear_step(model, s.u, 0.5 * dt);
    zk_wave(s, 0.5 * dt);
    zk_coupling(s, dt);
    zk_wave(s, 0.5 * dt);
    linear_step(model, s.u, 0.5 * dt);
  } else {
    linear_step(model, s.u, dt);
    zk_wave(s, dt);
    zk_coupling(s, dt);
  }
  check_finite(s.u.norm_sq() + s.n.norm_sq() + s.v.norm_sq(), "state");
}

double Trajectory::mass_drift() const { return rel_drift(mass, 1e-300); }
double Trajectory::energy_drift() const { return rel_drift(energy, 1.0); }

namespace {

template <class State>
Trajectory evolve_impl(const ModelSpec& model, State s, const FlowConfig& cfg,
                       std::vector<State> Trajectory::*store) {
  cfg.validate();
  Trajectory tr;
  auto record = [&](double t) {
    tr.times.push_back(t);
    if constexpr (std::is_same_v<State, ZakharovState>) tr.mass.push_back(s.u.norm_sq());
    else tr.mass.push_back(s.norm_sq());
    tr.energy.push_back(energy(model, s));
    (tr.*store).push_back(s);
  };
  record(0);
  int steps = cfg.steps();
  for (int k = 1; k <= steps; ++k) {
    try {
      flow_step(model, s, cfg.dt, cfg);
    } catch (const FlowError& e) {
      std::ostringstream os;
      os << e.what() << " (step " << k << " of " << steps << ", t=" << (k - 1) * cfg.dt << ")";
      throw FlowError(os.str());
    }
    if (k % cfg.stride == 0 || k == steps) record(k * cfg.dt);
  }
  return tr;
}

template <class State>
State advance_impl(const ModelSpec& model, State s, const FlowConfig& cfg) {
  cfg.validate();
  int steps = cfg.steps();
  for (int k = 0; k < steps; ++k) flow_step(model, s, cfg.dt, cfg);
  return s;
}

double state_diff(const FourierField& a, const FourierField& b) { return diff_norm(a, b); }
double state_diff(const ZakharovState& a, const ZakharovState& b) {
  double s = std::pow(diff_norm(a.u, b.u), 2) + std::pow(diff_norm(a.n, b.n), 2);
  double v = 0;
  for (std::size_t i = 0; i < a.v.c.size(); ++i) {
    double k2 = a.v.lattice.k_sq(i);
    if (k2 > 0) v += std::norm(a.v.c[i] - b.v.c[i]) / k2;
  }
  return std::sqrt(s + v);
}

template <class State>
OrderEstimate order_impl(const ModelSpec& model, const State& s0, const FlowConfig& cfg) {
  FlowConfig c1 = cfg, c2 = cfg, c3 = cfg;
  c2.dt = cfg.dt / 2;
  c3.dt = cfg.dt / 4;
  State a = advance_impl(model, s0, c1), b = advance_impl(model, s0, c2), c = advance_impl(model, s0, c3);
  OrderEstimate o;
  o.err_coarse = state_diff(a, b);
  o.err_fine = state_diff(b, c);
  o.order = std::log2(o.err_coarse / o.err_fine);
  return o;
}

}  // namespace

Trajectory evolve(const ModelSpec& model, const FourierField& u0, const FlowConfig& cfg) {
  return evolve_impl(model, u0, cfg, &Trajectory::states);
}

Trajectory evolve(const ModelSpec& model, const ZakharovState& s0, const FlowConfig& cfg) {
  return evolve_impl(model, s0, cfg, &Trajectory::zakharov_states);
}

FourierField advance(const ModelSpec& model, FourierField u, const FlowConfig& cfg) {
  return advance_impl(model, std::move(u), cfg);
}

ZakharovState advance(const ModelSpec& model, ZakharovState s, const FlowConfig& cfg) {
  return advance_impl(model, std::move(s), cfg);
}

OrderEstimate richardson_order(const ModelSpec& model, const FourierField& u0, const FlowConfig& cfg) {
  return order_impl(model, u0, cfg);
}

OrderEstimate richardson_order(const ModelSpec& model, const ZakharovState& s0, const FlowConfig& cfg) {
  return order_impl(model, s0, cfg);
}

InvarianceReport invariance_test(const ModelSpec& model, const SampleEnsemble& ensemble,
                                 const FlowConfig& cfg, const std::vector<TestFunctional>& functionals,
                                 double energy_tolerance) {
  cfg.validate();
  if (functionals.empty()) throw std::invalid_argument("invariance test needs functionals");
  std::size_t M = ensemble.size(), F = functionals.size();
  bool zak = model.kind == ModelKind::zakharov;
  std::vector<double> before(M * F), after(M * F), drift(M);
  parallel_for(M, [&](std::size_t i) {
    FourierField u0, u1;
    double h0, h1;
    if (zak) {
      ZakharovState s = zakharov_member(ensemble, i);
      h0 = energy(model, s);
      u0 = s.u;
      s = advance(model, std::move(s), cfg);
      h1 = energy(model, s);
      u1 = std::move(s.u);
    } else {
      u0 = ensemble.fields[i];
      h0 = energy(model, u0);
      u1 = advance(model, u0, cfg);
      h1 = energy(model, u1);
    }
    drift[i] = std::abs(h1 - h0) / std::max(std::abs(h0), 1.0);
    for (std::size_t f = 0; f < F; ++f) {
      before[i * F + f] = functionals[f].value(u0);
      after[i * F + f] = functionals[f].value(u1);
    }
  });
  InvarianceReport r;
  r.members = M;
  r.energy_tolerance = energy_tolerance;
  for (double d : drift) r.max_energy_drift = std::max(r.max_energy_drift, d);
  r.energy_ok = r.max_energy_drift <= energy_tolerance;
  std::vector<double> b(M), a(M);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t i = 0; i < M; ++i) {
      b[i] = before[i * F + f];
      a[i] = after[i * F + f];
    }
    InvarianceRow row;
    row.label = functionals[f].label;
    row.before = mean_estimate(b);
    row.after = mean_estimate(a);
    double se = std::hypot(row.before.stderr_, row.after.stderr_);
    double diff = std::abs(row.after.value - row.before.value);
    row.z = se > 0 ? diff / se : (diff > 1e-12 * (1 + std::abs(row.before.value)) ? INFINITY : 0.0);
    row.pass = row.z <= 3.0;
    r.pass = r.pass && row.pass;
    r.rows.push_back(row);
  }
  r.pass = r.pass && r.energy_ok;
  return r;
}

}  // namespace gibbslab
