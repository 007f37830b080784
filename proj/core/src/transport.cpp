#include "gibbslab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gibbslab {

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<std::vector<double>> points) {
  EmpiricalMeasure m;
  std::size_t n = points.size();
  m.points = std::move(points);
  m.weights.assign(n, n ? 1.0 / double(n) : 0.0);
  return m;
}

EmpiricalMeasure EmpiricalMeasure::from_fields(const std::vector<FourierField>& fields, const Lattice& common) {
  std::vector<std::vector<double>> pts(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    FourierField f = fields[i].lattice == common ? fields[i] : resample(fields[i], common);
    pts[i].resize(2 * f.c.size());
    for (std::size_t k = 0; k < f.c.size(); ++k) {
      pts[i][2 * k] = f.c[k].real();
      pts[i][2 * k + 1] = f.c[k].imag();
    }
  }
  EmpiricalMeasure m = uniform(std::move(pts));
  m.k_sq.resize(2 * common.size());
  for (std::size_t k = 0; k < common.size(); ++k) m.k_sq[2 * k] = m.k_sq[2 * k + 1] = common.k_sq(k);
  return m;
}

void EmpiricalMeasure::validate() const {
  if (points.size() != weights.size()) throw std::invalid_argument("points and weights differ in length");
  double s = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("negative weight in empirical measure");
    s += w;
  }
  if (!points.empty() && std::abs(s - 1) > 1e-12) throw std::invalid_argument("weights must sum to 1");
  for (const auto& p : points)
    if (p.size() != points[0].size()) throw std::invalid_argument("points of different dimension");
}

double CostSpec::distance(const EmpiricalMeasure& a, std::size_t i, const EmpiricalMeasure& b, std::size_t j) const {
  const auto& x = a.points[i];
  const auto& y = b.points[j];
  double acc = 0;
  bool weighted = ground == Ground::h_minus && s > 0;
  if (weighted && a.k_sq.size() != x.size()) throw std::invalid_argument("H^{-s} cost needs field coordinates");
  for (std::size_t k = 0; k < x.size(); ++k) {
    double d = x[k] - y[k];
    double w = 1;
    if (weighted && a.k_sq[k] > 0) w = std::pow(a.k_sq[k], -s);
    acc += w * d * d;
  }
  return std::sqrt(acc);
}

double CostSpec::cost(const EmpiricalMeasure& a, std::size_t i, const EmpiricalMeasure& b, std::size_t j) const {
  double d = distance(a, i, b, j);
  return order == 2 ? d * d : std::pow(d, order);
}

namespace {

std::vector<double> cost_matrix(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost) {
  mu.validate();
  nu.validate();
  std::size_t n = mu.size(), m = nu.size();
  std::vector<double> C(n * m);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < m; ++j) C[i * m + j] = cost.cost(mu, i, nu, j);
  });
  return C;
}

void finish_plan(TransportPlan& p, const std::vector<double>& C, const std::vector<double>& a,
                 const std::vector<double>& b) {
  p.objective = 0;
  p.row_residual = p.col_residual = 0;
  std::vector<double> col(p.cols, 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    double r = 0;
    for (std::size_t j = 0; j < p.cols; ++j) {
      double v = p.pi[i * p.cols + j];
      r += v;
      col[j] += v;
      p.objective += v * C[i * p.cols + j];
    }
    p.row_residual += std::abs(r - a[i]);
  }
  for (std::size_t j = 0; j < p.cols; ++j) p.col_residual += std::abs(col[j] - b[j]);
}

double root(double x, double order) { return order == 2 ? std::sqrt(std::max(x, 0.0)) : std::pow(std::max(x, 0.0), 1 / order); }

double lse(const std::vector<double>& x) {
  double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

TransportResult transport_exact(const std::vector<double>& C, const std::vector<double>& a,
                                const std::vector<double>& b, double order) {
  std::size_t n = a.size(), m = b.size();
  if (C.size() != n * m) throw std::invalid_argument("cost matrix shape mismatch");
  if (n > kExactTransportLimit || m > kExactTransportLimit)
    throw std::invalid_argument("exact transport is limited to 256 atoms; use sinkhorn");
  const double inf = std::numeric_limits<double>::infinity();
  const double tol = 1e-15;
  std::vector<double> flow(n * m, 0.0), supply = a, demand = b;
  std::vector<double> ps(n, 0.0), pt(m, inf);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) pt[j] = std::min(pt[j], C[i * m + j]);
  if (m == 0) pt.clear();

  std::vector<double> ds(n), dt(m);
  std::vector<long> prev_s(n), prev_t(m);
  std::vector<char> vs(n), vt(m);
  for (int guard = 0; guard < int(10 * (n + m) * (n + m)) + 100; ++guard) {
    double left = 0;
    for (double s : supply) left += s;
    if (left <= 1e-13) break;
    std::fill(ds.begin(), ds.end(), inf);
    std::fill(dt.begin(), dt.end(), inf);
    std::fill(vs.begin(), vs.end(), 0);
    std::fill(vt.begin(), vt.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (supply[i] > tol) {
        ds[i] = 0;
        prev_s[i] = -1;
      }
    long target = -1;
    double D = inf;
    while (true) {
      // closest unvisited node
      double best = inf;
      long bi = -1;
      bool is_sink = false;
      for (std::size_t i = 0; i < n; ++i)
        if (!vs[i] && ds[i] < best) best = ds[i], bi = long(i), is_sink = false;
      for (std::size_t j = 0; j < m; ++j)
        if (!vt[j] && dt[j] < best) best = dt[j], bi = long(j), is_sink = true;
      if (bi < 0) break;
      if (is_sink) {
        vt[bi] = 1;
        if (demand[bi] > tol) {
          target = bi;
          D = best;
          break;
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (vs[i] || flow[i * m + bi] <= tol) continue;
          double nd = best - C[i * m + bi] + pt[bi] - ps[i];
          if (nd < ds[i]) ds[i] = nd, prev_s[i] = bi;
        }
      } else {
        vs[bi] = 1;
        for (std::size_t j = 0; j < m; ++j) {
          if (vt[j]) continue;
          double nd = best + C[bi * m + j] + ps[bi] - pt[j];
          if (nd < dt[j]) dt[j] = nd, prev_t[j] = bi;
        }
      }
    }
    if (target < 0) break;
    for (std::size_t i = 0; i < n; ++i) ps[i] += std::min(ds[i], D);
    for (std::size_t j = 0; j < m; ++j) pt[j] += std::min(dt[j], D);
    // bottleneck along the path
    double delta = demand[target];
    long j = target;
    long i = prev_t[j];
    while (true) {
      if (prev_s[i] < 0) {
        delta = std::min(delta, supply[i]);
        break;
      }
      long jp = prev_s[i];
      delta = std::min(delta, flow[i * m + jp]);
      j = jp;
      i = prev_t[j];
    }
    j = target;
    i = prev_t[j];
    demand[target] -= delta;
    while (true) {
      flow[i * m + j] += delta;
      if (prev_s[i] < 0) {
        supply[i] -= delta;
        break;
      }
      long jp = prev_s[i];
      flow[i * m + jp] -= delta;
      j = jp;
      i = prev_t[j];
    }
  }
  TransportResult r;
  r.plan.rows = n;
  r.plan.cols = m;
  r.plan.pi = std::move(flow);
  finish_plan(r.plan, C, a, b);
  r.value = root(r.plan.objective, order);
  return r;
}

TransportResult wasserstein_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost) {
  if (mu.size() > kExactTransportLimit || nu.size() > kExactTransportLimit)
    throw std::invalid_argument("exact transport is limited to 256 atoms; use sinkhorn");
  return transport_exact(cost_matrix(mu, nu, cost), mu.weights, nu.weights, cost.order);
}

SinkhornResult sinkhorn(const std::vector<double>& C, const std::vector<double>& a, const std::vector<double>& b,
                        double order, const SinkhornOptions& opt) {
  std::size_t n = a.size(), m = b.size();
  if (C.size() != n * m) throw std::invalid_argument("cost matrix shape mismatch");
  if (!(opt.eps > 0)) throw std::invalid_argument("sinkhorn needs eps > 0");
  SinkhornResult r;
  double cmax = 0, cmean = 0;
  for (double c : C) {
    cmax = std::max(cmax, c);
    cmean += c;
  }
  cmean /= double(std::max<std::size_t>(C.size(), 1));
  double eps_final = opt.eps * (cmean > 0 ? cmean : 1.0);
  double eps = std::max(cmax, eps_final);
  std::vector<double> la(n), lb(m), f(n, 0.0), g(m, 0.0), tmp;
  for (std::size_t i = 0; i < n; ++i) la[i] = a[i] > 0 ? std::log(a[i]) : -INFINITY;
  for (std::size_t j = 0; j < m; ++j) lb[j] = b[j] > 0 ? std::log(b[j]) : -INFINITY;
  auto row_residual = [&](double e) {
    double res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == 0) continue;
      double s = 0;
      for (std::size_t j = 0; j < m; ++j)
        if (b[j] > 0) s += std::exp((f[i] + g[j] - C[i * m + j]) / e + la[i] + lb[j]);
      res += std::abs(s - a[i]);
    }
    return res;
  };
  int it = 0;
  bool last = false;
  while (true) {
    last = eps <= eps_final * (1 + 1e-12);
    double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-4);
    bool ok = false;
    while (it < opt.max_iter) {
      ++it;
      tmp.resize(m);
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < m; ++j) tmp[j] = (g[j] - C[i * m + j]) / eps + lb[j];
        f[i] = -eps * lse(tmp);
      }
      tmp.resize(n);
      for (std::size_t j = 0; j < m; ++j) {
        if (b[j] == 0) continue;
        for (std::size_t i = 0; i < n; ++i) tmp[i] = (f[i] - C[i * m + j]) / eps + la[i];
        g[j] = -eps * lse(tmp);
      }
      if (it % 10 == 0 && row_residual(eps) < stage_tol) {
        ok = true;
        break;
      }
    }
    if (last) {
      r.converged = ok;
      break;
    }
    if (it >= opt.max_iter) break;
    eps = std::max(eps * opt.scaling, eps_final);
  }
  r.iterations = it;
  r.eps = eps;
  r.plan.rows = n;
  r.plan.cols = m;
  r.plan.pi.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (a[i] > 0 && b[j] > 0)
        r.plan.pi[i * m + j] = std::exp((f[i] + g[j] - C[i * m + j]) / eps + la[i] + lb[j]);
  finish_plan(r.plan, C, a, b);
  r.entropic = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] > 0) r.entropic += a[i] * f[i];
  for (std::size_t j = 0; j < m; ++j)
    if (b[j] > 0) r.entropic += b[j] * g[j];
  r.value = root(r.plan.objective, order);
  if (!r.converged)
    r.note = "no convergence in max_iter; row residual " + std::to_string(r.plan.row_residual);
  return r;
}

SinkhornResult sinkhorn(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost,
                        const SinkhornOptions& opt) {
  return sinkhorn(cost_matrix(mu, nu, cost), mu.weights, nu.weights, cost.order, opt);
}

DebiasedResult sinkhorn_divergence(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const CostSpec& cost,
                                   const SinkhornOptions& opt) {
  auto Cxy = cost_matrix(mu, nu, cost);
  auto Cxx = cost_matrix(mu, mu, cost);
  auto Cyy = cost_matrix(nu, nu, cost);
  double mean = 0;
  for (double c : Cxy) mean += c;
  mean /= double(std::max<std::size_t>(Cxy.size(), 1));
  // one absolute eps for all three problems
  SinkhornOptions o = opt;
  auto rel = [&](const std::vector<double>& C) {
    double s = 0;
    for (double c : C) s += c;
    s /= double(std::max<std::size_t>(C.size(), 1));
    return s > 0 ? opt.eps * (mean > 0 ? mean : 1.0) / s : opt.eps;
  };
  o.eps = opt.eps;
  auto xy = sinkhorn(Cxy, mu.weights, nu.weights, cost.order, o);
  o.eps = rel(Cxx);
  auto xx = sinkhorn(Cxx, mu.weights, mu.weights, cost.order, o);
  o.eps = rel(Cyy);
  auto yy = sinkhorn(Cyy, nu.weights, nu.weights, cost.order, o);
  DebiasedResult d;
  d.raw = xy.entropic;
  d.divergence = xy.entropic - 0.5 * (xx.entropic + yy.entropic);
  d.eps = xy.eps;
  d.converged = xy.converged && xx.converged && yy.converged;
  return d;
}

CouplingBound truncation_coupling_bound(const SampleEnsemble& e, int n, ConditionalExpectation how, int neighbours) {
  CouplingBound r;
  r.estimator = how;
  if (e.size() == 0) {
    r.degenerate = true;
    return r;
  }
  const Lattice& lat = e.fields[0].lattice;
  if (n >= lat.n()) {
    r.degenerate = true;
    return r;
  }
  std::vector<std::size_t> head, tail;
  for (std::size_t k = 0; k < lat.size(); ++k) {
    auto w = lat.wavevector(k);
    (std::abs(w[0]) <= n && std::abs(w[1]) <= n ? head : tail).push_back(k);
  }
  std::size_t S = e.size();
  std::vector<double> v(S);
  if (how == ConditionalExpectation::projection) {
    parallel_for(S, [&](std::size_t i) {
      double s = 0;
      for (std::size_t k : tail) s += std::norm(e.fields[i].c[k]);
      v[i] = s;
    });
  } else {
    int K = std::max(1, std::min<int>(neighbours, int(S) - 1));
    r.neighbours = K;
    parallel_for(S, [&](std::size_t i) {
      std::vector<std::pair<double, std::size_t>> d;
      d.reserve(S - 1);
      for (std::size_t j = 0; j < S; ++j) {
        if (j == i) continue;
        double s = 0;
        for (std::size_t k : head) s += std::norm(e.fields[i].c[k] - e.fields[j].c[k]);
        d.emplace_back(s, j);
      }
      std::partial_sort(d.begin(), d.begin() + K, d.end());
      double s = 0;
      for (std::size_t k : tail) {
        cplx m = 0;
        for (int q = 0; q < K; ++q) m += e.fields[d[q].second].c[k];
        m /= double(K);
        s += std::norm(e.fields[i].c[k] - m);
      }
      v[i] = s;
    });
  }
  Estimate est = mean_estimate(v);
  r.value = est.value;
  r.stderr_ = est.stderr_;
  return r;
}

double loop_tail_sum(int n) {
  // direct sum to M, Euler-Maclaurin beyond
  const int M = std::max(n, 0) + 100000;
  double s = 0;
  for (int j = M; j > n; --j) s += 1.0 / (double(j) * j);
  double x = M;
  s += 1 / x - 1 / (2 * x * x) + 1 / (6 * x * x * x);
  return 4 * s;
}

RelativeEntropy relative_entropy_truncation(const ModelSpec& model, int n, const std::vector<FourierField>& xs,
                                            const PhaseDomain& domain) {
  RelativeEntropy r;
  std::size_t S = xs.size();
  if (S < 2) throw std::invalid_argument("relative entropy needs samples");
  Lattice small = xs[0].lattice.with_cutoff(std::min(n, xs[0].lattice.n()));
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> a(S, ninf), b(S, ninf);
  parallel_for(S, [&](std::size_t i) {
    if (!domain.contains(xs[i])) return;
    FourierField p = resample(xs[i], small);
    a[i] = gibbs_potential(model, p);
    b[i] = gibbs_potential(model, xs[i]);
  });
  double mA = *std::max_element(a.begin(), a.end()), mB = *std::max_element(b.begin(), b.end());
  if (mA == ninf) {
    r.reliable = false;
    return r;
  }
  std::vector<double> wa(S), wb(S), ta(S);
  for (std::size_t i = 0; i < S; ++i) {
    wa[i] = a[i] == ninf ? 0 : std::exp(a[i] - mA);
    wb[i] = b[i] == ninf ? 0 : std::exp(b[i] - mB);
    ta[i] = a[i] == ninf ? 0 : wa[i] * (a[i] - b[i]);
  }
  double A = compensated_sum(ta), B = compensated_sum(wa), C = compensated_sum(wb);
  auto ent = [&](double A_, double B_, double C_) { return A_ / B_ - mA - std::log(B_) + mB + std::log(C_); };
  r.value = ent(A, B, C);
  r.log_Z_n = mA + std::log(B / double(S));
  r.log_Z = mB + std::log(C / double(S));
  double s2 = 0;
  for (double w : wa) s2 += w * w;
  r.ess = B * B / s2;
  std::vector<double> loo(S);
  for (std::size_t i = 0; i < S; ++i) loo[i] = ent(A - ta[i], B - wa[i], C - wb[i]);
  double m = mean(loo), v = 0;
  for (double x : loo) v += (x - m) * (x - m);
  r.stderr_ = std::sqrt((double(S) - 1) / double(S) * v);
  r.reliable = r.ess >= 30;
  return r;
}

TransportCheck transport_inequality_check(const EmpiricalMeasure& nu, const std::vector<double>& log_tilt,
                                          double alpha, const CostSpec& cost, const SinkhornOptions& opt) {
  if (log_tilt.size() != nu.size()) throw std::invalid_argument("tilt must match the support");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  TransportCheck c;
  c.alpha = alpha;
  std::size_t S = nu.size();
  double mh = *std::max_element(log_tilt.begin(), log_tilt.end());
  std::vector<double> w(S), wh(S);
  for (std::size_t i = 0; i < S; ++i) {
    w[i] = nu.weights[i] * std::exp(log_tilt[i] - mh);
    wh[i] = w[i] * (log_tilt[i] - mh);
  }
  double B = compensated_sum(w), A = compensated_sum(wh);
  // Ent(omega | nu) = E_omega[h] - log E_nu[e^h], h shifted by mh
  c.entropy = std::max(A / B - std::log(B), 0.0);
  std::vector<double> loo(S);
  for (std::size_t i = 0; i < S; ++i) {
    double nb = (B - w[i]) / (1 - nu.weights[i]);
    double na = (A - wh[i]) / (1 - nu.weights[i]);
    loo[i] = na / nb - std::log(nb);
  }
  double m = mean(loo), v = 0;
  for (double x : loo) v += (x - m) * (x - m);
  c.entropy_stderr = std::sqrt((double(S) - 1) / double(S) * v);
  double s2 = 0;
  for (double x : w) s2 += x * x;
  c.conclusive = B * B / s2 >= 30;

  EmpiricalMeasure omega = nu;
  for (std::size_t i = 0; i < S; ++i) omega.weights[i] = w[i] / B;
  if (S <= kExactTransportLimit) c.w2_sq = wasserstein_exact(omega, nu, cost).plan.objective;
  else c.w2_sq = std::max(sinkhorn_divergence(omega, nu, cost, opt).divergence, 0.0);
  c.rhs = 2.0 / alpha * c.entropy;
  c.slack = c.rhs + 3.0 * 2.0 / alpha * c.entropy_stderr - c.w2_sq;
  c.pass = c.slack >= 0;
  return c;
}

double gaussian_tail_bound(int n, double s) {
  if (n < 2 || !(s > 0)) throw std::invalid_argument("tail bound needs n >= 2, s > 0");
  return 4 * std::numbers::pi / (s * std::pow(double(n - 1), 2 * s));
}

double lattice_tail_sum(int n, double s, int R) {
  if (R <= n) R = 2 * n + 1;
  double sum = 0;
  double n2 = double(n) * n, R2 = double(R) * R;
  for (int a = -R; a <= R; ++a) {
    double row = 0;
    for (int b = -R; b <= R; ++b) {
      double r2 = double(a) * a + double(b) * b;
      if (r2 < n2 || r2 > R2) continue;
      row += 2.0 * std::pow(r2, -1.0 - s);
    }
    sum += row;
  }
  return sum + 2 * std::numbers::pi * std::pow(double(R), -2 * s) / s;
}

}  // namespace gibbslab
