#include "gibbslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"

namespace gibbslab {

Lattice::Lattice(int dim, int n, int q) : dim_(dim), n_(n), q_(q) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("lattice dimension must be 1 or 2");
  if (n < 0) throw std::invalid_argument("lattice cutoff must be nonnegative");
  if (q < 1) throw std::invalid_argument("oversample factor must be >= 1");
  std::size_t s = side();
  size_ = dim == 1 ? s : s * s;
}

int fft_friendly(int m) {
  for (int v = std::max(m, 1);; ++v) {
    int r = v;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return v;
  }
}

int Lattice::grid_side() const { return fft_friendly(q_ * side()); }

bool Lattice::contains(int k1, int k2) const {
  if (std::abs(k1) > n_) return false;
  if (dim_ == 1) return k2 == 0;
  return std::abs(k2) <= n_;
}

std::size_t Lattice::index(int k1, int k2) const {
  if (dim_ == 1) return std::size_t(k1 + n_);
  return std::size_t(k1 + n_) * side() + std::size_t(k2 + n_);
}

std::array<int, 2> Lattice::wavevector(std::size_t idx) const {
  if (dim_ == 1) return {int(idx) - n_, 0};
  int s = side();
  return {int(idx / s) - n_, int(idx % s) - n_};
}

double Lattice::k_sq(std::size_t idx) const {
  auto k = wavevector(idx);
  return double(k[0]) * k[0] + double(k[1]) * k[1];
}

FourierField::FourierField(const Lattice& lat, bool real_valued, bool with_zero)
    : lattice(lat), c(lat.size()), real(real_valued), zero_mode(with_zero) {}

double FourierField::norm_sq() const {
  double s = 0;
  for (auto& v : c) s += std::norm(v);
  return s;
}

void FourierField::enforce() {
  if (real) {
    std::size_t half = c.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      std::size_t j = lattice.mirror(i);
      cplx avg = 0.5 * (c[i] + std::conj(c[j]));
      c[i] = avg;
      c[j] = std::conj(avg);
    }
    c[lattice.origin()] = c[lattice.origin()].real();
  }
  if (!zero_mode) c[lattice.origin()] = 0.0;
}

bool FourierField::hermitian(double tol) const {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (std::abs(c[i] - std::conj(c[lattice.mirror(i)])) > tol) return false;
  return true;
}

static void check_same(const FourierField& a, const FourierField& b) {
  if (!(a.lattice == b.lattice) && a.lattice.size() != b.lattice.size())
    throw std::invalid_argument("fields live on different lattices");
}

FourierField& FourierField::operator+=(const FourierField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  return *this;
}

FourierField& FourierField::operator*=(double a) {
  for (auto& v : c) v *= a;
  return *this;
}

FourierField& FourierField::operator*=(cplx a) {
  for (auto& v : c) v *= a;
  if (real && a.imag() != 0.0) real = false;
  return *this;
}

void FourierField::axpy(double a, const FourierField& x) {
  check_same(*this, x);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += a * x.c[i];
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double a, FourierField b) { return b *= a; }
FourierField operator*(cplx a, FourierField b) { return b *= a; }

double inner(const FourierField& a, const FourierField& b) {
  check_same(a, b);
  double s = 0;
  for (std::size_t i = 0; i < a.c.size(); ++i) s += (std::conj(a.c[i]) * b.c[i]).real();
  return s;
}

cplx inner_complex(const FourierField& a, const FourierField& b) {
  check_same(a, b);
  cplx s = 0;
  for (std::size_t i = 0; i < a.c.size(); ++i) s += std::conj(a.c[i]) * b.c[i];
  return s;
}

double GridBuffer::mean_abs_sq() const {
  double s = 0;
  for (auto& v : values) s += std::norm(v);
  return s / double(values.size());
}

static inline int wrap(int k, int m) { return ((k % m) + m) % m; }

GridBuffer to_grid(const FourierField& f, int side) {
  const Lattice& lat = f.lattice;
  if (side == 0) side = lat.grid_side();
  if (side < lat.side())
    throw std::invalid_argument("grid side " + std::to_string(side) + " cannot resolve cutoff " +
                                std::to_string(lat.n()));
  GridBuffer g;
  g.dim = lat.dim();
  g.side = side;
  g.values.assign(lat.dim() == 1 ? std::size_t(side) : std::size_t(side) * side, 0.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    auto k = lat.wavevector(i);
    std::size_t pos = lat.dim() == 1 ? std::size_t(wrap(k[0], side))
                                     : std::size_t(wrap(k[0], side)) * side + wrap(k[1], side);
    g.values[pos] = f.c[i];
  }
  detail::fft_inplace(g.values.data(), g.dim, side, +1);
  return g;
}

FourierField to_coeffs(const GridBuffer& g, const Lattice& lat, bool real, bool with_zero) {
  if (g.dim != lat.dim()) throw std::invalid_argument("grid and lattice dimensions differ");
  if (g.side < lat.side())
    throw std::invalid_argument("grid side " + std::to_string(g.side) + " cannot resolve cutoff " +
                                std::to_string(lat.n()));
  std::vector<cplx> work = g.values;
  detail::fft_inplace(work.data(), g.dim, g.side, -1);
  double scale = 1.0 / double(work.size());
  FourierField f(lat, real, with_zero);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    auto k = lat.wavevector(i);
    std::size_t pos = lat.dim() == 1 ? std::size_t(wrap(k[0], g.side))
                                     : std::size_t(wrap(k[0], g.side)) * g.side + wrap(k[1], g.side);
    f.c[i] = work[pos] * scale;
  }
  if (real || !with_zero) f.enforce();
  return f;
}

bool in_dyadic_block(int j, int k) {
  if (j == 0) return k == 0;
  if (j < 0) return in_dyadic_block(-j, -k);
  long lo = 1L << (j - 1), hi = (1L << j) - 1;
  return k >= lo && k <= hi;
}

std::size_t dyadic_block_size(int j) { return j == 0 ? 1 : std::size_t(1) << (std::abs(j) - 1); }

double poussin_multiplier(int j, int k) {
  if (j < 0) return poussin_multiplier(-j, -k);
  if (j == 0) return std::max(0.0, 1.0 - std::abs(k) / 2.0);
  double lo = double(1L << (j - 1)), hi = double((1L << j) - 1);
  if (k >= lo && k <= hi) return 1.0;
  // Flanks run linearly to zero just outside the neighbouring blocks.
  double below = j >= 2 ? double(1L << (j - 2)) - 1.0 : -1.0;
  double above = double(1L << (j + 1));
  if (k > below && k < lo) return (k - below) / (lo - below);
  if (k > hi && k < above) return (above - k) / (above - hi);
  return 0.0;
}

double projection_multiplier(const ProjectionSpec& spec, int dim, std::array<int, 2> k) {
  switch (spec.kind) {
    case ProjectionSpec::Kind::dirichlet:
      return (std::abs(k[0]) <= spec.m && (dim == 1 || std::abs(k[1]) <= spec.m)) ? 1.0 : 0.0;
    case ProjectionSpec::Kind::dyadic_block: {
      bool in = in_dyadic_block(spec.J[0], k[0]);
      if (dim == 2) in = in && in_dyadic_block(spec.J[1], k[1]);
      return in ? 1.0 : 0.0;
    }
    case ProjectionSpec::Kind::vallee_poussin: {
      double m = poussin_multiplier(spec.J[0], k[0]);
      if (dim == 2) m *= poussin_multiplier(spec.J[1], k[1]);
      return m;
    }
  }
  return 0.0;
}

FourierField project(const FourierField& f, const ProjectionSpec& spec) {
  FourierField out = f;
  for (std::size_t i = 0; i < f.c.size(); ++i)
    out.c[i] *= projection_multiplier(spec, f.lattice.dim(), f.lattice.wavevector(i));
  // Dyadic blocks are one-sided, so the projection of a real field is complex.
  if (spec.kind != ProjectionSpec::Kind::dirichlet) out.real = false;
  return out;
}

double sobolev_seminorm_sq(const FourierField& f, double s) {
  double acc = 0;
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    double k2 = f.lattice.k_sq(i);
    if (k2 == 0) continue;
    acc += std::pow(k2, s) * std::norm(f.c[i]);
  }
  return acc;
}

double sobolev_norm(const FourierField& f, double s) {
  return std::sqrt(std::norm(f.c[f.lattice.origin()]) + sobolev_seminorm_sq(f, s));
}

double lp_integral(const FourierField& f, int p) {
  if (p != 2 && p != 3 && p != 4 && p != 6)
    throw std::invalid_argument("lp_integral supports p in {2,3,4,6}");
  int need = (p + 1) / 2;
  if (f.lattice.q() < need)
    throw std::invalid_argument("oversample q=" + std::to_string(f.lattice.q()) +
                                " is too small for p=" + std::to_string(p) + " (need " +
                                std::to_string(need) + ")");
  GridBuffer g = to_grid(f);
  double s = 0;
  for (auto& v : g.values) {
    double a = std::norm(v);
    switch (p) {
      case 2: s += a; break;
      case 3: s += a * std::sqrt(a); break;
      case 4: s += a * a; break;
      default: s += a * a * a; break;
    }
  }
  return s / double(g.size());
}

double real_power_integral(const FourierField& f, int p) {
  int need = (p + 1) / 2;
  if (f.lattice.q() < need)
    throw std::invalid_argument("oversample q=" + std::to_string(f.lattice.q()) +
                                " is too small for degree " + std::to_string(p));
  GridBuffer g = to_grid(f);
  double s = 0;
  for (auto& v : g.values) s += std::pow(v.real(), p);
  return s / double(g.size());
}

FourierField convolve(const FourierField& f, const FourierField& g) {
  if (!(f.lattice.dim() == g.lattice.dim() && f.lattice.n() == g.lattice.n()))
    throw std::invalid_argument("convolve needs fields on the same lattice");
  FourierField out(f.lattice, f.real && g.real, f.zero_mode && g.zero_mode);
  for (std::size_t i = 0; i < f.c.size(); ++i) out.c[i] = f.c[i] * g.c[i];
  return out;
}

static int alias_free_side(int n_in, int degree, int n_out) {
  // Products of `degree` fields reach frequency degree*n_in; the result is
  // read at |k| <= n_out, so aliases land outside when side > degree*n_in + n_out.
  return fft_friendly(degree * n_in + n_out + 1);
}

FourierField modulus_sq(const FourierField& u, const Lattice& out) {
  int side = alias_free_side(u.lattice.n(), 2, out.n());
  GridBuffer g = to_grid(u, side);
  for (auto& v : g.values) v = std::norm(v);
  return to_coeffs(g, out, true, true);
}

FourierField pointwise(std::span<const FourierField* const> in, const Lattice& out, int degree,
                       const std::function<cplx(std::span<const cplx>)>& fn, bool real,
                       bool with_zero) {
  if (in.empty()) throw std::invalid_argument("pointwise needs at least one field");
  int n_in = 0;
  for (auto* f : in) n_in = std::max(n_in, f->lattice.n());
  int side = alias_free_side(n_in, degree, out.n());
  std::vector<GridBuffer> grids;
  grids.reserve(in.size());
  for (auto* f : in) grids.push_back(to_grid(*f, side));
  GridBuffer res = grids[0];
  std::vector<cplx> vals(in.size());
  for (std::size_t m = 0; m < res.size(); ++m) {
    for (std::size_t a = 0; a < in.size(); ++a) vals[a] = grids[a].values[m];
    res.values[m] = fn(vals);
  }
  return to_coeffs(res, out, real, with_zero);
}

double grid_integral(std::span<const FourierField* const> in, int degree,
                     const std::function<double(std::span<const cplx>)>& fn) {
  if (in.empty()) throw std::invalid_argument("grid_integral needs at least one field");
  int n_in = 0;
  for (auto* f : in) n_in = std::max(n_in, f->lattice.n());
  int side = fft_friendly(degree * n_in + 1);
  std::vector<GridBuffer> grids;
  grids.reserve(in.size());
  for (auto* f : in) grids.push_back(to_grid(*f, side));
  std::vector<cplx> vals(in.size());
  std::vector<double> terms(grids[0].size());
  for (std::size_t m = 0; m < terms.size(); ++m) {
    for (std::size_t a = 0; a < in.size(); ++a) vals[a] = grids[a].values[m];
    terms[m] = fn(vals);
  }
  double s = 0;
  for (double t : terms) s += t;
  return s / double(terms.size());
}

FourierField resample(const FourierField& f, const Lattice& out) {
  if (out.dim() != f.lattice.dim()) throw std::invalid_argument("resample across dimensions");
  FourierField g(out, f.real, f.zero_mode);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto k = out.wavevector(i);
    if (f.lattice.contains(k[0], k[1])) g.c[i] = f.c[f.lattice.index(k[0], k[1])];
  }
  return g;
}

FourierField apply_multiplier(const FourierField& f,
                              const std::function<cplx(std::array<int, 2>)>& m) {
  FourierField out = f;
  bool stays_real = f.real;
  for (std::size_t i = 0; i < f.c.size(); ++i) {
    auto k = f.lattice.wavevector(i);
    cplx v = m(k);
    out.c[i] *= v;
    if (stays_real && std::abs(m({-k[0], -k[1]}) - std::conj(v)) > 1e-14 * (1.0 + std::abs(v)))
      stays_real = false;
  }
  out.real = stays_real;
  return out;
}

}  // namespace gibbslab
