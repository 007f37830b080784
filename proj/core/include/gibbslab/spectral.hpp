#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gibbslab {

using cplx = std::complex<double>;

// Index set {k in Z^D : |k_j| <= n}. Grid side is q*(2n+1) rounded up to a
// 2^a 3^b 5^c 7^d length.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int dim, int n, int q = 3);

  int dim() const { return dim_; }
  int n() const { return n_; }
  int q() const { return q_; }
  int side() const { return 2 * n_ + 1; }
  std::size_t size() const { return size_; }
  int grid_side() const;

  bool contains(int k1, int k2 = 0) const;
  std::size_t index(int k1, int k2 = 0) const;
  std::array<int, 2> wavevector(std::size_t idx) const;
  double k_sq(std::size_t idx) const;
  std::size_t mirror(std::size_t idx) const { return size_ - 1 - idx; }
  std::size_t origin() const { return size_ / 2; }

  Lattice with_cutoff(int n) const { return Lattice(dim_, n, q_); }
  Lattice with_oversample(int q) const { return Lattice(dim_, n_, q); }

  bool operator==(const Lattice& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && q_ == o.q_;
  }

 private:
  int dim_ = 1;
  int n_ = 1;
  int q_ = 3;
  std::size_t size_ = 3;
};

int fft_friendly(int m);

struct FourierField {
  Lattice lattice;
  std::vector<cplx> c;
  bool real = false;
  bool zero_mode = true;

  FourierField() = default;
  explicit FourierField(const Lattice& lat, bool real_valued = false, bool with_zero = true);

  cplx& at(int k1, int k2 = 0) { return c[lattice.index(k1, k2)]; }
  cplx at(int k1, int k2 = 0) const { return c[lattice.index(k1, k2)]; }

  double norm_sq() const;
  // Restores c_{-k} = conj(c_k) (if real) and c_0 = 0 (if no zero mode).
  void enforce();
  bool hermitian(double tol) const;

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double a);
  FourierField& operator*=(cplx a);
  void axpy(double a, const FourierField& x);
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double a, FourierField b);
FourierField operator*(cplx a, FourierField b);

// Re sum conj(a_k) b_k, the real L^2 pairing in orthonormal coordinates.
double inner(const FourierField& a, const FourierField& b);
cplx inner_complex(const FourierField& a, const FourierField& b);

struct GridBuffer {
  int dim = 1;
  int side = 0;
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  double mean_abs_sq() const;
};

// Synthesis u(theta_m) = sum_k c_k e^{i k.theta_m} on a side^D tensor grid.
// side = 0 selects the lattice grid side.
GridBuffer to_grid(const FourierField& f, int side = 0);
// Analysis c_k = side^{-D} sum_m u(theta_m) e^{-i k.theta_m}, kept on `lat`.
FourierField to_coeffs(const GridBuffer& g, const Lattice& lat, bool real = false,
                       bool with_zero = true);

struct ProjectionSpec {
  enum class Kind { dirichlet, dyadic_block, vallee_poussin };
  Kind kind = Kind::dirichlet;
  int m = 0;
  std::array<int, 2> J{0, 0};

  static ProjectionSpec dirichlet(int m) { return {Kind::dirichlet, m, {0, 0}}; }
  static ProjectionSpec dyadic(std::array<int, 2> J) { return {Kind::dyadic_block, 0, J}; }
  static ProjectionSpec poussin(std::array<int, 2> J) { return {Kind::vallee_poussin, 0, J}; }
};

bool in_dyadic_block(int j, int k);
double poussin_multiplier(int j, int k);
// Multiplier of the projection at wavevector k (0/1 except on Poussin flanks).
double projection_multiplier(const ProjectionSpec& spec, int dim, std::array<int, 2> k);
std::size_t dyadic_block_size(int j);

FourierField project(const FourierField& f, const ProjectionSpec& spec);

// (|c_0|^2 + sum_{k != 0} |k|^{2s} |c_k|^2)^{1/2}
double sobolev_norm(const FourierField& f, double s);
// sum_{k != 0} |k|^{2s} |c_k|^2, the homogeneous seminorm squared.
double sobolev_seminorm_sq(const FourierField& f, double s);

// Mean over T^D of |u|^p for p in {2,3,4,6}. Even p is exact for lattice
// fields once q >= p/2; p = 3 is a grid quadrature of |u|^3.
double lp_integral(const FourierField& f, int p);
// Mean of u^p for a real field (signed); exact when q >= ceil(p/2).
double real_power_integral(const FourierField& f, int p);

// (f*g)^(m) = f^(m) g^(m)
FourierField convolve(const FourierField& f, const FourierField& g);

// Coefficients of |u|^2 on `out` (typically the doubled lattice), computed
// on a grid large enough to be alias free.
FourierField modulus_sq(const FourierField& u, const Lattice& out);

// Evaluates fn pointwise on an alias-free grid for products of `degree`
// lattice fields, and returns the result restricted to `out`.
FourierField pointwise(std::span<const FourierField* const> in, const Lattice& out, int degree,
                       const std::function<cplx(std::span<const cplx>)>& fn, bool real = false,
                       bool with_zero = true);

// Mean over T^D of fn(u_1(theta), ..., u_m(theta)); exact when fn is a
// polynomial of total degree <= `degree` in the inputs and their conjugates.
double grid_integral(std::span<const FourierField* const> in, int degree,
                     const std::function<double(std::span<const cplx>)>& fn);

// Embeds f into a lattice of a different cutoff (zero padding or truncation).
FourierField resample(const FourierField& f, const Lattice& out);

// Multiplies each coefficient by m(k); used for derivatives and propagators.
FourierField apply_multiplier(const FourierField& f, const std::function<cplx(std::array<int, 2>)>& m);

}  // namespace gibbslab
