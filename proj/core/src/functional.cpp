#include "gibbslab/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbslab {

TestFunctional TestFunctional::linear(FourierField xi, std::string label) {
  TestFunctional f;
  f.kind = Kind::linear;
  f.xi = {std::move(xi)};
  f.label = label.empty() ? "linear" : std::move(label);
  return f;
}

TestFunctional TestFunctional::modulus(FourierField xi, std::string label) {
  TestFunctional f;
  f.kind = Kind::modulus;
  f.xi = {std::move(xi)};
  f.label = label.empty() ? "modulus" : std::move(label);
  return f;
}

TestFunctional TestFunctional::composed(std::vector<FourierField> xis, Sigma sigma, double scale,
                                        std::string label) {
  if (xis.empty()) throw std::invalid_argument("composed functional needs directions");
  TestFunctional f;
  f.kind = Kind::composed;
  f.xi = std::move(xis);
  f.sigma = sigma;
  f.scale = scale;
  f.label = label.empty() ? (sigma == Sigma::tanh ? "tanh" : "cos") : std::move(label);
  return f;
}

TestFunctional TestFunctional::exponential(FourierField xi, double scale, std::string label) {
  TestFunctional f;
  f.kind = Kind::exponential;
  f.xi = {std::move(xi)};
  f.scale = scale;
  f.label = label.empty() ? "exp" : std::move(label);
  return f;
}

TestFunctional TestFunctional::norm() {
  TestFunctional f;
  f.kind = Kind::norm;
  f.label = "norm";
  return f;
}

TestFunctional TestFunctional::mass() {
  TestFunctional f;
  f.kind = Kind::mass;
  f.label = "mass";
  return f;
}

TestFunctional TestFunctional::quartic() {
  TestFunctional f;
  f.kind = Kind::quartic;
  f.label = "quartic";
  return f;
}

namespace {

double sum_x(const std::vector<FourierField>& xi, const FourierField& u) {
  double s = 0;
  for (const auto& x : xi) s += inner(x, u);
  return s;
}

}  // namespace

double TestFunctional::value(const FourierField& u) const {
  if (constant()) return scale;
  switch (kind) {
    case Kind::linear: return inner(xi[0], u);
    case Kind::modulus: return std::abs(inner_complex(xi[0], u));
    case Kind::composed: {
      double a = scale * sum_x(xi, u);
      return sigma == Sigma::tanh ? std::tanh(a) : std::cos(a);
    }
    case Kind::exponential: return std::exp(0.5 * scale * inner(xi[0], u));
    case Kind::norm: return std::sqrt(u.norm_sq());
    case Kind::mass: return u.norm_sq();
    case Kind::quartic: return lp_integral(u, 4);
  }
  return 0;
}

void restrict_to_class(FourierField& g, const FourierField& like) {
  const Lattice& lat = g.lattice;
  if (like.real) {
    for (std::size_t i = 0; i < lat.origin(); ++i) {
      std::size_t j = lat.mirror(i);
      cplx h = 0.5 * (g.c[i] + std::conj(g.c[j]));
      g.c[i] = h;
      g.c[j] = std::conj(h);
    }
    g.c[lat.origin()] = g.c[lat.origin()].real();
  }
  if (!like.zero_mode) g.c[lat.origin()] = 0;
  g.real = like.real;
  g.zero_mode = like.zero_mode;
}

FourierField TestFunctional::gradient(const FourierField& u) const {
  FourierField g(u.lattice, false, true);
  if (constant()) {
    restrict_to_class(g, u);
    return g;
  }
  switch (kind) {
    case Kind::linear:
      g = xi[0];
      break;
    case Kind::modulus: {
      cplx z = inner_complex(xi[0], u);
      double a = std::abs(z);
      g = xi[0];
      if (a == 0) g *= 0.0;
      else g *= z / a;
      break;
    }
    case Kind::composed: {
      double a = scale * sum_x(xi, u);
      double d = sigma == Sigma::tanh ? 1.0 - std::tanh(a) * std::tanh(a) : -std::sin(a);
      g = xi[0];
      for (std::size_t i = 1; i < xi.size(); ++i) g += xi[i];
      g *= scale * d;
      break;
    }
    case Kind::exponential:
      g = xi[0];
      g *= 0.5 * scale * value(u);
      break;
    case Kind::norm: {
      double r = std::sqrt(u.norm_sq());
      g = u;
      g *= r == 0 ? 0.0 : 1.0 / r;
      break;
    }
    case Kind::mass:
      g = u;
      g *= 2.0;
      break;
    case Kind::quartic: {
      const FourierField* in[] = {&u};
      g = pointwise(in, u.lattice, 3, [](std::span<const cplx> z) { return std::norm(z[0]) * z[0]; });
      g *= 4.0;
      break;
    }
  }
  g.real = false;
  g.zero_mode = true;
  restrict_to_class(g, u);
  return g;
}

FourierField mode_direction(const Lattice& lat, std::array<int, 2> k, cplx phase, bool real,
                            bool zero_mode) {
  FourierField f(lat, false, true);
  f.at(k[0], k[1]) = phase;
  if (real) {
    // unit vector in the orthonormal real coordinates of the Hermitian class
    f.at(k[0], k[1]) = phase / std::sqrt(2.0);
    f.at(-k[0], -k[1]) = std::conj(phase) / std::sqrt(2.0);
    if (k[0] == 0 && k[1] == 0) f.at(0, 0) = phase.real();
  }
  f.real = real;
  f.zero_mode = zero_mode;
  if (!zero_mode) f.c[lat.origin()] = 0;
  return f;
}

std::vector<TestFunctional> default_dictionary(const Lattice& lat, bool real, bool zero_mode, int kmax) {
  std::vector<TestFunctional> out;
  std::vector<std::array<int, 2>> modes;
  int span = std::min(kmax, lat.n());
  for (int a = -span; a <= span; ++a)
    for (int b = (lat.dim() == 2 ? -span : 0); b <= (lat.dim() == 2 ? span : 0); ++b) {
      if (a * a + b * b == 0 || a * a + b * b > kmax * kmax) continue;
      // one representative per +-k pair for real fields
      if (real && (b < 0 || (b == 0 && a < 0))) continue;
      modes.push_back({a, b});
    }
  auto tag = [](std::array<int, 2> k) {
    return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + ")";
  };
  for (auto k : modes) {
    double kk = std::sqrt(double(k[0] * k[0] + k[1] * k[1]));
    FourierField re = mode_direction(lat, k, 1.0, real, zero_mode);
    FourierField im = mode_direction(lat, k, cplx(0, 1), real, zero_mode);
    out.push_back(TestFunctional::linear(re, "re" + tag(k)));
    out.push_back(TestFunctional::linear(im, "im" + tag(k)));
    out.push_back(TestFunctional::modulus(re, "abs" + tag(k)));
    out.push_back(TestFunctional::exponential(re, kk, "exp" + tag(k)));
  }
  for (std::size_t i = 0; i + 1 < modes.size() && i < 6; ++i) {
    auto a = modes[i], b = modes[i + 1];
    double ka = std::sqrt(double(a[0] * a[0] + a[1] * a[1]));
    FourierField xa = mode_direction(lat, a, 1.0, real, zero_mode);
    FourierField xb = mode_direction(lat, b, cplx(0, 1), real, zero_mode);
    out.push_back(TestFunctional::composed({xa, xb}, TestFunctional::Sigma::tanh, ka,
                                           "tanh" + tag(a) + tag(b)));
  }
  out.push_back(TestFunctional::norm());
  return out;
}

double MetricSpec::weight(double k_sq) const {
  if (k_sq == 0) return zero_weight;
  return s_dual == 0 ? 1.0 : std::pow(k_sq, -s_dual);
}

double MetricSpec::norm_sq(const FourierField& g) const {
  double s = 0;
  for (std::size_t i = 0; i < g.c.size(); ++i) s += weight(g.lattice.k_sq(i)) * std::norm(g.c[i]);
  return s;
}

}  // namespace gibbslab
