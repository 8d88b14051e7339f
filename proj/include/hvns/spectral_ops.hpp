#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "hvns/fourier_transform.hpp"

namespace hvns {

/// Largest admissible exponent in exp(alpha (2 pi/L) |k|).
inline constexpr double kGevreyExponentLimit = 700.0;

namespace detail {

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> k_magnitude(const SpectralGrid<Scalar>& grid) {
  return grid.k_squared().sqrt();
}

template <typename Scalar>
void check_gevrey_guard(const SpectralGrid<Scalar>& grid, Scalar alpha) {
  if (!(alpha >= 0) || !std::isfinite(static_cast<double>(alpha))) {
    throw DomainError("Gevrey radius must be finite and >= 0");
  }
  if (alpha * grid.unit() * grid.max_wavenumber() > Scalar(kGevreyExponentLimit)) {
    throw RangeError("Gevrey exponent alpha*(2pi/L)*|k|max exceeds 700");
  }
}

}  // namespace detail

/// Leray projection: u_k <- u_k - k (k.u_k)/|k|^2 on every mode, k = 0 untouched.
template <typename Scalar>
SpectralField<Scalar> leray_project(SpectralField<Scalar> u) {
  const auto& g = u.grid();
  const auto& kx = g.kx();
  const auto& ky = g.ky();
  const auto& kz = g.kz();
  const auto& k2 = g.k_squared();
  for (Index i = 0; i < g.spectral_size(); ++i) {
    if (k2[i] == 0) continue;
    const auto dot = Scalar(kx[i]) * u[0][i] + Scalar(ky[i]) * u[1][i] + Scalar(kz[i]) * u[2][i];
    const auto s = dot / k2[i];
    u[0][i] -= Scalar(kx[i]) * s;
    u[1][i] -= Scalar(ky[i]) * s;
    u[2][i] -= Scalar(kz[i]) * s;
  }
  u.set_solenoidal(true);
  return u;
}

/// omega_k = i (2 pi/L) k x u_k.
template <typename Scalar>
SpectralField<Scalar> curl(const SpectralField<Scalar>& u) {
  using Complex = std::complex<Scalar>;
  const auto& g = u.grid();
  SpectralField<Scalar> w(g);
  const Complex iu(0, g.unit());
  const auto& kx = g.kx();
  const auto& ky = g.ky();
  const auto& kz = g.kz();
  for (Index i = 0; i < g.spectral_size(); ++i) {
    const Scalar ax = Scalar(kx[i]), ay = Scalar(ky[i]), az = Scalar(kz[i]);
    w[0][i] = iu * (ay * u[2][i] - az * u[1][i]);
    w[1][i] = iu * (az * u[0][i] - ax * u[2][i]);
    w[2][i] = iu * (ax * u[1][i] - ay * u[0][i]);
  }
  w.set_solenoidal(true);
  return w;
}

/// Per-mode eigenvalue multiplier lambda_k^power, lambda_k = (2 pi/L)^2 |k|^2.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> stokes_multiplier(const SpectralGrid<Scalar>& grid, Scalar power) {
  if (!(power >= 0) || !std::isfinite(static_cast<double>(power))) {
    throw DomainError("Stokes power must be finite and >= 0");
  }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> lambda = grid.lambda1() * grid.k_squared();
  if (power == 0) return Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(lambda.size());
  return lambda.pow(power);
}

/// Per-mode multiplier exp(alpha (2 pi/L) |k|) of e^{alpha A^{1/2}}.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gevrey_multiplier(const SpectralGrid<Scalar>& grid, Scalar alpha) {
  detail::check_gevrey_guard(grid, alpha);
  return (alpha * grid.unit() * detail::k_magnitude(grid)).exp();
}

template <typename Scalar>
SpectralField<Scalar> stokes_power(SpectralField<Scalar> u, Scalar power) {
  const bool sol = u.solenoidal();
  u.scale_modes(stokes_multiplier(u.grid(), power));
  u.set_solenoidal(sol);
  return u;
}

template <typename Scalar>
SpectralField<Scalar> gevrey_smooth(SpectralField<Scalar> u, Scalar alpha) {
  const bool sol = u.solenoidal();
  u.scale_modes(gevrey_multiplier(u.grid(), alpha));
  u.set_solenoidal(sol);
  return u;
}

/// Zero every mode outside the 2/3-rule band.
template <typename Scalar>
SpectralField<Scalar> dealias(SpectralField<Scalar> u) {
  const bool sol = u.solenoidal();
  u.scale_modes(u.grid().dealias_mask());
  u.set_solenoidal(sol);
  return u;
}

/// Which weighted L2 norm to evaluate.
struct NormKind {
  enum class Type { L2, Hdot, DAl, Gevrey, GevreyWeighted };
  Type type = Type::L2;
  double first = 0;   // m, l or alpha
  double second = 0;  // power for GevreyWeighted

  static NormKind l2() { return {Type::L2, 0, 0}; }
  /// ||A^{m/2} u||.
  static NormKind hdot(double m) { return {Type::Hdot, m, 0}; }
  /// ||A^l u||.
  static NormKind dal(double l) { return {Type::DAl, l, 0}; }
  /// ||e^{alpha A^{1/2}} u||.
  static NormKind gevrey(double alpha) { return {Type::Gevrey, alpha, 0}; }
  /// ||A^power e^{alpha A^{1/2}} u||.
  static NormKind gevrey_weighted(double alpha, double power) { return {Type::GevreyWeighted, alpha, power}; }
};

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> norm_multiplier(const SpectralGrid<Scalar>& grid, const NormKind& kind) {
  switch (kind.type) {
    case NormKind::Type::L2:
      return Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(grid.spectral_size());
    case NormKind::Type::Hdot:
      return stokes_multiplier(grid, Scalar(kind.first / 2));
    case NormKind::Type::DAl:
      return stokes_multiplier(grid, Scalar(kind.first));
    case NormKind::Type::Gevrey:
      return gevrey_multiplier(grid, Scalar(kind.first));
    case NormKind::Type::GevreyWeighted:
      return stokes_multiplier(grid, Scalar(kind.second)) * gevrey_multiplier(grid, Scalar(kind.first));
  }
  return {};
}

/// Sum over the full lattice of |c_k|^2 for one stored spectrum.
template <typename Scalar>
Scalar spectrum_energy(const SpectralGrid<Scalar>& grid, const SpectrumArray<Scalar>& c) {
  return (grid.weight() * c.abs2()).sum();
}

/// (|Omega| sum_k multiplier(k)^2 |u_k|^2)^{1/2}.
template <typename Scalar>
Scalar norm(const SpectralField<Scalar>& u, const NormKind& kind = NormKind::l2()) {
  const auto& g = u.grid();
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> w = norm_multiplier(g, kind).square() * g.weight();
  const Scalar sum = (w * (u[0].abs2() + u[1].abs2() + u[2].abs2())).sum();
  return std::sqrt(g.volume() * sum);
}

/// L2 inner product (u, v) = |Omega| Re sum_k u_k . conj(v_k).
template <typename Scalar>
Scalar inner(const SpectralField<Scalar>& u, const SpectralField<Scalar>& v) {
  u.check_same_grid(v);
  const auto& g = u.grid();
  Scalar sum = 0;
  for (int c = 0; c < 3; ++c) sum += (g.weight() * (u[c] * v[c].conjugate()).real()).sum();
  return g.volume() * sum;
}

/// max_k |k.u_k| / max_k |u_k| with integer k (0 for the zero field).
template <typename Scalar>
Scalar divergence_defect(const SpectralField<Scalar>& u) {
  const auto& g = u.grid();
  const Scalar scale = u.max_abs();
  if (scale == 0) return 0;
  Scalar worst = 0;
  for (Index i = 0; i < g.spectral_size(); ++i) {
    const auto div = Scalar(g.kx()[i]) * u[0][i] + Scalar(g.ky()[i]) * u[1][i] + Scalar(g.kz()[i]) * u[2][i];
    worst = std::max(worst, std::abs(div));
  }
  return worst / scale;
}

/// max over the kz = 0 plane of |u_{-k} - conj(u_k)| / max_k |u_k|.
template <typename Scalar>
Scalar hermitian_defect(const SpectralField<Scalar>& u) {
  const auto& g = u.grid();
  const Scalar scale = u.max_abs();
  if (scale == 0) return 0;
  const int n = g.n();
  Scalar worst = 0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Index i = g.spectral_index(ix, iy, 0);
      const Index j = g.spectral_index((n - ix) % n, (n - iy) % n, 0);
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(u[c][j] - std::conj(u[c][i])));
    }
  }
  return worst / scale;
}

/// |u_0|, the magnitude of the mean mode.
template <typename Scalar>
Scalar mean_mode_magnitude(const SpectralField<Scalar>& u) {
  return std::sqrt(std::norm(u[0][0]) + std::norm(u[1][0]) + std::norm(u[2][0]));
}

/// b(u, v, w) = sum_ij integral u_i (d_i v_j) w_j dx, evaluated on a 3/2
/// zero-padded lattice so the cubic integrand is integrated exactly.
template <typename Scalar>
Scalar trilinear_b(const SpectralField<Scalar>& u, const SpectralField<Scalar>& v, const SpectralField<Scalar>& w) {
  u.check_same_grid(v);
  u.check_same_grid(w);
  using Complex = std::complex<Scalar>;
  const auto& g = u.grid();
  const int m = 3 * g.n() / 2;
  auto& fft = thread_transform<Scalar>(m);
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  auto physical = [&](const SpectrumArray<Scalar>& c) {
    Values out;
    fft.to_physical(pad_spectrum(g, c, m), out);
    return out;
  };

  std::array<Values, 3> uu, ww;
  for (int c = 0; c < 3; ++c) {
    uu[c] = physical(u[c]);
    ww[c] = physical(w[c]);
  }
  const Complex iu(0, g.unit());
  const std::array<Eigen::ArrayXi, 3> k{g.kx(), g.ky(), g.kz()};
  Values integrand = Values::Zero(Index(m) * m * m);
  for (int j = 0; j < 3; ++j) {
    Values transport = Values::Zero(integrand.size());
    for (int i = 0; i < 3; ++i) {
      const SpectrumArray<Scalar> deriv = iu * k[i].template cast<Scalar>().template cast<Complex>() * v[j];
      transport += uu[i] * physical(deriv);
    }
    integrand += transport * ww[j];
  }
  return g.volume() * integrand.sum() / (Scalar(m) * Scalar(m) * Scalar(m));
}

}  // namespace hvns
