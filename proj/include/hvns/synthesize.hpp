#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "hvns/spectral_ops.hpp"

namespace hvns {

/// One prescribed Fourier mode. The Hermitian partner is filled automatically.
template <typename Scalar>
struct ModeSpec {
  Wavevector k;
  typename SpectralField<Scalar>::ModeVector amplitude;
};

/// Seeded random solenoidal field with |u_k| ~ |k|^slope exp(-|k|^2/k0^2)
/// inside the 2/3-rule band, rescaled to the requested energy (1/2)||u||^2.
struct RandomFieldSpec {
  std::uint64_t seed = 1;
  double slope = 4.0;
  double k0 = 2.0;
  double energy = 0.5;
};

template <typename Scalar>
using FieldSpec = std::variant<std::vector<ModeSpec<Scalar>>, RandomFieldSpec>;

template <typename Scalar>
SpectralField<Scalar> synthesize_modes(const SpectralGrid<Scalar>& grid, std::span<const ModeSpec<Scalar>> modes) {
  SpectralField<Scalar> u(grid);
  const int nyq = grid.n() / 2;
  for (const auto& mode : modes) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(mode.k[c]) >= nyq) {
        throw OutOfBandError("mode (" + std::to_string(mode.k[0]) + "," + std::to_string(mode.k[1]) + "," +
                             std::to_string(mode.k[2]) + ") is outside the representable band |k_i| < n/2");
      }
    }
    if (mode.k[0] == 0 && mode.k[1] == 0 && mode.k[2] == 0) {
      throw OutOfBandError("the mean mode k = 0 must stay zero");
    }
    u.set_mode(mode.k, mode.amplitude);
  }
  return u;
}

namespace detail {

/// Uniform in [0,1) from raw 64-bit engine output, identical on every platform.
inline double unit_uniform(std::mt19937_64& engine) {
  return double(engine() >> 11) * 0x1.0p-53;
}

inline std::complex<double> complex_gaussian(std::mt19937_64& engine) {
  const double a = 1.0 - unit_uniform(engine);
  const double b = unit_uniform(engine);
  const double r = std::sqrt(-2.0 * std::log(a));
  const double phase = 2.0 * std::numbers::pi * b;
  return {r * std::cos(phase), r * std::sin(phase)};
}

}  // namespace detail

template <typename Scalar>
SpectralField<Scalar> random_field(const SpectralGrid<Scalar>& grid, const RandomFieldSpec& spec) {
  if (!(spec.energy > 0)) throw DomainError("random field target energy must be positive");
  if (!(spec.k0 > 0)) throw DomainError("random field k0 must be positive");
  using Complex = std::complex<Scalar>;
  std::mt19937_64 engine(spec.seed);
  SpectralField<Scalar> u(grid);
  const int radius = grid.dealias_radius();
  // Fixed visiting order over the non-redundant half lattice makes the field a
  // pure function of (seed, n).
  for (int kz = 0; kz <= radius; ++kz) {
    for (int ky = -radius; ky <= radius; ++ky) {
      for (int kx = -radius; kx <= radius; ++kx) {
        if (kz == 0 && (ky < 0 || (ky == 0 && kx <= 0))) continue;
        const double kmag = std::sqrt(double(kx * kx + ky * ky + kz * kz));
        const double amp = std::pow(kmag, spec.slope) * std::exp(-kmag * kmag / (spec.k0 * spec.k0));
        typename SpectralField<Scalar>::ModeVector value;
        for (int c = 0; c < 3; ++c) {
          const auto z = detail::complex_gaussian(engine);
          value[c] = Complex(Scalar(amp * z.real()), Scalar(amp * z.imag()));
        }
        u.set_mode({kx, ky, kz}, value);
      }
    }
  }
  u = leray_project(std::move(u));
  const Scalar energy = Scalar(0.5) * norm(u) * norm(u);
  if (energy > 0) u *= std::sqrt(Scalar(spec.energy) / energy);
  return u;
}

template <typename Scalar>
SpectralField<Scalar> synthesize_field(const SpectralGrid<Scalar>& grid, const FieldSpec<Scalar>& spec) {
  if (const auto* modes = std::get_if<std::vector<ModeSpec<Scalar>>>(&spec)) {
    return synthesize_modes<Scalar>(grid, *modes);
  }
  return random_field(grid, std::get<RandomFieldSpec>(spec));
}

}  // namespace hvns
