#pragma once

// Shared helpers for the unit suites: brute-force oracles and rough fields.

#include <complex>
#include <numbers>
#include <random>

#include "hvns/spectral_core.hpp"

namespace hvns::test {

inline constexpr double kPi = std::numbers::pi;

/// u = (sin y, 0, 0) on an L-periodic box with L = 2 pi.
inline Field shear_field(const Grid& grid, double amplitude = 1.0) {
  std::vector<ModeSpec<double>> modes{{{0, 1, 0}, Field::ModeVector(std::complex<double>(0, -0.5 * amplitude), 0, 0)}};
  auto u = synthesize_modes<double>(grid, modes);
  u.set_solenoidal(true);
  return u;
}

/// Random complex coefficients on every in-band mode, no projection.
inline Field rough_field(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Field u(grid);
  const int r = grid.dealias_radius();
  for (int kz = 0; kz <= r; ++kz) {
    for (int ky = -r; ky <= r; ++ky) {
      for (int kx = -r; kx <= r; ++kx) {
        if (kz == 0 && (ky < 0 || (ky == 0 && kx <= 0))) continue;
        Field::ModeVector v;
        for (int c = 0; c < 3; ++c) v[c] = detail::complex_gaussian(engine) / (1.0 + kx * kx + ky * ky + kz * kz);
        u.set_mode({kx, ky, kz}, v);
      }
    }
  }
  return u;
}

/// Direct evaluation of sum_k u_k exp(2 pi i k.x/L) at collocation point (ix,iy,iz).
inline std::array<double, 3> brute_force_point(const Field& u, int ix, int iy, int iz) {
  const auto& g = u.grid();
  const int h = g.n() / 2;
  std::array<std::complex<double>, 3> acc{};
  for (int kz = -h; kz <= h; ++kz) {
    for (int ky = -h; ky <= h; ++ky) {
      for (int kx = -h; kx <= h; ++kx) {
        if (std::abs(kx) == h || std::abs(ky) == h || std::abs(kz) == h) continue;
        const auto m = u.mode({kx, ky, kz});
        const double phase = 2 * kPi * (double(kx) * ix + double(ky) * iy + double(kz) * iz) / g.n();
        const std::complex<double> e(std::cos(phase), std::sin(phase));
        for (int c = 0; c < 3; ++c) acc[c] += m[c] * e;
      }
    }
  }
  return {acc[0].real(), acc[1].real(), acc[2].real()};
}

}  // namespace hvns::test
