#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "hvns/errors.hpp"

namespace hvns {

using Index = Eigen::Index;
using Wavevector = std::array<int, 3>;

/// Periodic box (0,L)^3 sampled on n^3 collocation points.
///
/// Spectral coefficients are stored on the non-redundant half lattice
/// kz in [0, n/2], kx, ky in [-n/2, n/2); the partner u_{-k} = conj(u_k) is
/// implied. Storage index is ix + n*(iy + n*iz) with ix, iy the FFT-ordered
/// indices of kx, ky. Physical samples use the same ordering over
/// (ix, iy, iz) in [0,n)^3, x fastest.
///
/// Modes with any |k_i| = n/2 (Nyquist) are part of the index space but are
/// always held at zero by every operation.
template <typename Scalar>
class SpectralGrid {
 public:
  using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  SpectralGrid(int n, Scalar box_length) {
    if (n < 4 || n % 2 != 0) {
      throw InvalidGridError("grid size must be an even integer >= 4, got " + std::to_string(n));
    }
    if (!(box_length > 0) || !std::isfinite(static_cast<double>(box_length))) {
      throw InvalidGridError("box length must be positive and finite");
    }
    n_ = n;
    box_length_ = box_length;
    unit_ = Scalar(2) * std::numbers::pi_v<Scalar> / box_length;
    lattice_ = build_lattice(n);
  }

  int n() const { return n_; }
  int half() const { return n_ / 2 + 1; }
  Scalar box_length() const { return box_length_; }
  Scalar volume() const { return box_length_ * box_length_ * box_length_; }
  /// 2*pi/L, the physical wavenumber of the integer lattice unit.
  Scalar unit() const { return unit_; }
  /// Smallest Stokes eigenvalue (2*pi/L)^2.
  Scalar lambda1() const { return unit_ * unit_; }
  /// Largest retained |k_i| under the 2/3 rule.
  int dealias_radius() const { return n_ / 3; }
  Scalar spacing() const { return box_length_ / Scalar(n_); }
  /// Largest |k| over the lattice, used by exponential-weight guards.
  Scalar max_wavenumber() const { return std::sqrt(Scalar(3)) * Scalar(n_ / 2); }

  Index spectral_size() const { return Index(n_) * n_ * half(); }
  Index physical_size() const { return Index(n_) * n_ * n_; }

  Index spectral_index(int ix, int iy, int iz) const { return ix + Index(n_) * (iy + Index(n_) * iz); }
  Index physical_index(int ix, int iy, int iz) const { return ix + Index(n_) * (iy + Index(n_) * iz); }

  /// Signed integer wavenumber of an FFT-ordered index (n/2 maps to -n/2).
  int signed_wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
  /// FFT-ordered index of a signed wavenumber in (-n/2, n/2].
  int fft_index(int k) const { return k >= 0 ? k : k + n_; }

  bool in_lattice(const Wavevector& k) const {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(k[c]) > n_ / 2) return false;
    }
    return true;
  }

  Scalar eigenvalue(const Wavevector& k) const {
    return lambda1() * Scalar(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  }

  // Per-storage-index tables.
  const Eigen::ArrayXi& kx() const { return lattice_->kx; }
  const Eigen::ArrayXi& ky() const { return lattice_->ky; }
  const Eigen::ArrayXi& kz() const { return lattice_->kz; }
  /// |k|^2 in integer units.
  const RealArray& k_squared() const { return lattice_->k2; }
  /// Multiplicity of a stored coefficient in full-lattice sums (1 on kz = 0, else 2).
  const RealArray& weight() const { return lattice_->weight; }
  /// 1 inside the 2/3-rule band, 0 outside (including Nyquist).
  const RealArray& dealias_mask() const { return lattice_->dealias; }
  /// 0 where any component is Nyquist, 1 elsewhere.
  const RealArray& nyquist_mask() const { return lattice_->non_nyquist; }

  bool operator==(const SpectralGrid& other) const {
    return n_ == other.n_ && box_length_ == other.box_length_;
  }

 private:
  struct Lattice {
    Eigen::ArrayXi kx, ky, kz;
    RealArray k2, weight, dealias, non_nyquist;
  };

  std::shared_ptr<const Lattice> build_lattice(int n) const {
    auto lattice = std::make_shared<Lattice>();
    const Index size = spectral_size();
    lattice->kx.resize(size);
    lattice->ky.resize(size);
    lattice->kz.resize(size);
    lattice->k2.resize(size);
    lattice->weight.resize(size);
    lattice->dealias.resize(size);
    lattice->non_nyquist.resize(size);
    const int radius = n / 3;
    const int nyquist = n / 2;
    for (int iz = 0; iz < half(); ++iz) {
      for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
          const Index i = spectral_index(ix, iy, iz);
          const int kx = signed_wavenumber(ix);
          const int ky = signed_wavenumber(iy);
          const int kz = iz;
          lattice->kx[i] = kx;
          lattice->ky[i] = ky;
          lattice->kz[i] = kz;
          lattice->k2[i] = Scalar(kx * kx + ky * ky + kz * kz);
          lattice->weight[i] = kz == 0 ? Scalar(1) : Scalar(2);
          const bool nyq = std::abs(kx) == nyquist || std::abs(ky) == nyquist || kz == nyquist;
          lattice->non_nyquist[i] = nyq ? Scalar(0) : Scalar(1);
          const bool band = std::abs(kx) <= radius && std::abs(ky) <= radius && kz <= radius;
          lattice->dealias[i] = band ? Scalar(1) : Scalar(0);
        }
      }
    }
    return lattice;
  }

  int n_ = 0;
  Scalar box_length_ = 0;
  Scalar unit_ = 0;
  std::shared_ptr<const Lattice> lattice_;
};

template <typename Scalar>
SpectralGrid<Scalar> build_grid(int n, Scalar box_length) {
  return SpectralGrid<Scalar>(n, box_length);
}

using Grid = SpectralGrid<double>;

}  // namespace hvns
