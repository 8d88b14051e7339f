#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <utility>

#include "hvns/spectral_grid.hpp"

namespace hvns {

/// Fourier coefficients of one scalar function on the half lattice.
template <typename Scalar>
using SpectrumArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Real vector field on the periodic box held as Fourier coefficients u_k,
/// u(x) = sum_k u_k exp(2 pi i k.x / L).
template <typename Scalar>
class SpectralField {
 public:
  using Complex = std::complex<Scalar>;
  using Component = SpectrumArray<Scalar>;
  using ModeVector = Eigen::Matrix<Complex, 3, 1>;

  explicit SpectralField(SpectralGrid<Scalar> grid) : grid_(std::move(grid)) {
    for (auto& c : components_) c = Component::Zero(grid_.spectral_size());
  }

  const SpectralGrid<Scalar>& grid() const { return grid_; }

  Component& operator[](int c) { return components_[c]; }
  const Component& operator[](int c) const { return components_[c]; }

  /// Set when the field is known to be divergence-free (Leray output, curl output).
  bool solenoidal() const { return solenoidal_; }
  void set_solenoidal(bool value) { solenoidal_ = value; }

  /// Coefficient at any lattice wavevector, reconstructing kz < 0 from the partner.
  ModeVector mode(const Wavevector& k) const {
    if (!grid_.in_lattice(k)) throw OutOfBandError("wavevector outside the lattice");
    const bool flip = k[2] < 0;
    const Wavevector q = flip ? Wavevector{-k[0], -k[1], -k[2]} : k;
    const Index i = storage_index(q);
    ModeVector out;
    for (int c = 0; c < 3; ++c) out[c] = flip ? std::conj(components_[c][i]) : components_[c][i];
    return out;
  }

  /// Assign u_k and its Hermitian partner u_{-k} = conj(u_k).
  void set_mode(const Wavevector& k, const ModeVector& value) {
    if (!grid_.in_lattice(k)) throw OutOfBandError("wavevector outside the lattice");
    const bool flip = k[2] < 0;
    const Wavevector q = flip ? Wavevector{-k[0], -k[1], -k[2]} : k;
    const Index i = storage_index(q);
    for (int c = 0; c < 3; ++c) components_[c][i] = flip ? std::conj(value[c]) : value[c];
    if (q[2] == 0) {
      const Index j = storage_index({-q[0], -q[1], 0});
      for (int c = 0; c < 3; ++c) components_[c][j] = flip ? value[c] : std::conj(value[c]);
    }
  }

  /// max_k |u_k| over stored modes.
  Scalar max_abs() const {
    return (components_[0].abs2() + components_[1].abs2() + components_[2].abs2()).sqrt().maxCoeff();
  }

  bool all_finite() const {
    for (const auto& c : components_) {
      if (!c.real().allFinite() || !c.imag().allFinite()) return false;
    }
    return true;
  }

  SpectralField& operator+=(const SpectralField& other) {
    check_same_grid(other);
    for (int c = 0; c < 3; ++c) components_[c] += other.components_[c];
    solenoidal_ = solenoidal_ && other.solenoidal_;
    return *this;
  }

  SpectralField& operator-=(const SpectralField& other) {
    check_same_grid(other);
    for (int c = 0; c < 3; ++c) components_[c] -= other.components_[c];
    solenoidal_ = solenoidal_ && other.solenoidal_;
    return *this;
  }

  SpectralField& operator*=(Scalar s) {
    for (auto& c : components_) c *= s;
    return *this;
  }

  /// Multiply every component by a real per-mode multiplier.
  template <typename Derived>
  SpectralField& scale_modes(const Eigen::ArrayBase<Derived>& multiplier) {
    for (auto& c : components_) c *= multiplier.template cast<Complex>();
    return *this;
  }

  void check_same_grid(const SpectralField& other) const {
    if (!(grid_ == other.grid_)) throw ShapeError("fields live on different grids");
  }

 private:
  Index storage_index(const Wavevector& k) const {
    return grid_.spectral_index(grid_.fft_index(k[0]), grid_.fft_index(k[1]), k[2]);
  }

  SpectralGrid<Scalar> grid_;
  std::array<Component, 3> components_;
  bool solenoidal_ = false;
};

template <typename Scalar>
SpectralField<Scalar> operator+(SpectralField<Scalar> a, const SpectralField<Scalar>& b) {
  a += b;
  return a;
}

template <typename Scalar>
SpectralField<Scalar> operator-(SpectralField<Scalar> a, const SpectralField<Scalar>& b) {
  a -= b;
  return a;
}

template <typename Scalar>
SpectralField<Scalar> operator*(Scalar s, SpectralField<Scalar> a) {
  a *= s;
  return a;
}

/// Real values on the n^3 collocation lattice, x index fastest.
template <typename Scalar>
class ScalarSamples {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit ScalarSamples(SpectralGrid<Scalar> grid)
      : grid_(std::move(grid)), values_(Values::Zero(grid_.physical_size())) {}

  ScalarSamples(SpectralGrid<Scalar> grid, Values values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.physical_size()) throw ShapeError("sample count must equal n^3");
  }

  const SpectralGrid<Scalar>& grid() const { return grid_; }
  int n() const { return grid_.n(); }

  Values& values() { return values_; }
  const Values& values() const { return values_; }

  Scalar& operator()(int ix, int iy, int iz) { return values_[grid_.physical_index(ix, iy, iz)]; }
  Scalar operator()(int ix, int iy, int iz) const { return values_[grid_.physical_index(ix, iy, iz)]; }

  /// Collocation coordinate of index i along any axis.
  Scalar coordinate(int i) const { return grid_.spacing() * Scalar(i); }

 private:
  SpectralGrid<Scalar> grid_;
  Values values_;
};

template <typename Scalar>
using VectorSamples = std::array<ScalarSamples<Scalar>, 3>;

using Field = SpectralField<double>;
using Samples = ScalarSamples<double>;

}  // namespace hvns
