#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <map>
#include <vector>

#include "hvns/spectral_field.hpp"

namespace hvns {

/// 3D real <-> half-complex transform on an m^3 lattice built from 1D
/// Eigen::FFT passes (complex along x and y, real along z).
///
/// Conventions: to_physical evaluates sum_k c_k exp(+2 pi i k.x/L) with no
/// scaling; to_spectral returns (1/m^3) sum_x f(x) exp(-2 pi i k.x/L), makes
/// the kz = 0 plane exactly Hermitian and clears Nyquist modes.
///
/// Holds mutable line buffers and plan caches: one instance per thread.
template <typename Scalar>
class FourierTransform {
 public:
  using Complex = std::complex<Scalar>;
  using Spectrum = SpectrumArray<Scalar>;
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit FourierTransform(int m) : m_(m), half_(m / 2 + 1) {
    fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    fft_.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
    line_in_.resize(m);
    line_out_.resize(m);
    real_line_.resize(m);
  }

  int size() const { return m_; }

  void to_physical(const Spectrum& spectrum, Values& samples) {
    const Index m = m_;
    work_ = spectrum;
    // x lines are contiguous
    for (Index plane = 0; plane < m * half_; ++plane) {
      Complex* line = work_.data() + plane * m;
      if (is_zero(line, m)) continue;
      fft_.inv(line_out_.data(), line, m);
      std::copy(line_out_.begin(), line_out_.end(), line);
    }
    for (Index iz = 0; iz < half_; ++iz) {
      for (Index ix = 0; ix < m; ++ix) {
        Complex* base = work_.data() + ix + m * m * iz;
        gather(base, m, line_in_.data(), m);
        fft_.inv(line_out_.data(), line_in_.data(), m);
        scatter(line_out_.data(), base, m, m);
      }
    }
    samples.resize(m * m * m);
    for (Index iy = 0; iy < m; ++iy) {
      for (Index ix = 0; ix < m; ++ix) {
        Complex* base = work_.data() + ix + m * iy;
        gather(base, m * m, line_in_.data(), half_);
        fft_.inv(real_line_.data(), line_in_.data(), m);
        for (Index iz = 0; iz < m; ++iz) samples[ix + m * (iy + m * iz)] = real_line_[iz];
      }
    }
  }

  void to_spectral(const Values& samples, Spectrum& spectrum) {
    const Index m = m_;
    spectrum.resize(m * m * half_);
    for (Index iy = 0; iy < m; ++iy) {
      for (Index ix = 0; ix < m; ++ix) {
        for (Index iz = 0; iz < m; ++iz) real_line_[iz] = samples[ix + m * (iy + m * iz)];
        fft_.fwd(line_out_.data(), real_line_.data(), m);
        scatter(line_out_.data(), spectrum.data() + ix + m * iy, m * m, half_);
      }
    }
    for (Index iz = 0; iz < half_; ++iz) {
      for (Index ix = 0; ix < m; ++ix) {
        Complex* base = spectrum.data() + ix + m * m * iz;
        gather(base, m, line_in_.data(), m);
        fft_.fwd(line_out_.data(), line_in_.data(), m);
        scatter(line_out_.data(), base, m, m);
      }
    }
    for (Index plane = 0; plane < m * half_; ++plane) {
      Complex* line = spectrum.data() + plane * m;
      std::copy(line, line + m, line_in_.begin());
      fft_.fwd(line, line_in_.data(), m);
    }
    spectrum *= Complex(Scalar(1) / (Scalar(m) * Scalar(m) * Scalar(m)));
    symmetrize(spectrum);
  }

  /// Exact Hermitian symmetry on kz = 0 and zero Nyquist content.
  void symmetrize(Spectrum& spectrum) const {
    const int m = m_;
    const int nyq = m / 2;
    for (int iy = 0; iy < m; ++iy) {
      for (int ix = 0; ix < m; ++ix) {
        const Index i = ix + Index(m) * iy;
        const int jx = (m - ix) % m;
        const int jy = (m - iy) % m;
        const Index j = jx + Index(m) * jy;
        if (j < i) continue;
        const Complex avg = Scalar(0.5) * (spectrum[i] + std::conj(spectrum[j]));
        spectrum[i] = avg;
        spectrum[j] = std::conj(avg);
      }
    }
    for (int iz = 0; iz < half_; ++iz) {
      for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) {
          if (ix == nyq || iy == nyq || iz == nyq) spectrum[ix + Index(m) * (iy + Index(m) * iz)] = Complex(0);
        }
      }
    }
  }

 private:
  static bool is_zero(const Complex* line, Index count) {
    for (Index i = 0; i < count; ++i) {
      if (line[i] != Complex(0)) return false;
    }
    return true;
  }

  static void gather(const Complex* base, Index stride, Complex* out, Index count) {
    for (Index i = 0; i < count; ++i) out[i] = base[i * stride];
  }

  static void scatter(const Complex* in, Complex* base, Index stride, Index count) {
    for (Index i = 0; i < count; ++i) base[i * stride] = in[i];
  }

  int m_;
  Index half_;
  Eigen::FFT<Scalar> fft_;
  Spectrum work_;
  std::vector<Complex> line_in_, line_out_;
  std::vector<Scalar> real_line_;
};

/// Per-thread transform cache keyed by lattice size.
template <typename Scalar>
FourierTransform<Scalar>& thread_transform(int m) {
  thread_local std::map<int, FourierTransform<Scalar>> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, FourierTransform<Scalar>(m)).first;
  return it->second;
}

/// Copy a spectrum from the n-lattice layout into the zero-padded m-lattice layout (m >= n).
template <typename Scalar>
SpectrumArray<Scalar> pad_spectrum(const SpectralGrid<Scalar>& grid, const SpectrumArray<Scalar>& spectrum, int m) {
  const int n = grid.n();
  const Index mh = m / 2 + 1;
  SpectrumArray<Scalar> out = SpectrumArray<Scalar>::Zero(Index(m) * m * mh);
  for (int iz = 0; iz < grid.half(); ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      const int ky = grid.signed_wavenumber(iy);
      const int jy = ky >= 0 ? ky : ky + m;
      for (int ix = 0; ix < n; ++ix) {
        const int kx = grid.signed_wavenumber(ix);
        const int jx = kx >= 0 ? kx : kx + m;
        out[jx + Index(m) * (jy + Index(m) * iz)] = spectrum[grid.spectral_index(ix, iy, iz)];
      }
    }
  }
  return out;
}

/// Inverse of pad_spectrum: keep only wavevectors representable on the n lattice.
template <typename Scalar>
SpectrumArray<Scalar> truncate_spectrum(const SpectralGrid<Scalar>& grid, const SpectrumArray<Scalar>& padded, int m) {
  const int n = grid.n();
  SpectrumArray<Scalar> out(grid.spectral_size());
  for (int iz = 0; iz < grid.half(); ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      const int ky = grid.signed_wavenumber(iy);
      const int jy = ky >= 0 ? ky : ky + m;
      for (int ix = 0; ix < n; ++ix) {
        const int kx = grid.signed_wavenumber(ix);
        const int jx = kx >= 0 ? kx : kx + m;
        out[grid.spectral_index(ix, iy, iz)] = padded[jx + Index(m) * (jy + Index(m) * iz)];
      }
    }
  }
  return out * grid.nyquist_mask().template cast<std::complex<Scalar>>();
}

/// Physical samples of one spectral component.
template <typename Scalar>
ScalarSamples<Scalar> to_physical(const SpectralGrid<Scalar>& grid, const SpectrumArray<Scalar>& spectrum) {
  ScalarSamples<Scalar> out(grid);
  thread_transform<Scalar>(grid.n()).to_physical(spectrum, out.values());
  return out;
}

/// Spectrum of scalar samples; keeps the mean, drops Nyquist content.
template <typename Scalar>
SpectrumArray<Scalar> to_spectrum(const ScalarSamples<Scalar>& samples) {
  if (!samples.values().allFinite()) throw NumericError("non-finite sample values");
  SpectrumArray<Scalar> out;
  thread_transform<Scalar>(samples.n()).to_spectral(samples.values(), out);
  return out;
}

template <typename Scalar>
VectorSamples<Scalar> to_physical(const SpectralField<Scalar>& field) {
  if (!field.all_finite()) throw NumericError("non-finite spectral coefficients");
  return {to_physical(field.grid(), field[0]), to_physical(field.grid(), field[1]),
          to_physical(field.grid(), field[2])};
}

/// Vector field from three sample arrays. The mean mode is removed.
template <typename Scalar>
SpectralField<Scalar> to_spectral(const VectorSamples<Scalar>& samples) {
  const auto& grid = samples[0].grid();
  if (!(samples[1].grid() == grid) || !(samples[2].grid() == grid)) throw ShapeError("sample grids differ");
  SpectralField<Scalar> out(grid);
  for (int c = 0; c < 3; ++c) {
    out[c] = to_spectrum(samples[c]);
    out[c][0] = 0;
  }
  return out;
}

}  // namespace hvns
