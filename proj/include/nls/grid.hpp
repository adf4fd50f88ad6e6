#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nls {

using cplx = std::complex<double>;

/// Periodic uniform grid on [-l, l)^d with n points per axis.
///
/// Spectral conventions used throughout the library:
///   - forward transform unnormalized, inverse carries 1/n^d;
///   - frequency ordering is the standard symmetric FFT layout,
///     mode index m represents the integer frequency m for m < n/2
///     and m - n otherwise, with wavenumber k = (pi/l) * frequency;
///   - the Nyquist mode (m = n/2) is dropped from odd (first-derivative)
///     multipliers; even multipliers keep it.
struct GridSpec {
  int d = 3;
  int n = 64;
  double l = 8.0;

  GridSpec() = default;
  GridSpec(int d_, int n_, double l_) : d(d_), n(n_), l(l_) { validate(); }

  void validate() const {
    if (d < 3 || d > 5) throw std::invalid_argument("GridSpec: d must be 3, 4 or 5");
    if (n < 8 || (n % 2) != 0) throw std::invalid_argument("GridSpec: n must be even and >= 8");
    if (!(l > 0.0)) throw std::invalid_argument("GridSpec: l must be positive");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }

  double dx() const { return 2.0 * l / n; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < d; ++a) v *= dx();
    return v;
  }

  /// Physical coordinate of sample j along any axis, j in [0, n).
  double coord(int j) const { return -l + j * dx(); }

  /// Signed integer frequency of mode index m.
  int freq(int m) const { return m < n / 2 ? m : m - n; }

  /// Wavenumber of mode index m: (pi/l) * freq(m).
  double wavenumber(int m) const { return std::numbers::pi / l * freq(m); }

  /// Smallest positive wavenumber; boosts must be integer multiples of it.
  double lattice_unit() const { return std::numbers::pi / l; }

  /// Row-major strides (axis 0 slowest, axis d-1 fastest).
  std::array<std::size_t, 5> strides() const {
    std::array<std::size_t, 5> s{};
    s[d - 1] = 1;
    for (int a = d - 2; a >= 0; --a) s[a] = s[a + 1] * static_cast<std::size_t>(n);
    return s;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Per-axis tables used by multiplier loops.
inline std::vector<double> coord_table(const GridSpec& g) {
  std::vector<double> t(g.n);
  for (int j = 0; j < g.n; ++j) t[j] = g.coord(j);
  return t;
}

inline std::vector<double> wavenumber_table(const GridSpec& g) {
  std::vector<double> t(g.n);
  for (int m = 0; m < g.n; ++m) t[m] = g.wavenumber(m);
  return t;
}

}  // namespace nls
