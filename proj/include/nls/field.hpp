#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nls/grid.hpp"

namespace nls {

/// Complex-valued function sampled on a periodic uniform grid.
struct ComplexField {
  GridSpec grid;
  std::vector<cplx> values;
  std::optional<double> time_tag;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), values(g.size()) {}
  ComplexField(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("ComplexField: value count != n^d");
  }
};

/// True when every sample is finite.
bool all_finite(const ComplexField& f);

/// Fill from a pointwise function of position; fn receives the d coordinates.
ComplexField sample_field(const GridSpec& g,
                          const std::function<cplx(std::span<const double>)>& fn);

/// Gaussian amplitude * exp(-|x|^2 / (2 width^2)).
ComplexField gaussian_field(const GridSpec& g, double amplitude, double width);

/// Plane wave exp(i v.x); v must be on the reciprocal lattice.
ComplexField plane_wave(const GridSpec& g, std::span<const double> v);

/// Fraction of the mass lying outside the half box |x|_inf < l/2.
/// Measures how far the torus run is from a faithful R^d proxy.
double truncation_fraction(const ComplexField& f);

// Binary snapshot format: magic "NLSF", u32 version, u32 d, u32 n,
// f64 l, f64 t, then n^d interleaved (re, im) little-endian f64 in
// row-major axis order.
void write_nlsf(const std::filesystem::path& path, const ComplexField& f);
ComplexField read_nlsf(const std::filesystem::path& path);

}  // namespace nls
