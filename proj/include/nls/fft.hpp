#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nls/grid.hpp"

namespace nls {

/// d-dimensional complex FFT on a GridSpec, backed by FFTW.
///
/// Forward is unnormalized; inverse divides by n^d. Plans use FFTW_ESTIMATE
/// so the chosen algorithm (and hence round-off) is reproducible run to run.
class SpectralTransform {
 public:
  explicit SpectralTransform(const GridSpec& grid);
  ~SpectralTransform();

  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const GridSpec& grid() const { return grid_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

  std::vector<cplx> forward(std::span<const cplx> in) const;
  std::vector<cplx> inverse(std::span<const cplx> in) const;

 private:
  GridSpec grid_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Shared per-grid transform instances (plan creation is expensive).
const SpectralTransform& transform_for(const GridSpec& grid);

}  // namespace nls
