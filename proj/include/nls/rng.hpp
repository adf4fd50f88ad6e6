#pragma once

#include <cstdint>
#include <random>

#include "nls/field.hpp"

namespace nls {

/// All randomness in the project flows through this generator: a
/// std::mt19937_64 stream with gaussians drawn by explicit Box-Muller on
/// its uniforms, so sequences are identical across platforms and builds.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Random smooth complex field: independent gaussian mode amplitudes under a
/// spectral envelope exp(-|k|^2 / k0^2), normalized to unit L^2 norm.
/// Mode loop order is fixed, so a given seed always yields the same field.
ComplexField random_smooth_field(const GridSpec& g, SeededRng& rng, double k0);

}  // namespace nls
