#pragma once

namespace nls::pinned {

// Regression constants frozen on the first corpus run. The inequalities they
// feed hide unspecified absolute constants, so the corpus pins them once and
// later runs (including +-20% parameter perturbations) must stay below.

/// |M_R(t)| <= kMrBound * R * M(u) E(u)  (equals R E0^2 on normalized data).
inline constexpr double kMrBound = 10.0;

/// bulk_average <= kBulk * nu * E0^2 on the normalized corpus.
inline constexpr double kBulk = 1.0;

/// sup_t ||grad u(t)||_2^2 <= kH1Bound * E(u0) on sub-threshold trajectories.
inline constexpr double kH1Bound = 6.0;

}  // namespace nls::pinned
