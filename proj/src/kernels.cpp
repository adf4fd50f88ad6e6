#include "nls/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nls::kernels {

namespace {

template <class T, class BlockOp>
T blocked_sum(std::size_t n, BlockOp&& block) {
  const std::size_t nb = (n + reduce_block - 1) / reduce_block;
  std::vector<T> partial(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * reduce_block;
    const std::size_t hi = std::min(n, lo + reduce_block);
    partial[static_cast<std::size_t>(b)] = block(lo, hi);
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

template <class BlockOp>
double blocked_max(std::size_t n, BlockOp&& block) {
  const std::size_t nb = (n + reduce_block - 1) / reduce_block;
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * reduce_block;
    const std::size_t hi = std::min(n, lo + reduce_block);
    partial[static_cast<std::size_t>(b)] = block(lo, hi);
  }
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

inline double abs2_of(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

}  // namespace

double sum_abs2(std::span<const cplx> v) {
  return blocked_sum<double>(v.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += abs2_of(v[i]);
    return s;
  });
}

double sum_abs_pow(std::span<const cplx> v, double p) {
  return blocked_sum<double>(v.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::pow(std::abs(v[i]), p);
    return s;
  });
}

double max_abs(std::span<const cplx> v) {
  return blocked_max(v.size(), [&](std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(v[i]));
    return m;
  });
}

double sum(std::span<const double> v) {
  return blocked_sum<double>(v.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernels::dot: size mismatch");
  return blocked_sum<double>(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernels::dot: size mismatch");
  return blocked_sum<cplx>(a.size(), [&](std::size_t lo, std::size_t hi) {
    cplx s{0.0, 0.0};
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
    return s;
  });
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernels::max_abs_diff: size mismatch");
  return blocked_max(a.size(), [&](std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  });
}

void abs2(std::span<const cplx> v, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i)
    out[i] = abs2_of(v[i]);
}

void abs_pow(std::span<const cplx> v, double p, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i)
    out[i] = std::pow(std::abs(v[i]), p);
}

void scale(std::span<cplx> v, double s) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) v[i] *= s;
}

void scale(std::span<cplx> v, cplx s) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) v[i] *= s;
}

void multiply(std::span<cplx> v, std::span<const double> m) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) v[i] *= m[i];
}

void multiply(std::span<cplx> v, std::span<const cplx> m) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) v[i] *= m[i];
}

void add_scaled(std::span<cplx> v, std::span<const cplx> w, cplx s) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) v[i] += s * w[i];
}

void nonlinear_phase(std::span<cplx> v, double dt, double expo) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) {
    const double theta = dt * std::pow(std::abs(v[i]), expo);
    v[i] *= cplx{std::cos(theta), std::sin(theta)};
  }
}

void im_conj_prod(std::span<const cplx> a, std::span<const cplx> b, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i)
    out[i] = a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
}

void re_conj_prod(std::span<const cplx> a, std::span<const cplx> b, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i)
    out[i] = a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
}

namespace ref {

double sum_abs2(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& z : v) s += abs2_of(z);
  return s;
}

double sum_abs_pow(std::span<const cplx> v, double p) {
  double s = 0.0;
  for (const cplx& z : v) s += std::pow(std::abs(z), p);
  return s;
}

double max_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const cplx& z : v) m = std::max(m, std::abs(z));
  return m;
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

void abs2(std::span<const cplx> v, std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = abs2_of(v[i]);
}

void nonlinear_phase(std::span<cplx> v, double dt, double expo) {
  for (cplx& z : v) {
    const double theta = dt * std::pow(std::abs(z), expo);
    z *= cplx{std::cos(theta), std::sin(theta)};
  }
}

}  // namespace ref

}  // namespace nls::kernels
