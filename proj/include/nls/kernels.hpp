#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace nls::kernels {

using cplx = std::complex<double>;

// Data-parallel inner loops shared by all modules. Reductions are blocked:
// fixed-size blocks are summed independently (in parallel) and the block
// partials are combined in index order, so results do not depend on the
// number of threads. nls::kernels::ref holds plain serial loops used as the
// reference in tests and benchmarks.

inline constexpr std::size_t reduce_block = 4096;

// --- reductions ---
double sum_abs2(std::span<const cplx> v);
double sum_abs_pow(std::span<const cplx> v, double p);
double max_abs(std::span<const cplx> v);
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);  // sum conj(a)*b
double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);

// --- pointwise maps ---
void abs2(std::span<const cplx> v, std::span<double> out);
void abs_pow(std::span<const cplx> v, double p, std::span<double> out);
void scale(std::span<cplx> v, double s);
void scale(std::span<cplx> v, cplx s);
void multiply(std::span<cplx> v, std::span<const double> m);
void multiply(std::span<cplx> v, std::span<const cplx> m);
void add_scaled(std::span<cplx> v, std::span<const cplx> w, cplx s);  // v += s*w
// v *= exp(i * dt * |v|^expo)
void nonlinear_phase(std::span<cplx> v, double dt, double expo);
// out = Im(conj(a) * b), out = Re(conj(a) * b)
void im_conj_prod(std::span<const cplx> a, std::span<const cplx> b, std::span<double> out);
void re_conj_prod(std::span<const cplx> a, std::span<const cplx> b, std::span<double> out);

namespace ref {
double sum_abs2(std::span<const cplx> v);
double sum_abs_pow(std::span<const cplx> v, double p);
double max_abs(std::span<const cplx> v);
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
void abs2(std::span<const cplx> v, std::span<double> out);
void nonlinear_phase(std::span<cplx> v, double dt, double expo);
}  // namespace ref

}  // namespace nls::kernels
