#include "nls/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "nls/fft.hpp"
#include "nls/kernels.hpp"

namespace nls {

namespace {

// |k|^2 at flat spectral index p.
struct ModeTables {
  std::vector<double> k;     // wavenumber per axis index
  std::array<std::size_t, 5> str;
  int d, n;

  explicit ModeTables(const GridSpec& g)
      : k(wavenumber_table(g)), str(g.strides()), d(g.d), n(g.n) {}

  double k2(std::size_t p) const {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      const double ka = k[(p / str[a]) % static_cast<std::size_t>(n)];
      s += ka * ka;
    }
    return s;
  }
};

}  // namespace

std::vector<ComplexField> gradient(const ComplexField& f) {
  const GridSpec& g = f.grid;
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(f.values);
  const auto ks = wavenumber_table(g);
  const auto str = g.strides();
  const std::size_t size = g.size();
  const int nyquist = g.n / 2;

  std::vector<ComplexField> out;
  out.reserve(g.d);
  std::vector<cplx> work(size);
  for (int a = 0; a < g.d; ++a) {
    const std::size_t stride = str[a];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
      const std::size_t m = (static_cast<std::size_t>(p) / stride) % static_cast<std::size_t>(g.n);
      if (static_cast<int>(m) == nyquist) {
        work[static_cast<std::size_t>(p)] = cplx{0.0, 0.0};
      } else {
        work[static_cast<std::size_t>(p)] = cplx{0.0, ks[m]} * hat[static_cast<std::size_t>(p)];
      }
    }
    ComplexField df(g);
    tr.inverse(work, df.values);
    df.time_tag = f.time_tag;
    out.push_back(std::move(df));
  }
  return out;
}

ComplexField fractional_derivative(const ComplexField& f, double s) {
  if (s < 0.0 || s > 2.0) throw std::invalid_argument("fractional_derivative: s must be in [0, 2]");
  const GridSpec& g = f.grid;
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(f.values);
  ModeTables mt(g);
  const std::size_t size = g.size();
  const double half_s = 0.5 * s;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    const double k2 = mt.k2(static_cast<std::size_t>(p));
    hat[static_cast<std::size_t>(p)] *= (k2 == 0.0 && s > 0.0) ? 0.0 : std::pow(k2, half_s);
  }
  ComplexField out(g);
  tr.inverse(hat, out.values);
  out.time_tag = f.time_tag;
  return out;
}

double lp_norm(const ComplexField& f, double p) {
  if (p == inf) return kernels::max_abs(f.values);
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1 or inf");
  const double vol = f.grid.cell_volume();
  double s;
  if (p == 2.0) {
    s = kernels::sum_abs2(f.values);
  } else {
    s = kernels::sum_abs_pow(f.values, p);
  }
  return std::pow(s * vol, 1.0 / p);
}

ComplexField free_propagator(const ComplexField& f, double t) {
  const GridSpec& g = f.grid;
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(f.values);
  ModeTables mt(g);
  const std::size_t size = g.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    const double phase = -mt.k2(static_cast<std::size_t>(p)) * t;
    hat[static_cast<std::size_t>(p)] *= cplx{std::cos(phase), std::sin(phase)};
  }
  ComplexField out(g);
  tr.inverse(hat, out.values);
  if (f.time_tag) out.time_tag = *f.time_tag + t;
  return out;
}

double sobolev_seminorm(const ComplexField& f, double s) {
  const GridSpec& g = f.grid;
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(f.values);
  ModeTables mt(g);
  const std::size_t size = g.size();
  const std::size_t nb = (size + kernels::reduce_block - 1) / kernels::reduce_block;
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
    const std::size_t hi = std::min(size, lo + kernels::reduce_block);
    double acc = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      const double k2 = mt.k2(p);
      const double w = (s == 1.0) ? k2 : ((s == 0.0) ? 1.0 : std::pow(k2, s));
      const cplx z = hat[p];
      acc += w * (z.real() * z.real() + z.imag() * z.imag());
    }
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  // Parseval: sum_x |f|^2 dx^d = (1/N) sum_k |f^|^2 dx^d
  return std::sqrt(sum * f.grid.cell_volume() / static_cast<double>(size));
}

double h1_norm(const ComplexField& f) {
  const double l2 = lp_norm(f, 2.0);
  const double h1 = sobolev_seminorm(f, 1.0);
  return std::sqrt(l2 * l2 + h1 * h1);
}

void dealias(ComplexField& f) {
  const GridSpec& g = f.grid;
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(f.values);
  const auto str = g.strides();
  const int cutoff = g.n / 3;
  const std::size_t size = g.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    for (int a = 0; a < g.d; ++a) {
      const std::size_t m =
          (static_cast<std::size_t>(p) / str[a]) % static_cast<std::size_t>(g.n);
      const int fr = g.freq(static_cast<int>(m));
      if (std::abs(fr) > cutoff) {
        hat[static_cast<std::size_t>(p)] = cplx{0.0, 0.0};
        break;
      }
    }
  }
  tr.inverse(hat, f.values);
}

double spectral_l2sq(const ComplexField& f) {
  const auto& tr = transform_for(f.grid);
  std::vector<cplx> hat = tr.forward(f.values);
  return kernels::sum_abs2(hat) / static_cast<double>(f.grid.size());
}

double spacetime_norm_from_values(std::span<const double> times, std::span<const double> g,
                                  double q, double t0, double t1) {
  if (times.size() != g.size() || times.size() < 1)
    throw std::invalid_argument("spacetime_norm: bad series");
  if (!(t1 > t0)) {
    if (t1 == t0 && q == inf) {
      // degenerate window: fall through to the sup below
    } else if (t1 == t0) {
      throw std::invalid_argument("spacetime_norm: empty interval");
    } else {
      throw std::invalid_argument("spacetime_norm: empty interval");
    }
  }
  if (t0 < times.front() - 1e-12 || t1 > times.back() + 1e-12)
    throw std::invalid_argument("spacetime_norm: interval outside series span");
  t0 = std::max(t0, times.front());
  t1 = std::min(t1, times.back());

  auto value_at = [&](double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return g.front();
    if (it == times.end()) return g.back();
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double tb = times[i], ta = times[i - 1];
    if (tb == ta) return g[i];
    const double w = (t - ta) / (tb - ta);
    return (1.0 - w) * g[i - 1] + w * g[i];
  };

  if (q == inf) {
    double m = std::max(value_at(t0), value_at(t1));
    for (std::size_t i = 0; i < times.size(); ++i)
      if (times[i] > t0 && times[i] < t1) m = std::max(m, g[i]);
    return m;
  }

  // trapezoid of g^q on the sample points restricted to [t0, t1]
  std::vector<double> ts, vs;
  ts.push_back(t0);
  vs.push_back(std::pow(value_at(t0), q));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > t0 && times[i] < t1) {
      ts.push_back(times[i]);
      vs.push_back(std::pow(g[i], q));
    }
  }
  ts.push_back(t1);
  vs.push_back(std::pow(value_at(t1), q));
  double integral = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    integral += 0.5 * (vs[i] + vs[i - 1]) * (ts[i] - ts[i - 1]);
  return std::pow(integral, 1.0 / q);
}

double spacetime_norm(std::span<const TimedField> series, const NormSpec& spec, double t0,
                      double t1) {
  spec.validate();
  if (series.empty()) throw std::invalid_argument("spacetime_norm: empty series");
  std::vector<double> times(series.size()), g(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    times[i] = series[i].t;
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("spacetime_norm: series not time-sorted");
    const ComplexField& f = *series[i].field;
    if (spec.s == 0.0) {
      g[i] = lp_norm(f, spec.r);
    } else {
      g[i] = lp_norm(fractional_derivative(f, spec.s), spec.r);
    }
  }
  if (series.size() == 1 && spec.q == inf) return g[0];
  return spacetime_norm_from_values(times, g, spec.q, t0, t1);
}

}  // namespace nls
