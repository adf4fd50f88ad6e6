#include "nls/field.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nls/kernels.hpp"

namespace nls {

bool all_finite(const ComplexField& f) {
  for (const cplx& z : f.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

ComplexField sample_field(const GridSpec& g,
                          const std::function<cplx(std::span<const double>)>& fn) {
  ComplexField f(g);
  const auto xs = coord_table(g);
  const auto str = g.strides();
  const std::size_t size = g.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    double x[5];
    for (int a = 0; a < g.d; ++a)
      x[a] = xs[(static_cast<std::size_t>(p) / str[a]) % static_cast<std::size_t>(g.n)];
    f.values[static_cast<std::size_t>(p)] = fn(std::span<const double>(x, g.d));
  }
  return f;
}

ComplexField gaussian_field(const GridSpec& g, double amplitude, double width) {
  const double w2 = 2.0 * width * width;
  return sample_field(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return cplx{amplitude * std::exp(-r2 / w2), 0.0};
  });
}

ComplexField plane_wave(const GridSpec& g, std::span<const double> v) {
  if (static_cast<int>(v.size()) != g.d)
    throw std::invalid_argument("plane_wave: boost dimension mismatch");
  const double unit = g.lattice_unit();
  for (double c : v) {
    const double m = c / unit;
    if (std::abs(m - std::round(m)) > 1e-9)
      throw std::invalid_argument("plane_wave: velocity not on the reciprocal lattice");
  }
  std::vector<double> vv(v.begin(), v.end());
  return sample_field(g, [vv](std::span<const double> x) {
    double phase = 0.0;
    for (std::size_t a = 0; a < vv.size(); ++a) phase += vv[a] * x[a];
    return cplx{std::cos(phase), std::sin(phase)};
  });
}

double truncation_fraction(const ComplexField& f) {
  const GridSpec& g = f.grid;
  const auto xs = coord_table(g);
  const auto str = g.strides();
  const double half = 0.5 * g.l;
  const std::size_t size = g.size();
  // blocked two-way accumulation, deterministic like the kernels reductions
  const std::size_t nb = (size + kernels::reduce_block - 1) / kernels::reduce_block;
  std::vector<double> out_part(nb, 0.0), tot_part(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
    const std::size_t hi = std::min(size, lo + kernels::reduce_block);
    double so = 0.0, st = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      const cplx z = f.values[p];
      const double a2 = z.real() * z.real() + z.imag() * z.imag();
      st += a2;
      bool outside = false;
      for (int a = 0; a < g.d; ++a) {
        const double x = xs[(p / str[a]) % static_cast<std::size_t>(g.n)];
        if (std::abs(x) >= half) { outside = true; break; }
      }
      if (outside) so += a2;
    }
    out_part[static_cast<std::size_t>(b)] = so;
    tot_part[static_cast<std::size_t>(b)] = st;
  }
  double outside = 0.0, total = 0.0;
  for (std::size_t b = 0; b < nb; ++b) { outside += out_part[b]; total += tot_part[b]; }
  return total > 0.0 ? outside / total : 0.0;
}

namespace {
constexpr char kMagic[4] = {'N', 'L', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

static_assert(std::endian::native == std::endian::little,
              "NLSF writer assumes a little-endian host");
}  // namespace

void write_nlsf(const std::filesystem::path& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_nlsf: cannot open " + path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.d));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n));
  put<double>(os, f.grid.l);
  put<double>(os, f.time_tag.value_or(0.0));
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
  if (!os) throw std::runtime_error("write_nlsf: write failed for " + path.string());
}

ComplexField read_nlsf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_nlsf: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("read_nlsf: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("read_nlsf: unsupported version");
  const auto d = get<std::uint32_t>(is);
  const auto n = get<std::uint32_t>(is);
  const auto l = get<double>(is);
  const auto t = get<double>(is);
  GridSpec g(static_cast<int>(d), static_cast<int>(n), l);
  ComplexField f(g);
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
  if (!is) throw std::runtime_error("read_nlsf: truncated file " + path.string());
  f.time_tag = t;
  return f;
}

}  // namespace nls
