#include "nls/morawetz.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include "nls/fft.hpp"
#include "nls/kernels.hpp"
#include "nls/pinned.hpp"
#include "nls/spectral.hpp"
#include "nls/textio.hpp"
#include "nls/variational.hpp"

namespace nls {

namespace {

double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 + t * (t - 2.0)); }
double smoothstep_d2(double t) { return 60.0 * t * (1.0 + t * (2.0 * t - 3.0)); }

struct ChiProfile {
  double eps;
  double operator()(double rho) const {
    if (rho <= 1.0 - eps) return 1.0;
    if (rho >= 1.0) return 0.0;
    return 1.0 - smoothstep((rho - 1.0 + eps) / eps);
  }
  double d1(double rho) const {
    if (rho <= 1.0 - eps || rho >= 1.0) return 0.0;
    return -smoothstep_d1((rho - 1.0 + eps) / eps) / eps;
  }
  double d2(double rho) const {
    if (rho <= 1.0 - eps || rho >= 1.0) return 0.0;
    return -smoothstep_d2((rho - 1.0 + eps) / eps) / (eps * eps);
  }
};

// Unit-argument tabulation of phi, psi, phi1: independent of R, cached per
// (d, epsilon).
struct UnitProfiles {
  int d;
  double eps;
  std::vector<double> mesh, phi, psi, phi1;
  CubicSpline phi_s, psi_s, phi1_s;
  double int_phi = 0.0;  // int_0^2 phi = unit c_psi
  double grad_residual = 0.0;
  bool phi_warning = false;
};

constexpr std::size_t kMesh = 8192;       // intervals on [0, 2]
constexpr std::size_t kSigma = 4096;      // sigma-quadrature intervals
constexpr std::size_t kFine = 131072;     // cumulative table for the d=3 reduction
constexpr std::size_t kMu = 64;           // angular nodes for d = 4, 5

/// Correlation h(rho) = (1/omega_d) int f(|rho e1 - w|) g(|w|) dw for radial
/// f, g supported in the unit ball, evaluated on the unit mesh.
std::vector<double> radial_correlation(int d, const std::vector<double>& mesh,
                                       const std::function<double(double)>& f,
                                       const std::function<double(double)>& g) {
  const double omega = unit_ball_volume(d);
  std::vector<double> out(mesh.size(), 0.0);

  if (d == 3) {
    // inner angular integral reduces to a difference of the antiderivative
    // F(r) = int_0^r tau f(tau) dtau
    std::vector<double> F(kFine + 1, 0.0);
    const double hf = 1.0 / kFine;
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 1; i <= kFine; ++i) {
      const double tau = i * hf;
      const double cur = tau * f(tau);
      acc += 0.5 * (prev + cur) * hf;
      F[i] = acc;
      prev = cur;
    }
    const double F_total = F[kFine];
    auto F_at = [&](double r) {
      if (r >= 1.0) return F_total;
      if (r <= 0.0) return 0.0;
      const double x = r * kFine;
      const std::size_t i = std::min(static_cast<std::size_t>(x), kFine - 1);
      const double w = x - i;
      return (1.0 - w) * F[i] + w * F[i + 1];
    };

    const double hs = 1.0 / kSigma;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(mesh.size()); ++ip) {
      const double rho = mesh[static_cast<std::size_t>(ip)];
      double sum = 0.0;
      if (rho < 1e-12) {
        // h(0) = (4 pi / omega) int sigma^2 f g
        for (std::size_t j = 0; j <= kSigma; ++j) {
          const double s = j * hs;
          const double v = s * s * f(s) * g(s);
          sum += (j == 0 || j == kSigma) ? v : ((j % 2) ? 4.0 * v : 2.0 * v);
        }
        out[static_cast<std::size_t>(ip)] = 4.0 * std::numbers::pi / omega * sum * hs / 3.0;
      } else {
        for (std::size_t j = 0; j <= kSigma; ++j) {
          const double s = j * hs;
          const double v = s * g(s) * (F_at(rho + s) - F_at(std::abs(rho - s)));
          sum += (j == 0 || j == kSigma) ? v : ((j % 2) ? 4.0 * v : 2.0 * v);
        }
        out[static_cast<std::size_t>(ip)] =
            2.0 * std::numbers::pi / (omega * rho) * sum * hs / 3.0;
      }
    }
  } else {
    // generic dimension: explicit angular quadrature with the (1-mu^2)
    // weight; Chebyshev-U nodes absorb the sqrt for d = 4
    std::vector<double> mu(kMu), wmu(kMu);
    if (d == 4) {
      for (std::size_t j = 0; j < kMu; ++j) {
        const double th = (j + 1.0) * std::numbers::pi / (kMu + 1.0);
        mu[j] = std::cos(th);
        wmu[j] = std::numbers::pi / (kMu + 1.0) * std::sin(th) * std::sin(th);
      }
    } else {  // d == 5: Gauss-Legendre with the polynomial weight folded in
      // 64-point Gauss-Legendre on [-1, 1] via Newton iteration on Legendre roots
      const std::size_t m = kMu;
      for (std::size_t j = 0; j < m; ++j) {
        double x = std::cos(std::numbers::pi * (j + 0.75) / (m + 0.5));
        for (int it = 0; it < 100; ++it) {
          double p0 = 1.0, p1 = x;
          for (std::size_t k = 2; k <= m; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
          }
          const double dp = m * (x * p1 - p0) / (x * x - 1.0);
          const double dx = p1 / dp;
          x -= dx;
          if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= m; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = m * (x * p1 - p0) / (x * x - 1.0);
        mu[j] = x;
        wmu[j] = 2.0 / ((1.0 - x * x) * dp * dp) * (1.0 - x * x);  // weight (1-mu^2) folded
      }
    }
    const double s_front = sphere_area(d - 1);
    const double hs = 1.0 / (kSigma / 4);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(mesh.size()); ++ip) {
      const double rho = mesh[static_cast<std::size_t>(ip)];
      double sum = 0.0;
      const std::size_t ns = kSigma / 4;
      for (std::size_t j = 0; j <= ns; ++j) {
        const double s = j * hs;
        double inner = 0.0;
        for (std::size_t q = 0; q < kMu; ++q) {
          const double r2 = rho * rho + s * s - 2.0 * rho * s * mu[q];
          inner += wmu[q] * f(std::sqrt(std::max(0.0, r2)));
        }
        const double v = g(s) * std::pow(s, d - 1) * inner;
        sum += (j == 0 || j == ns) ? v : ((j % 2) ? 4.0 * v : 2.0 * v);
      }
      out[static_cast<std::size_t>(ip)] = s_front / omega * sum * hs / 3.0;
    }
  }
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

std::shared_ptr<const UnitProfiles> unit_profiles(int d, double eps) {
  static std::mutex mtx;
  static std::map<std::pair<int, long long>, std::shared_ptr<const UnitProfiles>> cache;
  const auto key = std::make_pair(d, static_cast<long long>(std::llround(eps * 1e12)));
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  ChiProfile chi{eps};
  auto up = std::make_shared<UnitProfiles>();
  up->d = d;
  up->eps = eps;
  up->mesh.resize(kMesh + 1);
  for (std::size_t i = 0; i <= kMesh; ++i) up->mesh[i] = 2.0 * i / kMesh;

  auto chi2 = [chi](double r) { const double c = chi(r); return c * c; };
  const double pexp = potential_exponent(d);
  auto chi_pot = [chi, pexp](double r) { return std::pow(chi(r), pexp); };

  up->phi = radial_correlation(d, up->mesh, chi2, chi2);
  up->phi1 = radial_correlation(d, up->mesh, chi_pot, chi2);

  // psi(rho) = (1/rho) int_0^rho phi, cumulative trapezoid on the mesh
  up->psi.assign(up->mesh.size(), 0.0);
  const double h = up->mesh[1] - up->mesh[0];
  double acc = 0.0;
  up->psi[0] = up->phi[0];
  for (std::size_t i = 1; i < up->mesh.size(); ++i) {
    acc += 0.5 * (up->phi[i] + up->phi[i - 1]) * h;
    up->psi[i] = acc / up->mesh[i];
  }
  up->int_phi = acc;

  up->phi_s = CubicSpline(up->mesh, up->phi, true, 0.0);
  up->psi_s = CubicSpline(up->mesh, up->psi, true, 0.0);
  up->phi1_s = CubicSpline(up->mesh, up->phi1, true, 0.0);

  // tabulation invariants
  double worst = 0.0;
  for (std::size_t i = 0; i < up->mesh.size(); ++i) {
    const double rho = up->mesh[i];
    if (up->psi[i] - up->phi[i] < -1e-10)
      throw std::runtime_error("build_weights: psi - phi negative on the tabulation");
    // skip the outermost nodes: the natural spline end condition biases the
    // derivative there while psi itself continues exactly as c_psi/rho
    if (rho >= 0.05 && i + 2 < up->mesh.size()) {
      const double lhs = up->psi_s.derivative(rho);
      const double rhs = (up->phi[i] - up->psi[i]) / rho;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (i > 0 && up->phi[i] > up->phi[i - 1] + 1e-9) up->phi_warning = true;
  }
  up->grad_residual = worst;
  if (worst > 1e-6)
    throw std::runtime_error("build_weights: gradient identity residual above 1e-6");

  std::lock_guard<std::mutex> lock(mtx);
  cache[key] = up;
  return up;
}

// shared handle so copies of MorawetzWeightSet stay cheap
std::shared_ptr<const UnitProfiles> profile_handle(int d, double eps) {
  return unit_profiles(d, eps);
}

}  // namespace

MorawetzWeightSet::MorawetzWeightSet(int d, double epsilon, double R)
    : d_(d), eps_(epsilon), r_window_(R) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("MorawetzWeightSet: epsilon must be in (0, 1/2)");
  if (!(R > 0.0)) throw std::invalid_argument("MorawetzWeightSet: R must be positive");
  if (d < 3 || d > 5) throw std::invalid_argument("MorawetzWeightSet: d must be 3, 4 or 5");
  auto up = profile_handle(d, epsilon);
  omega_ = unit_ball_volume(d);
  mesh_ = up->mesh;
  phi_tab_ = up->phi;
  psi_tab_ = up->psi;
  phi1_tab_ = up->phi1;
  phi_s_ = up->phi_s;
  psi_s_ = up->psi_s;
  phi1_s_ = up->phi1_s;
  c_psi_ = up->int_phi;
  grad_residual_ = up->grad_residual;
  phi_warning_ = up->phi_warning;
}

void MorawetzWeightSet::finish_build() {
  omega_ = unit_ball_volume(d_);
  phi_s_ = CubicSpline(mesh_, phi_tab_, true, 0.0);
  psi_s_ = CubicSpline(mesh_, psi_tab_, true, 0.0);
  phi1_s_ = CubicSpline(mesh_, phi1_tab_, true, 0.0);
  c_psi_ = psi_tab_.back() * mesh_.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh_.size(); ++i) {
    const double rho = mesh_[i];
    if (psi_tab_[i] - phi_tab_[i] < -1e-10)
      throw std::runtime_error("weights cache: psi - phi negative");
    if (rho >= 0.05 && i + 2 < mesh_.size())
      worst = std::max(worst,
                       std::abs(psi_s_.derivative(rho) - (phi_tab_[i] - psi_tab_[i]) / rho));
    if (i > 0 && phi_tab_[i] > phi_tab_[i - 1] + 1e-9) phi_warning_ = true;
  }
  grad_residual_ = worst;
  if (worst > 1e-6) throw std::runtime_error("weights cache: gradient identity residual");
}

MorawetzWeightSet MorawetzWeightSet::from_tables(int d, double epsilon, double R,
                                                 std::vector<double> mesh,
                                                 std::vector<double> phi,
                                                 std::vector<double> psi,
                                                 std::vector<double> phi1) {
  MorawetzWeightSet w;
  w.d_ = d;
  w.eps_ = epsilon;
  w.r_window_ = R;
  w.mesh_ = std::move(mesh);
  w.phi_tab_ = std::move(phi);
  w.psi_tab_ = std::move(psi);
  w.phi1_tab_ = std::move(phi1);
  w.finish_build();
  return w;
}

MorawetzWeightSet build_weights(double epsilon, double R, int d) {
  return MorawetzWeightSet(d, epsilon, R);
}

void save_weights_cache(const std::filesystem::path& path, const MorawetzWeightSet& w,
                        const GridSpec& grid) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_weights_cache: cannot open " + path.string());
  os.write("NLSW", 4);
  const std::uint32_t version = 1;
  auto put = [&os](auto v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  put(version);
  put(static_cast<std::uint32_t>(w.dimension()));
  put(w.epsilon());
  put(w.R());
  put(static_cast<std::uint32_t>(grid.n));
  put(grid.l);
  put(static_cast<std::uint64_t>(w.unit_mesh().size()));
  auto put_vec = [&os](const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  put_vec(w.unit_mesh());
  put_vec(w.unit_phi());
  put_vec(w.unit_psi());
  put_vec(w.unit_phi1());
}

std::optional<MorawetzWeightSet> load_weights_cache(const std::filesystem::path& path,
                                                    double epsilon, double R, int d,
                                                    const GridSpec& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "NLSW", 4) != 0) return std::nullopt;
  auto get = [&is](auto& v) { is.read(reinterpret_cast<char*>(&v), sizeof v); };
  std::uint32_t version = 0, dd = 0, n = 0;
  double eps = 0.0, r = 0.0, l = 0.0;
  std::uint64_t m = 0;
  get(version);
  get(dd);
  get(eps);
  get(r);
  get(n);
  get(l);
  get(m);
  if (!is || version != 1 || static_cast<int>(dd) != d || eps != epsilon || r != R ||
      static_cast<int>(n) != grid.n || l != grid.l)
    return std::nullopt;
  auto get_vec = [&is, m]() {
    std::vector<double> v(m);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(m * sizeof(double)));
    return v;
  };
  auto mesh = get_vec();
  auto phi = get_vec();
  auto psi = get_vec();
  auto phi1 = get_vec();
  if (!is) return std::nullopt;
  return MorawetzWeightSet::from_tables(d, epsilon, R, std::move(mesh), std::move(phi),
                                        std::move(psi), std::move(phi1));
}

double MorawetzWeightSet::chi(double rho) const { return ChiProfile{eps_}(rho); }
double MorawetzWeightSet::chi_prime(double rho) const { return ChiProfile{eps_}.d1(rho); }
double MorawetzWeightSet::chi_second(double rho) const { return ChiProfile{eps_}.d2(rho); }

double MorawetzWeightSet::phi(double r) const {
  const double rho = r / r_window_;
  if (rho >= 2.0) return 0.0;
  return std::max(0.0, phi_s_(rho));
}

double MorawetzWeightSet::psi(double r) const {
  const double rho = r / r_window_;
  if (rho >= 2.0) return c_psi_ / rho;
  return psi_s_(rho);
}

double MorawetzWeightSet::phi1(double r) const {
  const double rho = r / r_window_;
  if (rho >= 2.0) return 0.0;
  return std::max(0.0, phi1_s_(rho));
}

double MorawetzWeightSet::phi_deriv(double r) const {
  const double rho = r / r_window_;
  if (rho >= 2.0) return 0.0;
  return phi_s_.derivative(rho) / r_window_;
}

double MorawetzWeightSet::psi_deriv(double r) const {
  // d/dr psi = (phi - psi)/r, the tabulation-consistent form
  if (r < 1e-12 * r_window_) return 0.0;
  return (phi(r) - psi(r)) / r;
}

// ---------------------------------------------------------------------------
// grid-bound kernels and densities

namespace {

std::vector<double> displacement_table(const GridSpec& g) {
  std::vector<double> t(g.n);
  for (int j = 0; j < g.n; ++j) t[j] = g.dx() * g.freq(j);
  return t;
}

struct Evaluator {
  const MorawetzWeightSet* w;
  GridSpec grid;
  const SpectralTransform* tr;
  std::size_t size;
  int d;
  double vol;
  std::vector<double> disp;
  std::array<std::size_t, 5> str;

  std::vector<cplx> phi_hat, phi1_hat, pmf_hat, errw_hat;
  std::vector<std::vector<cplx>> g_hat;  // psi(z) z_k
  std::vector<std::vector<cplx>> K_hat;  // grad[(d-1) psi + phi]
  std::vector<std::vector<cplx>> T_hat;  // (psi - phi) P_jk, upper triangle

  mutable std::vector<cplx> work_hat, work;

  Evaluator(const MorawetzWeightSet& ws, const GridSpec& g)
      : w(&ws), grid(g), tr(&transform_for(g)), size(g.size()), d(g.d),
        vol(g.cell_volume()), disp(displacement_table(g)), str(g.strides()) {
    work_hat.resize(size);
    work.resize(size);

    auto build = [&](const std::function<double(const double*, double)>& fn) {
      std::vector<cplx> phys(size);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
        const std::size_t idx = static_cast<std::size_t>(p);
        double z[5];
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          z[a] = disp[(idx / str[a]) % static_cast<std::size_t>(grid.n)];
          r2 += z[a] * z[a];
        }
        phys[idx] = cplx{fn(z, std::sqrt(r2)), 0.0};
      }
      return tr->forward(phys);
    };

    phi_hat = build([&](const double*, double r) { return w->phi(r); });
    phi1_hat = build([&](const double*, double r) { return w->phi1(r); });
    pmf_hat = build([&](const double*, double r) { return w->psi(r) - w->phi(r); });
    errw_hat = build([&](const double*, double r) {
      return std::abs(w->psi_deriv(r) + w->phi_deriv(r));
    });

    g_hat.resize(d);
    K_hat.resize(d);
    for (int k = 0; k < d; ++k) {
      g_hat[k] = build([&](const double* z, double r) { return w->psi(r) * z[k]; });
      K_hat[k] = build([&](const double* z, double r) {
        if (r < 1e-14) return 0.0;
        const double radial = (d - 1.0) * w->psi_deriv(r) + w->phi_deriv(r);
        return radial * z[k] / r;
      });
    }
    T_hat.resize(static_cast<std::size_t>(d) * (d + 1) / 2);
    std::size_t idx = 0;
    for (int j = 0; j < d; ++j) {
      for (int k = j; k < d; ++k, ++idx) {
        T_hat[idx] = build([&](const double* z, double r) {
          if (r < 1e-14) return 0.0;  // (psi - phi)(0) = 0, removable
          const double pjk = (j == k ? 1.0 : 0.0) - z[j] * z[k] / (r * r);
          return (w->psi(r) - w->phi(r)) * pjk;
        });
      }
    }
  }

  std::size_t tri_index(int j, int k) const {  // j <= k
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b, ++idx)
        if (a == j && b == k) return idx;
    throw std::logic_error("tri_index");
  }

  /// conv = IFFT(kernel_hat . density_hat) * vol, then <conv, weight> * vol.
  double conv_dot(std::span<const cplx> kernel_hat, std::span<const cplx> density_hat,
                  std::span<const double> weight) const {
    const std::size_t n = size;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      work_hat[static_cast<std::size_t>(i)] =
          kernel_hat[static_cast<std::size_t>(i)] * density_hat[static_cast<std::size_t>(i)];
    tr->inverse(work_hat, work);
    const std::size_t nb = (n + kernels::reduce_block - 1) / kernels::reduce_block;
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
      const std::size_t hi = std::min(n, lo + kernels::reduce_block);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += work[i].real() * weight[i];
      partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s * vol * vol;
  }
};

struct Densities {
  std::vector<double> rho, grad2, pot, absgrad;
  std::vector<std::vector<double>> mom;      // Im(conj u du_k)
  std::vector<std::vector<double>> gradrho;  // 2 Re(conj u du_k)
  std::vector<std::vector<double>> e;        // Re(conj du_j du_k), upper tri
  std::vector<cplx> rho_hat, grad2_hat;
  std::vector<std::vector<cplx>> mom_hat;
  double mass_u = 0.0, energy_u = 0.0;
};

Densities make_densities(const ComplexField& u, bool need_grad2_hat) {
  const GridSpec& g = u.grid;
  const int d = g.d;
  const std::size_t size = g.size();
  const auto& tr = transform_for(g);
  Densities dn;

  auto grad = gradient(u);

  dn.rho.resize(size);
  kernels::abs2(u.values, dn.rho);
  dn.pot.resize(size);
  kernels::abs_pow(u.values, potential_exponent(d), dn.pot);

  dn.mom.resize(d);
  dn.gradrho.resize(d);
  for (int k = 0; k < d; ++k) {
    dn.mom[k].resize(size);
    kernels::im_conj_prod(u.values, grad[k].values, dn.mom[k]);
    dn.gradrho[k].resize(size);
    kernels::re_conj_prod(u.values, grad[k].values, dn.gradrho[k]);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i)
      dn.gradrho[k][static_cast<std::size_t>(i)] *= 2.0;
  }

  dn.e.resize(static_cast<std::size_t>(d) * (d + 1) / 2);
  std::size_t idx = 0;
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k, ++idx) {
      dn.e[idx].resize(size);
      kernels::re_conj_prod(grad[j].values, grad[k].values, dn.e[idx]);
    }

  dn.grad2.resize(size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const cplx z = grad[j].values[static_cast<std::size_t>(i)];
      s += z.real() * z.real() + z.imag() * z.imag();
    }
    dn.grad2[static_cast<std::size_t>(i)] = s;
  }

  dn.absgrad.resize(size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i)
    dn.absgrad[static_cast<std::size_t>(i)] =
        std::sqrt(dn.rho[static_cast<std::size_t>(i)] * dn.grad2[static_cast<std::size_t>(i)]);

  std::vector<cplx> tmp(size);
  auto fft_real = [&](const std::vector<double>& v) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i)
      tmp[static_cast<std::size_t>(i)] = cplx{v[static_cast<std::size_t>(i)], 0.0};
    return tr.forward(tmp);
  };
  dn.rho_hat = fft_real(dn.rho);
  dn.mom_hat.resize(d);
  for (int k = 0; k < d; ++k) dn.mom_hat[k] = fft_real(dn.mom[k]);
  if (need_grad2_hat) dn.grad2_hat = fft_real(dn.grad2);

  const double vol = g.cell_volume();
  dn.mass_u = kernels::sum(dn.rho) * vol;
  const double kin = 0.5 * kernels::sum(dn.grad2) * vol;
  const double pot =
      (d - 1.0) / (2.0 * (d + 1.0)) * kernels::sum(dn.pot) * vol;
  dn.energy_u = kin - pot;
  return dn;
}

struct LedgerTerms {
  double m_r, mor10, mor11, mor12, mor13, mor5, mor6, mor7, mor8, err2;
};

LedgerTerms evaluate_terms(const Evaluator& ev, const Densities& dn) {
  const int d = ev.d;
  LedgerTerms t{};

  double m_r = 0.0;
  for (int k = 0; k < d; ++k)
    m_r += 2.0 * ev.conv_dot(ev.g_hat[k], dn.rho_hat, dn.mom[k]);
  t.m_r = m_r;

  const double dot_phi1 = ev.conv_dot(ev.phi1_hat, dn.rho_hat, dn.pot);
  const double dot_phi = ev.conv_dot(ev.phi_hat, dn.rho_hat, dn.pot);
  const double dot_pmf = ev.conv_dot(ev.pmf_hat, dn.rho_hat, dn.pot);
  t.mor10 = -4.0 * d / (d + 1.0) * dot_phi1;
  t.mor11 = -4.0 * (d - 1.0) / (d + 1.0) * dot_pmf;
  t.mor12 = -4.0 * d / (d + 1.0) * (dot_phi - dot_phi1);

  double mor13 = 0.0;
  for (int k = 0; k < d; ++k)
    mor13 += ev.conv_dot(ev.K_hat[k], dn.rho_hat, dn.gradrho[k]);
  t.mor13 = mor13;

  double mor5 = 0.0;
  for (int k = 0; k < d; ++k)
    mor5 += ev.conv_dot(ev.phi_hat, dn.mom_hat[k], dn.mom[k]);
  t.mor5 = -4.0 * mor5;

  double mor6 = 0.0;
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      const double c = (j == k) ? 1.0 : 2.0;
      mor6 += c * ev.conv_dot(ev.T_hat[ev.tri_index(j, k)], dn.mom_hat[j], dn.mom[k]);
    }
  t.mor6 = -4.0 * mor6;

  t.mor7 = 4.0 * ev.conv_dot(ev.phi_hat, dn.rho_hat, dn.grad2);

  double mor8 = 0.0;
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      const double c = (j == k) ? 1.0 : 2.0;
      mor8 += c * ev.conv_dot(ev.T_hat[ev.tri_index(j, k)], dn.rho_hat, dn.e[ev.tri_index(j, k)]);
    }
  t.mor8 = 4.0 * mor8;

  t.err2 = ev.conv_dot(ev.errw_hat, dn.rho_hat, dn.absgrad);
  return t;
}

/// Windowed mass / momentum / kinetic energy evaluated at every grid point by
/// convolution with chi^2(|z|/R); lattice values are sampled from these.
struct WindowFields {
  std::vector<double> mass;
  std::vector<std::vector<double>> mom;
  std::vector<double> kin;
};

WindowFields window_fields(const Evaluator& ev, const Densities& dn) {
  const std::size_t size = ev.size;
  std::vector<cplx> w2(size);
  const double R = ev.w->R();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    const std::size_t idx = static_cast<std::size_t>(p);
    double r2 = 0.0;
    for (int a = 0; a < ev.d; ++a) {
      const double z = ev.disp[(idx / ev.str[a]) % static_cast<std::size_t>(ev.grid.n)];
      r2 += z * z;
    }
    const double c = ev.w->chi(std::sqrt(r2) / R);
    w2[idx] = cplx{c * c, 0.0};
  }
  std::vector<cplx> w2_hat = ev.tr->forward(w2);

  auto conv_field = [&](std::span<const cplx> density_hat) {
    std::vector<double> out(size);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i)
      ev.work_hat[static_cast<std::size_t>(i)] =
          w2_hat[static_cast<std::size_t>(i)] * density_hat[static_cast<std::size_t>(i)];
    ev.tr->inverse(ev.work_hat, ev.work);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i)
      out[static_cast<std::size_t>(i)] = ev.work[static_cast<std::size_t>(i)].real() * ev.vol;
    return out;
  };

  WindowFields wf;
  wf.mass = conv_field(dn.rho_hat);
  wf.mom.resize(ev.d);
  for (int k = 0; k < ev.d; ++k) wf.mom[k] = conv_field(dn.mom_hat[k]);
  wf.kin = conv_field(dn.grad2_hat);
  return wf;
}

/// s-lattice (R/4)Z^d snapped to grid indices; spacing never below one cell.
struct Lattice {
  std::vector<std::size_t> flat_indices;
  double cell_measure;
};

Lattice build_lattice(const Evaluator& ev, const std::vector<double>& rho_density,
                      double max_abs_u) {
  const GridSpec& g = ev.grid;
  const int stride = std::max(1, static_cast<int>(std::llround(0.25 * ev.w->R() / g.dx())));
  Lattice lat;
  lat.cell_measure = std::pow(stride * g.dx(), g.d);

  // support box of |u| > 1e-10 max|u| per axis (index ranges)
  const double thr2 = 1e-20 * max_abs_u * max_abs_u;
  std::vector<std::vector<unsigned char>> axis_hit(g.d,
                                                   std::vector<unsigned char>(g.n, 0));
  for (std::size_t p = 0; p < ev.size; ++p) {
    if (rho_density[p] > thr2)
      for (int a = 0; a < g.d; ++a)
        axis_hit[a][(p / ev.str[a]) % static_cast<std::size_t>(g.n)] = 1;
  }

  // keep a lattice center when its R-ball (min-image metric) meets the
  // support along every axis
  const double R = ev.w->R();
  std::vector<std::vector<int>> axis_centers(g.d);
  for (int a = 0; a < g.d; ++a) {
    for (int j = 0; j < g.n; j += stride) {
      bool near = false;
      for (int m = 0; m < g.n && !near; ++m) {
        if (!axis_hit[a][m]) continue;
        double delta = std::abs(g.coord(j) - g.coord(m));
        delta = std::min(delta, 2.0 * g.l - delta);
        if (delta <= R) near = true;
      }
      if (near) axis_centers[a].push_back(j);
    }
  }
  for (int a = 0; a < g.d; ++a)
    if (axis_centers[a].empty()) return lat;  // zero field

  // cartesian product of per-axis center indices
  std::vector<std::size_t> counts(g.d);
  std::size_t total = 1;
  for (int a = 0; a < g.d; ++a) {
    counts[a] = axis_centers[a].size();
    total *= counts[a];
  }
  lat.flat_indices.reserve(total);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c, flat = 0;
    for (int a = g.d - 1; a >= 0; --a) {
      const std::size_t pick = rem % counts[a];
      rem /= counts[a];
      flat += static_cast<std::size_t>(axis_centers[a][pick]) * ev.str[a];
    }
    lat.flat_indices.push_back(flat);
  }
  return lat;
}

struct CoercedSums {
  double coerced75 = 0.0;     // (4/(omega_d R^d)) sum measure mass kin_xi
  double bulk_contrib = 0.0;  // (1/R^d) sum measure mass kin_xi
};

CoercedSums coerced_lattice_sum(const Evaluator& ev, const WindowFields& wf,
                                const Lattice& lat, double total_mass) {
  const double R = ev.w->R();
  const double floor =
      1e-6 * total_mass * std::pow(R / ev.grid.l, ev.d);
  double sum = 0.0;
  for (std::size_t c : lat.flat_indices) {
    const double m = wf.mass[c];
    double kin_xi = wf.kin[c];
    if (m >= floor) {
      double mom2 = 0.0;
      for (int k = 0; k < ev.d; ++k) mom2 += wf.mom[k][c] * wf.mom[k][c];
      kin_xi -= mom2 / m;
    }
    sum += m * kin_xi;
  }
  sum *= lat.cell_measure;
  CoercedSums out;
  const double rd = std::pow(R, ev.d);
  out.coerced75 = 4.0 / (ev.w->omega_d() * rd) * sum;
  out.bulk_contrib = sum / rd;
  return out;
}

double min_image_dist2(const GridSpec& g, std::span<const double> x,
                       std::span<const double> s) {
  double r2 = 0.0;
  for (int a = 0; a < g.d; ++a) {
    double delta = x[a] - s[a];
    delta -= 2.0 * g.l * std::round(delta / (2.0 * g.l));
    r2 += delta * delta;
  }
  return r2;
}

}  // namespace

// ---------------------------------------------------------------------------
// public operations

std::vector<double> windowed_xi(const ComplexField& u, const MorawetzWeightSet& w,
                                std::span<const double> center) {
  const GridSpec& g = u.grid;
  if (static_cast<int>(center.size()) != g.d)
    throw std::invalid_argument("windowed_xi: center dimension mismatch");
  auto grad = gradient(u);
  const auto xs = coord_table(g);
  const auto str = g.strides();
  const std::size_t size = g.size();
  const double R = w.R();

  const std::size_t nb = (size + kernels::reduce_block - 1) / kernels::reduce_block;
  std::vector<double> den_p(nb, 0.0);
  std::vector<std::array<double, 5>> num_p(nb, std::array<double, 5>{});
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
    const std::size_t hi = std::min(size, lo + kernels::reduce_block);
    double den = 0.0;
    std::array<double, 5> num{};
    for (std::size_t p = lo; p < hi; ++p) {
      double x[5];
      for (int a = 0; a < g.d; ++a)
        x[a] = xs[(p / str[a]) % static_cast<std::size_t>(g.n)];
      const double r2 = min_image_dist2(g, std::span<const double>(x, g.d), center);
      if (r2 >= R * R) continue;
      const double c = w.chi(std::sqrt(r2) / R);
      const double c2 = c * c;
      const cplx uv = u.values[p];
      den += c2 * (uv.real() * uv.real() + uv.imag() * uv.imag());
      for (int a = 0; a < g.d; ++a) {
        const cplx dv = grad[a].values[p];
        num[a] += c2 * (uv.real() * dv.imag() - uv.imag() * dv.real());
      }
    }
    den_p[static_cast<std::size_t>(b)] = den;
    num_p[static_cast<std::size_t>(b)] = num;
  }
  double den = 0.0;
  std::array<double, 5> num{};
  for (std::size_t b = 0; b < nb; ++b) {
    den += den_p[b];
    for (int a = 0; a < g.d; ++a) num[a] += num_p[b][a];
  }
  const double vol = g.cell_volume();
  den *= vol;

  std::vector<double> xi(g.d, 0.0);
  const double floor = 1e-6 * mass(u) * std::pow(R / g.l, g.d);
  if (den >= floor)
    for (int a = 0; a < g.d; ++a) xi[a] = -num[a] * vol / den;
  return xi;
}

double interaction_m(const ComplexField& u, const MorawetzWeightSet& w) {
  Evaluator ev(w, u.grid);
  Densities dn = make_densities(u, false);
  double m_r = 0.0;
  for (int k = 0; k < u.grid.d; ++k)
    m_r += 2.0 * ev.conv_dot(ev.g_hat[k], dn.rho_hat, dn.mom[k]);
  return m_r;
}

double interaction_m_direct(const ComplexField& u, const MorawetzWeightSet& w) {
  const GridSpec& g = u.grid;
  auto grad = gradient(u);
  const auto xs = coord_table(g);
  const auto str = g.strides();
  const std::size_t size = g.size();
  const double vol = g.cell_volume();

  std::vector<double> rho(size);
  kernels::abs2(u.values, rho);
  std::vector<std::vector<double>> mom(g.d, std::vector<double>(size));
  for (int k = 0; k < g.d; ++k) kernels::im_conj_prod(u.values, grad[k].values, mom[k]);

  double total = 0.0;
  std::vector<double> partial(size, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t px = 0; px < static_cast<std::ptrdiff_t>(size); ++px) {
    const std::size_t x = static_cast<std::size_t>(px);
    double xs_c[5];
    for (int a = 0; a < g.d; ++a)
      xs_c[a] = xs[(x / str[a]) % static_cast<std::size_t>(g.n)];
    double acc = 0.0;
    for (std::size_t y = 0; y < size; ++y) {
      double z[5];
      double r2 = 0.0;
      for (int a = 0; a < g.d; ++a) {
        double delta = xs_c[a] - xs[(y / str[a]) % static_cast<std::size_t>(g.n)];
        // wrap into [-l, l), same seam representative as the sampled kernels
        delta -= 2.0 * g.l * std::floor((delta + g.l) / (2.0 * g.l));
        z[a] = delta;
        r2 += delta * delta;
      }
      const double psi = w.psi(std::sqrt(r2));
      double dot = 0.0;
      for (int a = 0; a < g.d; ++a) dot += z[a] * mom[a][x];
      acc += rho[y] * psi * dot;
    }
    partial[x] = acc;
  }
  for (std::size_t x = 0; x < size; ++x) total += partial[x];
  return 2.0 * total * vol * vol;
}

double mr_bound_reference(double R, double mass_u, double energy_u) {
  return pinned::kMrBound * R * mass_u * energy_u;
}

MorawetzLedger morawetz_ledger(const TrajectoryRecord& traj, const MorawetzWeightSet& w,
                               std::size_t t_index, double fd_tolerance) {
  if (traj.snapshot_paths.size() < 3 || t_index == 0 ||
      t_index + 1 >= traj.snapshot_paths.size())
    throw std::invalid_argument(
        "morawetz_ledger: need three consecutive checkpoints around t_index");

  ComplexField um = traj.load_snapshot(t_index - 1);
  ComplexField u = traj.load_snapshot(t_index);
  ComplexField up = traj.load_snapshot(t_index + 1);

  Evaluator ev(w, u.grid);
  Densities dn = make_densities(u, true);
  const LedgerTerms terms = evaluate_terms(ev, dn);

  MorawetzLedger led;
  led.t = traj.snapshot_times[t_index];
  led.R = w.R();
  led.m_r = terms.m_r;
  led.m_r_bound = mr_bound_reference(w.R(), dn.mass_u, dn.energy_u);
  led.mor10 = terms.mor10;
  led.mor_rem = terms.mor11 + terms.mor12;
  led.mor13 = terms.mor13;
  led.mor5 = terms.mor5;
  led.mor6 = terms.mor6;
  led.mor7 = terms.mor7;
  led.mor8 = terms.mor8;
  led.positivity_868 = terms.mor8 + terms.mor6;

  {
    Densities dm = make_densities(um, false);
    Densities dp = make_densities(up, false);
    double mm = 0.0, mp = 0.0;
    for (int k = 0; k < u.grid.d; ++k) {
      mm += 2.0 * ev.conv_dot(ev.g_hat[k], dm.rho_hat, dm.mom[k]);
      mp += 2.0 * ev.conv_dot(ev.g_hat[k], dp.rho_hat, dp.mom[k]);
    }
    led.fd_derivative =
        (mp - mm) / (traj.snapshot_times[t_index + 1] - traj.snapshot_times[t_index - 1]);
  }

  WindowFields wf = window_fields(ev, dn);
  const double max_u = kernels::max_abs(u.values);
  Lattice lat = build_lattice(ev, dn.rho, max_u);
  led.coerced_75 = coerced_lattice_sum(ev, wf, lat, dn.mass_u).coerced75;

  const double ledger_sum = led.mor10 + led.mor_rem + led.mor13 + led.mor5 + led.mor6 +
                            led.mor7 + led.mor8;
  const double scale =
      std::max({std::abs(led.fd_derivative), std::abs(ledger_sum), 1e-300});
  led.identity_residual = std::abs(led.fd_derivative - ledger_sum) / scale;
  led.flagged = led.identity_residual > fd_tolerance;
  return led;
}

GalileanFrame build_galilean_frame(const ComplexField& u, const MorawetzWeightSet& w) {
  Evaluator ev(w, u.grid);
  Densities dn = make_densities(u, true);
  WindowFields wf = window_fields(ev, dn);
  const double max_u = kernels::max_abs(u.values);
  Lattice lat = build_lattice(ev, dn.rho, max_u);

  GalileanFrame frame;
  frame.R = w.R();
  const auto xs = coord_table(u.grid);
  const double floor = 1e-6 * dn.mass_u * std::pow(w.R() / u.grid.l, u.grid.d);
  for (std::size_t c : lat.flat_indices) {
    std::array<double, 5> center{};
    for (int a = 0; a < u.grid.d; ++a)
      center[a] = xs[(c / ev.str[a]) % static_cast<std::size_t>(u.grid.n)];
    std::array<double, 5> xi{};
    const double den = wf.mass[c];
    if (den >= floor)
      for (int a = 0; a < u.grid.d; ++a) xi[a] = -wf.mom[a][c] / den;
    frame.lattice.push_back(center);
    frame.xi_values.push_back(xi);
    frame.denominators.push_back(den);
  }
  return frame;
}

std::vector<MorawetzRow> morawetz_scan(const TrajectoryRecord& traj, double epsilon, double a,
                                       double T0, double R0, int J, int K_R) {
  if (!(T0 > 0.0) || !(R0 > 0.0) || J < 1 || K_R < 1)
    throw std::invalid_argument("morawetz_scan: bad window parameters");
  std::vector<std::size_t> t_idx;
  for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
    const double t = traj.snapshot_times[i];
    if (t >= a - 1e-12 && t <= a + T0 + 1e-12) t_idx.push_back(i);
  }
  if (t_idx.size() < 2)
    throw std::invalid_argument("morawetz_scan: [a, a+T0] not covered by checkpoints");

  std::vector<MorawetzRow> rows;
  for (int j = 0; j < K_R; ++j) {
    const double R = R0 * std::exp(static_cast<double>(J) * (j + 0.5) / K_R);
    MorawetzWeightSet w = build_weights(epsilon, R, 3);
    ComplexField first = traj.load_snapshot(t_idx.front());
    if (first.grid.d != 3) w = build_weights(epsilon, R, first.grid.d);
    Evaluator ev(w, first.grid);

    std::vector<MorawetzRow> block;
    std::vector<double> mr_series;
    for (std::size_t ti : t_idx) {
      ComplexField u = traj.load_snapshot(ti);
      Densities dn = make_densities(u, true);
      const LedgerTerms terms = evaluate_terms(ev, dn);
      WindowFields wf = window_fields(ev, dn);
      Lattice lat = build_lattice(ev, dn.rho, kernels::max_abs(u.values));
      const CoercedSums cs = coerced_lattice_sum(ev, wf, lat, dn.mass_u);

      MorawetzRow row{};
      row.t = traj.snapshot_times[ti];
      row.R = R;
      row.m_r = terms.m_r;
      row.mor10 = terms.mor10;
      row.mor_rem = terms.mor11 + terms.mor12;
      row.mor13 = terms.mor13;
      row.mor5 = terms.mor5;
      row.mor6 = terms.mor6;
      row.mor7 = terms.mor7;
      row.mor8 = terms.mor8;
      row.pos868 = terms.mor8 + terms.mor6;
      row.coerced75 = cs.coerced75;
      row.bulk_contrib = cs.bulk_contrib;
      block.push_back(row);
      mr_series.push_back(terms.m_r);
    }
    for (std::size_t i = 0; i < block.size(); ++i) {
      const auto& tv = block;
      if (i == 0)
        block[i].fd_dmdt = (mr_series[1] - mr_series[0]) / (tv[1].t - tv[0].t);
      else if (i + 1 == block.size())
        block[i].fd_dmdt = (mr_series[i] - mr_series[i - 1]) / (tv[i].t - tv[i - 1].t);
      else
        block[i].fd_dmdt = (mr_series[i + 1] - mr_series[i - 1]) / (tv[i + 1].t - tv[i - 1].t);
    }
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

BulkResult bulk_average(const TrajectoryRecord& traj, double epsilon, double a, double T0,
                        double R0, int J, int K_R) {
  if (J < 1 || !(R0 >= 1.0))
    throw std::invalid_argument("bulk_average: need J >= 1 and R0 >= 1");
  if (static_cast<double>(J) < 1.0 / epsilon - 1e-9)
    throw std::invalid_argument("bulk_average: need J >= 1/epsilon");

  std::vector<std::size_t> t_idx;
  for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
    const double t = traj.snapshot_times[i];
    if (t >= a - 1e-12 && t <= a + T0 + 1e-12) t_idx.push_back(i);
  }
  if (t_idx.empty()) throw std::invalid_argument("bulk_average: window not covered");

  BulkResult res;
  res.nu = R0 * std::exp(static_cast<double>(J)) / (T0 * J) + epsilon;

  // trapezoid weights over the checkpoint times inside the window
  std::vector<double> tw(t_idx.size(), 0.0);
  if (t_idx.size() == 1) {
    tw[0] = 1.0;
  } else {
    double span = traj.snapshot_times[t_idx.back()] - traj.snapshot_times[t_idx.front()];
    for (std::size_t i = 0; i < t_idx.size(); ++i) {
      double wgt = 0.0;
      if (i > 0) wgt += 0.5 * (traj.snapshot_times[t_idx[i]] - traj.snapshot_times[t_idx[i - 1]]);
      if (i + 1 < t_idx.size())
        wgt += 0.5 * (traj.snapshot_times[t_idx[i + 1]] - traj.snapshot_times[t_idx[i]]);
      tw[i] = wgt / span;
    }
  }

  double bulk = 0.0, err1 = 0.0, err2 = 0.0, dmdt = 0.0;
  bool any_lattice = false;
  int first_grid_d = 3;
  {
    ComplexField f0 = traj.load_snapshot(t_idx.front());
    first_grid_d = f0.grid.d;
  }

  for (int j = 0; j < K_R; ++j) {
    const double R = R0 * std::exp(static_cast<double>(J) * (j + 0.5) / K_R);
    MorawetzWeightSet w = build_weights(epsilon, R, first_grid_d);
    std::unique_ptr<Evaluator> ev;
    double mr_first = 0.0, mr_last = 0.0;
    double bulk_r = 0.0, err1_r = 0.0, err2_r = 0.0;

    for (std::size_t i = 0; i < t_idx.size(); ++i) {
      ComplexField u = traj.load_snapshot(t_idx[i]);
      if (!ev) ev = std::make_unique<Evaluator>(w, u.grid);
      Densities dn = make_densities(u, true);
      const LedgerTerms terms = evaluate_terms(*ev, dn);
      WindowFields wf = window_fields(*ev, dn);
      Lattice lat = build_lattice(*ev, dn.rho, kernels::max_abs(u.values));
      if (!lat.flat_indices.empty()) any_lattice = true;
      const CoercedSums cs = coerced_lattice_sum(*ev, wf, lat, dn.mass_u);

      bulk_r += tw[i] * cs.bulk_contrib;
      err1_r += tw[i] * (std::abs(terms.mor11) + std::abs(terms.mor12));
      err2_r += tw[i] * terms.err2;
      if (i == 0) mr_first = terms.m_r;
      if (i + 1 == t_idx.size()) mr_last = terms.m_r;
    }
    bulk += bulk_r / K_R;
    err1 += err1_r / K_R;
    err2 += err2_r / K_R;
    dmdt += std::abs(mr_last - mr_first) / T0 / K_R;
  }

  // a zero field has an empty effective support and a zero bulk; any other
  // field must produce lattice centers
  if (!any_lattice) {
    bool all_zero = true;
    ComplexField u = traj.load_snapshot(t_idx.front());
    if (kernels::max_abs(u.values) > 0.0) all_zero = false;
    if (!all_zero) throw std::runtime_error("bulk_average: lattice empty");
  }

  res.bulk = bulk;
  res.averaged_dmdt = dmdt;
  res.averaged_err1 = err1;
  res.averaged_err2 = err2;
  return res;
}

WindowedCoercivity windowed_coercivity(const ComplexField& u, const MorawetzWeightSet& w,
                                       const GroundStateCertificate& cert,
                                       std::span<const double> center) {
  const GridSpec& g = u.grid;
  if (static_cast<int>(center.size()) != g.d)
    throw std::invalid_argument("windowed_coercivity: center dimension mismatch");
  const std::size_t size = g.size();
  const auto xs = coord_table(g);
  const auto str = g.strides();
  const double R = w.R();

  // chi((x-s)/R) u and the window profile pieces
  ComplexField cu(g);
  std::vector<double> chi2(size), chi_lap_chi(size);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
    const std::size_t idx = static_cast<std::size_t>(p);
    double x[5];
    for (int a = 0; a < g.d; ++a)
      x[a] = xs[(idx / str[a]) % static_cast<std::size_t>(g.n)];
    const double r = std::sqrt(min_image_dist2(g, std::span<const double>(x, g.d), center));
    const double rho = r / R;
    const double c = w.chi(rho);
    cu.values[idx] = c * u.values[idx];
    chi2[idx] = c * c;
    double lap = 0.0;
    if (rho > 1e-12) {
      lap = (w.chi_second(rho) + (g.d - 1) * w.chi_prime(rho) / rho) / (R * R);
    } else {
      lap = g.d * w.chi_second(rho) / (R * R);
    }
    chi_lap_chi[idx] = c * lap;
  }

  WindowedCoercivity out;
  out.l2 = lp_norm(cu, 2.0);
  out.grad_l2 = sobolev_seminorm(cu, 1.0);
  out.product = out.l2 * out.grad_l2;

  // delta from the global products via (1-3 delta)^{(d-1)/2} = prod/threshold
  const double prod_glob = lp_norm(u, 2.0) * sobolev_seminorm(u, 1.0);
  const double ratio = prod_glob / cert.threshold_l2h1;
  out.delta = (1.0 - std::pow(ratio, 2.0 / (g.d - 1))) / 3.0;
  const double bound =
      std::pow(std::max(0.0, 1.0 - 2.0 * out.delta), 0.5 * (g.d - 1)) * cert.threshold_l2h1;
  out.margin = 1.0 - out.product / bound;

  // the window-gradient identity int |grad(chi u)|^2 = int chi^2 |grad u|^2
  // - chi Lap(chi) |u|^2
  auto grad = gradient(u);
  std::vector<double> rho_d(size), grad2(size);
  kernels::abs2(u.values, rho_d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
    double s = 0.0;
    for (int a = 0; a < g.d; ++a) s += std::norm(grad[a].values[static_cast<std::size_t>(i)]);
    grad2[static_cast<std::size_t>(i)] = s;
  }
  const double vol = g.cell_volume();
  const double lhs = out.grad_l2 * out.grad_l2;
  const double rhs = (kernels::dot(std::span<const double>(chi2), std::span<const double>(grad2)) -
                      kernels::dot(std::span<const double>(chi_lap_chi),
                                   std::span<const double>(rho_d))) *
                     vol;
  out.ibp_residual = std::abs(lhs - rhs) / std::max(lhs, 1e-300);

  // windowed potential vs boosted kinetic with the per-center xi
  const double p = potential_exponent(g.d);
  out.potential_p =
      g.d / (g.d + 1.0) * kernels::sum_abs_pow(cu.values, p) * vol;
  const auto xi = windowed_xi(u, w, center);
  std::vector<double> mom_k(size);
  double kin = kernels::dot(std::span<const double>(chi2), std::span<const double>(grad2)) * vol;
  double xi2 = 0.0;
  for (int a = 0; a < g.d; ++a) xi2 += xi[a] * xi[a];
  double cross = 0.0;
  for (int a = 0; a < g.d; ++a) {
    kernels::im_conj_prod(u.values, grad[a].values, mom_k);
    cross += xi[a] *
             kernels::dot(std::span<const double>(chi2), std::span<const double>(mom_k)) * vol;
  }
  const double mass_w =
      kernels::dot(std::span<const double>(chi2), std::span<const double>(rho_d)) * vol;
  out.boosted_kinetic = kin + 2.0 * cross + xi2 * mass_w;
  return out;
}

void write_morawetz_csv(const std::filesystem::path& path, std::span<const MorawetzRow> rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_morawetz_csv: cannot open " + path.string());
  os << "t,R,m_r,fd_dmdt,mor10,mor_rem,mor13,mor5,mor6,mor7,mor8,pos868,coerced75,"
        "bulk_contrib\n";
  for (const auto& r : rows) {
    os << fmt_double(r.t) << "," << fmt_double(r.R) << "," << fmt_double(r.m_r) << ","
       << fmt_double(r.fd_dmdt) << "," << fmt_double(r.mor10) << "," << fmt_double(r.mor_rem)
       << "," << fmt_double(r.mor13) << "," << fmt_double(r.mor5) << "," << fmt_double(r.mor6)
       << "," << fmt_double(r.mor7) << "," << fmt_double(r.mor8) << "," << fmt_double(r.pos868)
       << "," << fmt_double(r.coerced75) << "," << fmt_double(r.bulk_contrib) << "\n";
  }
}

}  // namespace nls
