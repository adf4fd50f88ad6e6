#include "nls/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <list>
#include <mutex>
#include <stdexcept>

namespace nls {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralTransform::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<cplx> buf_in, buf_out;
};

SpectralTransform::SpectralTransform(const GridSpec& grid) : grid_(grid), plans_(new Plans) {
  grid_.validate();
  const std::size_t size = grid_.size();
  plans_->buf_in.resize(size);
  plans_->buf_out.resize(size);
  int dims[5];
  for (int a = 0; a < grid_.d; ++a) dims[a] = grid_.n;

  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* in = reinterpret_cast<fftw_complex*>(plans_->buf_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(plans_->buf_out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft(grid_.d, dims, in, out, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft(grid_.d, dims, in, out, FFTW_BACKWARD, flags);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("SpectralTransform: planning failed");
}

SpectralTransform::~SpectralTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void SpectralTransform::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != grid_.size() || out.size() != grid_.size())
    throw std::invalid_argument("SpectralTransform::forward: size mismatch");
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->fwd, src, dst);
}

void SpectralTransform::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != grid_.size() || out.size() != grid_.size())
    throw std::invalid_argument("SpectralTransform::inverse: size mismatch");
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plans_->bwd, src, dst);
  const double inv_n = 1.0 / static_cast<double>(grid_.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) out[i] *= inv_n;
}

std::vector<cplx> SpectralTransform::forward(std::span<const cplx> in) const {
  std::vector<cplx> out(grid_.size());
  forward(in, out);
  return out;
}

std::vector<cplx> SpectralTransform::inverse(std::span<const cplx> in) const {
  std::vector<cplx> out(grid_.size());
  inverse(in, out);
  return out;
}

const SpectralTransform& transform_for(const GridSpec& grid) {
  static std::mutex reg_mutex;
  static std::list<std::unique_ptr<SpectralTransform>> registry;
  std::lock_guard<std::mutex> lock(reg_mutex);
  for (const auto& t : registry)
    if (t->grid() == grid) return *t;
  registry.push_back(std::make_unique<SpectralTransform>(grid));
  return *registry.back();
}

}  // namespace nls
