#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nls {

/// Cubic spline on strictly increasing nodes. Natural boundary by default;
/// the left end can be clamped to a prescribed slope (used for radial
/// profiles with f'(0) = 0).
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y, bool clamp_left = false,
              double left_slope = 0.0)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 3 nodes");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: nodes not increasing");

    // solve for second derivatives with a tridiagonal sweep
    std::vector<double> a(n), b(n), c(n), r(n);
    if (clamp_left) {
      const double h0 = x_[1] - x_[0];
      b[0] = 2.0 * h0;
      c[0] = h0;
      r[0] = 6.0 * ((y_[1] - y_[0]) / h0 - left_slope);
    } else {
      b[0] = 1.0;
      c[0] = 0.0;
      r[0] = 0.0;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hm = x_[i] - x_[i - 1];
      const double hp = x_[i + 1] - x_[i];
      a[i] = hm;
      b[i] = 2.0 * (hm + hp);
      c[i] = hp;
      r[i] = 6.0 * ((y_[i + 1] - y_[i]) / hp - (y_[i] - y_[i - 1]) / hm);
    }
    a[n - 1] = 0.0;
    b[n - 1] = 1.0;
    r[n - 1] = 0.0;

    m_.assign(n, 0.0);
    std::vector<double> cp(n), rp(n);
    cp[0] = c[0] / b[0];
    rp[0] = r[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = b[i] - a[i] * cp[i - 1];
      cp[i] = c[i] / denom;
      rp[i] = (r[i] - a[i] * rp[i - 1]) / denom;
    }
    m_[n - 1] = rp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = rp[i] - cp[i] * m_[i + 1];
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

  double operator()(double x) const {
    const auto [i, h, t] = locate(x);
    const double A = 1.0 - t, B = t;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const {
    const auto [i, h, t] = locate(x);
    const double A = 1.0 - t, B = t;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * m_[i + 1] - (3.0 * A * A - 1.0) * m_[i]) * h / 6.0;
  }

 private:
  struct Loc {
    std::size_t i;
    double h, t;
  };

  Loc locate(double x) const {
    if (x <= x_.front()) return {0, x_[1] - x_[0], (x - x_[0]) / (x_[1] - x_[0])};
    if (x >= x_.back()) {
      const std::size_t i = x_.size() - 2;
      return {i, x_[i + 1] - x_[i], (x - x_[i]) / (x_[i + 1] - x_[i])};
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    return {i, h, (x - x_[i]) / h};
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace nls
