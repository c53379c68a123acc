#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mpradon {

using OdeRhs = std::function<std::vector<double>(double, const std::vector<double>&)>;

namespace detail {

inline std::vector<double> rk4_step(const OdeRhs& f, double t, const std::vector<double>& y,
                                    double h) {
  auto k1 = f(t, y);
  std::vector<double> tmp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  auto k2 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  auto k3 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
  auto k4 = f(t + h, tmp);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace detail

/// Classical RK4 with step-doubling error control. Throws on step-size
/// collapse with the partial trajectory time in the message.
inline std::vector<double> rk4_adaptive(const OdeRhs& f, double t0, double t1,
                                        std::vector<double> y, double tol) {
  if (t1 == t0) return y;
  double t = t0;
  double h = (t1 - t0) / 16.0;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  int guard = 0;
  while (dir * (t1 - t) > 1e-16 * std::abs(t1 - t0)) {
    if (++guard > 2000000)
      throw std::runtime_error("rk4_adaptive: step budget exhausted at t=" + std::to_string(t));
    if (dir * (t + h - t1) > 0) h = t1 - t;
    auto full = detail::rk4_step(f, t, y, h);
    auto half = detail::rk4_step(f, t + 0.5 * h, detail::rk4_step(f, t, y, 0.5 * h), 0.5 * h);
    double err = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      err = std::max(err, std::abs(full[i] - half[i]));
      scale = std::max(scale, std::abs(half[i]));
    }
    if (err <= tol * scale) {
      // local extrapolation of the two half steps
      for (std::size_t i = 0; i < y.size(); ++i) half[i] += (half[i] - full[i]) / 15.0;
      y = std::move(half);
      t += h;
      if (err < 0.01 * tol * scale) h *= 2.0;
    } else {
      h *= 0.5;
      if (std::abs(h) < 1e-14 * std::abs(t1 - t0))
        throw std::runtime_error("rk4_adaptive: step collapse at t=" + std::to_string(t));
    }
  }
  return y;
}

}  // namespace mpradon
