#pragma once

// Independent brute-force references for the acceptance checks.

#include "phisum/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using phisum::Vector;

/// min over x = a u(t1) + b u(t2) of |a| c(u(t1)) + |b| c(u(t2)) for a cost
/// on R^2: a full angular grid of step `step` joined with the `special`
/// angles where the cost has cusps, then successive zooms around the best
/// pair. Two parts suffice in the plane.
inline double two_part_gauge(const std::function<double(const Vector&)>& cost, const Vector& x, double step = 1e-3,
                             const std::vector<double>& special = {}) {
  const double pi = std::numbers::pi;
  auto dir = [](double t) {
    Vector u(2);
    u << std::cos(t), std::sin(t);
    return u;
  };
  auto split = [&](double t1, double t2, const double* c1, const double* c2) {
    const double det = std::sin(t2 - t1);
    if (std::abs(det) < 1e-12) return std::numeric_limits<double>::infinity();
    const double a = (x(0) * std::sin(t2) - x(1) * std::cos(t2)) / det;
    const double b = (x(1) * std::cos(t1) - x(0) * std::sin(t1)) / det;
    const double ca = c1 ? *c1 : cost(dir(t1));
    const double cb = c2 ? *c2 : cost(dir(t2));
    return std::abs(a) * ca + std::abs(b) * cb;
  };
  std::vector<double> th;
  for (int i = 0; i * step < pi; ++i) th.push_back(i * step);
  for (double t : special) th.push_back(std::remainder(t, pi) < 0 ? std::remainder(t, pi) + pi : std::remainder(t, pi));
  std::sort(th.begin(), th.end());
  const int n = static_cast<int>(th.size());
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = cost(dir(th[static_cast<std::size_t>(i)]));
  const double tx = std::atan2(x(1), x(0));
  double best = x.norm() * cost(dir(tx));
  double b1 = tx, b2 = tx + pi / 2;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      const double v = split(th[si], th[sj], &c[si], &c[sj]);
      if (v < best) best = v, b1 = th[si], b2 = th[sj];
    }
  double h = step;
  for (int zoom = 0; zoom < 8; ++zoom) {
    const double c1 = b1, c2 = b2;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double t1 = c1 + i * h / 5, t2 = c2 + j * h / 5;
        const double v = split(t1, t2, nullptr, nullptr);
        if (v < best) best = v, b1 = t1, b2 = t2;
      }
    h /= 5;
  }
  return best;
}

}  // namespace oracle
