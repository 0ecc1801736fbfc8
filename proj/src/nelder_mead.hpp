#pragma once

// Bounded Nelder-Mead. Trial points are projected onto the box before they
// are evaluated, so every evaluated point is feasible. A collapsed simplex is
// rebuilt around its best vertex until that stops paying off.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

namespace becsplit::detail {

template <std::size_t D>
struct NelderMeadResult {
  std::array<double, D> x{};
  double value = 0.0;
  int evaluations = 0;
};

template <std::size_t D>
NelderMeadResult<D> nelder_mead_box(const std::function<double(const std::array<double, D>&)>& f,
                                    std::array<double, D> start,
                                    const std::array<double, D>& lower,
                                    const std::array<double, D>& upper, int max_evaluations,
                                    double tolerance) {
  using Point = std::array<double, D>;
  auto project = [&](Point p) {
    for (std::size_t i = 0; i < D; ++i) p[i] = std::clamp(p[i], lower[i], upper[i]);
    return p;
  };

  NelderMeadResult<D> out;
  std::array<Point, D + 1> simplex;
  std::array<double, D + 1> values;
  auto eval = [&](const Point& p) {
    ++out.evaluations;
    return f(p);
  };

  simplex[0] = project(start);
  values[0] = eval(simplex[0]);
  double previous = values[0];
  for (int round = 0;; ++round) {
    if (round > 0) {
      std::size_t b = 0;
      for (std::size_t v = 1; v <= D; ++v) {
        if (values[v] < values[b]) b = v;
      }
      if (round > 1 && !(values[b] < previous - std::abs(previous) * 1e-9)) break;
      previous = values[b];
      simplex[0] = simplex[b];
      values[0] = values[b];
    }
    for (std::size_t i = 0; i < D; ++i) {
      Point p = simplex[0];
      const double width = upper[i] - lower[i];
      double h = 0.05 * width;
      if (p[i] + h > upper[i]) h = -h;
      p[i] += h;
      simplex[i + 1] = project(p);
      values[i + 1] = eval(simplex[i + 1]);
    }

    std::array<std::size_t, D + 1> order;
    while (out.evaluations < max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[D - 1];

      double spread = 0.0;
      for (std::size_t v = 0; v <= D; ++v) {
        for (std::size_t i = 0; i < D; ++i) {
          spread = std::max(spread, std::abs(simplex[v][i] - simplex[best][i]));
        }
      }
      if (spread <= tolerance || values[worst] - values[best] <= tolerance * 1e-3) break;

      Point centroid{};
      for (std::size_t v = 0; v <= D; ++v) {
        if (v == worst) continue;
        for (std::size_t i = 0; i < D; ++i) centroid[i] += simplex[v][i] / static_cast<double>(D);
      }
      auto along = [&](double t) {
        Point p;
        for (std::size_t i = 0; i < D; ++i) p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
        return project(p);
      };

      const Point xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < values[best]) {
        const Point xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[worst] = xe;
          values[worst] = fe;
        } else {
          simplex[worst] = xr;
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[worst] = xr;
        values[worst] = fr;
        continue;
      }
      const bool outside = fr < values[worst];
      const Point xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = xc;
        values[worst] = fc;
        continue;
      }
      // shrink toward the best vertex
      for (std::size_t v = 0; v <= D; ++v) {
        if (v == best) continue;
        for (std::size_t i = 0; i < D; ++i) {
          simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
        }
        values[v] = eval(simplex[v]);
      }
    }
    if (out.evaluations >= max_evaluations) break;
  }

  std::size_t best = 0;
  for (std::size_t v = 1; v <= D; ++v) {
    if (values[v] < values[best]) best = v;
  }
  out.x = simplex[best];
  out.value = values[best];
  return out;
}

}  // namespace becsplit::detail
