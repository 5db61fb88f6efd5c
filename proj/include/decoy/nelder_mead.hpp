#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace decoy {

struct NelderMeadOptions {
  int max_evaluations = 3000;
  double initial_step = 0.5;
  double f_tolerance = 1e-10;  ///< relative spread of simplex values
  double x_tolerance = 1e-7;   ///< simplex diameter, infinity norm
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Minimizes f with the dimension-adaptive coefficients of Gao and Han
// (reflection 1, expansion 1 + 2/n, contraction 3/4 - 1/(2n), shrink 1 - 1/n).
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> start, const NelderMeadOptions& opt = {}) {
  const std::size_t n = start.size();
  const double dim = static_cast<double>(n);
  const double expansion = 1.0 + 2.0 / dim;
  const double contraction = 0.75 - 0.5 / dim;
  const double shrink = n > 1 ? 1.0 - 1.0 / dim : 0.5;

  struct Vertex {
    std::vector<double> x;
    double f;
  };
  NelderMeadResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? INFINITY : v;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back({start, eval(start)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = start;
    x[i] += opt.initial_step;
    simplex.push_back({x, eval(x)});
  }
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

  auto along = [&](const std::vector<double>& origin, const std::vector<double>& toward, double t) {
    std::vector<double> x(n);
    for (std::size_t c = 0; c < n; ++c) x[c] = origin[c] + t * (toward[c] - origin[c]);
    return x;
  };

  while (result.evaluations < opt.max_evaluations) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();
    const Vertex& worst = simplex.back();

    double diameter = 0.0;
    for (const auto& v : simplex) {
      for (std::size_t c = 0; c < n; ++c) diameter = std::max(diameter, std::abs(v.x[c] - best.x[c]));
    }
    const double spread = worst.f - best.f;
    if (spread <= opt.f_tolerance * std::abs(best.f) && diameter <= opt.x_tolerance) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < n; ++c) centroid[c] += simplex[v].x[c] / dim;
    }

    Vertex reflected{along(centroid, worst.x, -1.0), 0.0};
    reflected.f = eval(reflected.x);
    if (reflected.f < best.f) {
      Vertex expanded{along(centroid, worst.x, -expansion), 0.0};
      expanded.f = eval(expanded.x);
      simplex.back() = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
      continue;
    }
    if (reflected.f < simplex[n - 1].f) {
      simplex.back() = std::move(reflected);
      continue;
    }
    const bool outside = reflected.f < worst.f;
    Vertex contracted{along(centroid, worst.x, outside ? -contraction : contraction), 0.0};
    contracted.f = eval(contracted.x);
    if (contracted.f < (outside ? reflected.f : worst.f)) {
      simplex.back() = std::move(contracted);
      continue;
    }
    for (std::size_t v = 1; v <= n; ++v) {
      simplex[v].x = along(simplex[0].x, simplex[v].x, shrink);
      simplex[v].f = eval(simplex[v].x);
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  result.x = simplex.front().x;
  result.value = simplex.front().f;
  return result;
}

}  // namespace decoy
