#include "floodreg/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace floodreg {

namespace {

struct Simplex {
  std::vector<std::vector<double>> pts;
  std::vector<double> fv;
};

// scipy-style initial simplex: perturb each coordinate of the start point.
Simplex initial_simplex(const std::vector<double>& x0,
                        const std::function<double(std::span<const double>)>& f, int& evals) {
  const std::size_t n = x0.size();
  Simplex s;
  s.pts.assign(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    double& c = s.pts[i + 1][i];
    c = (c != 0.0) ? c * 1.05 : 2.5e-4;
  }
  s.fv.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    s.fv[i] = f(s.pts[i]);
    ++evals;
  }
  return s;
}

void sort_simplex(Simplex& s) {
  const std::size_t m = s.fv.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.fv[a] < s.fv[b]; });
  Simplex out;
  out.pts.reserve(m);
  out.fv.reserve(m);
  for (auto i : order) {
    out.pts.push_back(std::move(s.pts[i]));
    out.fv.push_back(s.fv[i]);
  }
  s = std::move(out);
}

SimplexResult run_once(const std::function<double(std::span<const double>)>& f,
                       const std::vector<double>& x0, const SimplexOptions& opt, int& evals) {
  const std::size_t n = x0.size();
  Simplex s = initial_simplex(x0, f, evals);
  sort_simplex(s);

  SimplexResult res;
  int iter = 0;
  while (iter < opt.max_iter) {
    ++iter;
    const double spread = s.fv[n] - s.fv[0];
    if (spread <= opt.ftol * (std::abs(s.fv[0]) + opt.ftol)) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += s.pts[i][j];
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto affine = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (s.pts[n][j] - centroid[j]);
      return p;
    };

    auto reflected = affine(-1.0);
    const double fr = f(reflected);
    ++evals;

    if (fr < s.fv[0]) {
      auto expanded = affine(-2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        s.pts[n] = std::move(expanded);
        s.fv[n] = fe;
      } else {
        s.pts[n] = std::move(reflected);
        s.fv[n] = fr;
      }
    } else if (fr < s.fv[n - 1]) {
      s.pts[n] = std::move(reflected);
      s.fv[n] = fr;
    } else {
      const bool outside = fr < s.fv[n];
      auto contracted = affine(outside ? -0.5 : 0.5);
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, s.fv[n])) {
        s.pts[n] = std::move(contracted);
        s.fv[n] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            s.pts[i][j] = s.pts[0][j] + 0.5 * (s.pts[i][j] - s.pts[0][j]);
          s.fv[i] = f(s.pts[i]);
          ++evals;
        }
      }
    }
    sort_simplex(s);
  }

  res.x = s.pts[0];
  res.f = s.fv[0];
  res.iterations = iter;
  return res;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::vector<double> start, const SimplexOptions& options) {
  int evals = 0;
  SimplexResult best = run_once(objective, start, options, evals);
  for (int r = 0; r < options.restarts; ++r) {
    SimplexResult next = run_once(objective, best.x, options, evals);
    next.iterations += best.iterations;
    const bool improved = next.f < best.f - 1e-12 * (std::abs(best.f) + 1.0);
    if (next.f <= best.f) {
      next.converged = next.converged || best.converged;
      best = std::move(next);
    } else {
      best.iterations = next.iterations;
    }
    if (!improved) break;
  }
  best.evals = evals;
  return best;
}

}  // namespace floodreg
