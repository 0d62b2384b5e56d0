#pragma once

#include <functional>
#include <span>
#include <vector>

namespace floodreg {

struct SimplexOptions {
  double ftol = 1e-8;   // relative spread of objective values across the simplex
  int max_iter = 5000;  // per run
  int restarts = 2;     // extra runs from the incumbent best point
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
  int evals = 0;
};

// Derivative-free Nelder-Mead minimizer. The objective may return +inf to
// mark infeasible points; the start point must be feasible.
SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::vector<double> start, const SimplexOptions& options = {});

}  // namespace floodreg
