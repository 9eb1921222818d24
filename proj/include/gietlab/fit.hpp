#pragma once

#include <vector>

namespace gietlab {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
  int points = 0;
};

// Ordinary least squares of ys against xs. r2 is 1 when ys is constant.
// Throws DegenerateSeries with fewer than 3 points, non-finite data or
// constant xs.
LineFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Same with xs = 0, 1, 2, ...
LineFit growth_fit(const std::vector<double>& series);

// Least absolute deviations line. Needs 2 distinct xs; the minimizer is
// taken among lines through two data points, ties broken by the first pair.
LineFit lad_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace gietlab
