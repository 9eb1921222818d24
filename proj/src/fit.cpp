#include "gietlab/fit.hpp"

#include "gietlab/errors.hpp"

#include <cmath>
#include <limits>

namespace gietlab {

namespace {

void require_finite(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "series lengths differ");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw Error(ErrorCode::DegenerateSeries, "series has a non-finite entry", static_cast<long long>(i));
}

double r_squared(const std::vector<double>& xs, const std::vector<double>& ys, double slope,
                 double intercept) {
  double mean = 0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double tot = 0, res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    tot += (ys[i] - mean) * (ys[i] - mean);
    double e = ys[i] - (slope * xs[i] + intercept);
    res += e * e;
  }
  if (tot == 0) return 1.0;
  return 1.0 - res / tot;
}

}  // namespace

LineFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_finite(xs, ys);
  if (xs.size() < 3) throw Error(ErrorCode::DegenerateSeries, "need at least 3 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) throw Error(ErrorCode::DegenerateSeries, "abscissae have zero variance");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = r_squared(xs, ys, fit.slope, fit.intercept);
  fit.points = static_cast<int>(xs.size());
  return fit;
}

LineFit growth_fit(const std::vector<double>& series) {
  std::vector<double> xs(series.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
  return ols_fit(xs, series);
}

LineFit lad_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  require_finite(xs, ys);
  const std::size_t n = xs.size();
  double best = std::numeric_limits<double>::infinity();
  LineFit fit;
  bool found = false;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (xs[a] == xs[b]) continue;
      const double slope = (ys[b] - ys[a]) / (xs[b] - xs[a]);
      const double intercept = ys[a] - slope * xs[a];
      double cost = 0;
      for (std::size_t i = 0; i < n; ++i) cost += std::abs(ys[i] - slope * xs[i] - intercept);
      if (!found || cost < best - 1e-15 * (1 + std::abs(best))) {
        best = cost;
        fit.slope = slope;
        fit.intercept = intercept;
        found = true;
      }
    }
  }
  if (!found) throw Error(ErrorCode::DegenerateSeries, "need two distinct abscissae");
  fit.points = static_cast<int>(n);
  fit.r2 = r_squared(xs, ys, fit.slope, fit.intercept);
  return fit;
}

}  // namespace gietlab
