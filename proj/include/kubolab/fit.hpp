#pragma once

#include <cmath>
#include <vector>

#include "kubolab/errors.hpp"

namespace kubolab {

/// Ordinary least squares y = intercept + slope x with standard errors.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
  int points = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("linear_fit: size mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw DomainError("linear_fit: need at least two points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  if (sxx == 0.0) throw DomainError("linear_fit: abscissae coincide");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / (n - 2);
    f.slope_error = std::sqrt(s2 / sxx);
    f.intercept_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

/// Fit of log|y| against log|x|; the slope is the scaling exponent.
inline LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] == 0.0 || y[i] == 0.0) continue;
    lx.push_back(std::log(std::abs(x[i])));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return linear_fit(lx, ly);
}

inline std::vector<double> logspace(double lo_exp, double hi_exp, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(std::pow(10.0, count == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * i / (count - 1)));
  return out;
}

}  // namespace kubolab
