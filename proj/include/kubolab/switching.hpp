#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "kubolab/errors.hpp"

namespace kubolab {

/// f: R -> [0,1], 0 for t <= -1, 1 for t >= 0, monotone.
struct SwitchingFunction {
  std::string id;
  std::string smoothness;
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  double operator()(double t) const { return value(t); }
};

namespace detail {

inline double bump_density(double s) {
  if (s <= -1.0 || s >= 0.0) return 0.0;
  return std::exp(-1.0 / ((s + 1.0) * (-s)));
}

struct BumpIntegral {
  static constexpr int panels = 64;
  static constexpr double width = 0.5 / panels;
  std::vector<double> prefix;  // prefix[j] = int_{-1}^{-1 + j width} b
  double half = 0.0;           // int_{-1}^{-1/2} b

  BumpIntegral() : prefix(panels + 1, 0.0) {
    for (int j = 0; j < panels; ++j) prefix[j + 1] = prefix[j] + panel(-1.0 + j * width, -1.0 + (j + 1) * width);
    half = prefix[panels];
  }
  static double panel(double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(bump_density, a, b);
  }
  // Integral over [-1, t] for t <= -1/2.
  double integrate(double t) const {
    if (t <= -1.0) return 0.0;
    const int j = std::min(panels - 1, static_cast<int>((t + 1.0) / width));
    return prefix[j] + panel(-1.0 + j * width, t);
  }
  // Uses b(s) = b(-1-s) so that f(t) + f(-1-t) = 1 holds to rounding.
  double fraction(double t) const {
    if (t <= -1.0) return 0.0;
    if (t >= 0.0) return 1.0;
    if (t <= -0.5) return integrate(t) / (2.0 * half);
    return 1.0 - integrate(-1.0 - t) / (2.0 * half);
  }
};

inline double binomial_real(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// C^infinity switch: normalised integral of exp(-1/((s+1)(-s))) over [-1, t].
inline SwitchingFunction bump_switch() {
  auto integral = std::make_shared<detail::BumpIntegral>();
  return {"bump", "C-infinity", [integral](double t) { return integral->fraction(t); },
          [integral](double t) { return detail::bump_density(t) / (2.0 * integral->half); }};
}

/// Polynomial smoothstep S_n(t+1) on [-1, 0] whose first n derivatives vanish at both ends (C^n).
inline SwitchingFunction ramp_switch(int power) {
  if (power < 2) throw DomainError("ramp_switch needs power >= 2");
  const int n = power;
  std::vector<double> coeff(n + 1);
  for (int k = 0; k <= n; ++k)
    coeff[k] = detail::binomial_real(n + k, k) * detail::binomial_real(2 * n + 1, n - k) * ((k & 1) ? -1.0 : 1.0);
  auto value = [coeff, n](double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 0.0) return 1.0;
    const double x = t + 1.0;
    double poly = 0.0;
    for (int k = n; k >= 0; --k) poly = poly * x + coeff[k];
    return std::pow(x, n + 1) * poly;
  };
  auto derivative = [coeff, n](double t) {
    if (t <= -1.0 || t >= 0.0) return 0.0;
    const double x = t + 1.0;
    double d = 0.0;
    for (int k = 0; k <= n; ++k) d += coeff[k] * (n + 1 + k) * std::pow(x, n + k);
    return d;
  };
  return {"smoothstep" + std::to_string(power), "C^" + std::to_string(power), value, derivative};
}

inline SwitchingFunction switching_by_id(const std::string& id) {
  if (id == "bump") return bump_switch();
  if (id.rfind("smoothstep", 0) == 0) {
    int p = id.size() > 10 ? std::stoi(id.substr(10)) : 2;
    return ramp_switch(p);
  }
  throw DomainError("unknown switching function '" + id + "'");
}

}  // namespace kubolab
