#include "soda/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "soda/error.hpp"

namespace soda {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0,1)");
  }
  // Acklam's piecewise rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement step against erfc brings the result near machine
  // precision, which the W coefficients benefit from at large n.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

namespace {

double poly(const double* coef, int n, double x) {
  double r = coef[0];
  double xp = 1.0;
  for (int i = 1; i < n; ++i) {
    xp *= x;
    r += coef[i] * xp;
  }
  return r;
}

}  // namespace

double shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw DomainError("shapiro_wilk: need at least 3 observations");
  if (n > 5000) throw DomainError("shapiro_wilk: n > 5000 unsupported");

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) return 0.0;  // zero range

  // Expected normal order statistics (Blom scores) and their norm.
  std::vector<double> m(n);
  double ssq_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) /
                           (static_cast<double>(n) + 0.25));
    ssq_m += m[i] * m[i];
  }

  // Royston's polynomial-corrected weights.
  // Weights are antisymmetric: a[i] = -a[n-1-i], negative on the lower half.
  std::vector<double> a(n);
  const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
  if (n == 3) {
    a[2] = std::sqrt(0.5);
    a[1] = 0.0;
    a[0] = -a[2];
  } else {
    static const double c1[6] = {0.0,       0.221157,  -0.147981,
                                 -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0,       0.042981,  -0.293762,
                                 -1.752461, 5.682633, -3.582633};
    const double norm_m = std::sqrt(ssq_m);
    const double an = m[n - 1] / norm_m + poly(c1, 6, rsn);
    double phi;
    if (n > 5) {
      const double an1 = m[n - 2] / norm_m + poly(c2, 6, rsn);
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      a[n - 1] = an;
      a[n - 2] = an1;
      a[0] = -an;
      a[1] = -an1;
    } else {
      phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      a[n - 1] = an;
      a[0] = -an;
    }
    const std::size_t lo = (n > 5) ? 2 : 1;
    const double fac = std::sqrt(phi);
    for (std::size_t i = lo; i < n - lo; ++i) {
      a[i] = m[i] / fac;
    }
  }

  double xbar = 0.0;
  for (double v : x) xbar += v;
  xbar /= static_cast<double>(n);

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    numerator += a[i] * x[i];
    denominator += (x[i] - xbar) * (x[i] - xbar);
  }
  if (denominator <= 0.0) return 0.0;
  const double w = numerator * numerator / denominator;
  return std::clamp(w, 0.0, 1.0);
}

}  // namespace soda
