#include "frontier/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace frontier::stats {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double norm_logpdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * kPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_logcdf(double x) {
  if (x > -1.0) {
    // Phi(x) is well away from 0 here; log1p on the complement keeps
    // precision near Phi ~ 1.
    return std::log1p(-0.5 * std::erfc(x / std::sqrt(2.0)));
  }
  if (x > -36.0) {
    // erfc stays normal down to ~1e-300 in this range.
    return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  }
  // Deep tail: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
  const double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return norm_logpdf(x) - std::log(-x) + std::log(series);
}

double mills_ratio(double x) { return std::exp(norm_logpdf(x) - norm_logcdf(x)); }

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

}  // namespace frontier::stats
