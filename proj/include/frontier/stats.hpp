#pragma once

#include <span>
#include <string>

namespace frontier::stats {

inline constexpr double kPi = 3.14159265358979323846;

double norm_pdf(double x);
double norm_logpdf(double x);
double norm_cdf(double x);

// log Phi(x), finite down to the deep left tail (asymptotic expansion where
// erfc underflows). Returns -inf only when the value is below what a double
// can represent.
double norm_logcdf(double x);

// Inverse Mills ratio phi(x)/Phi(x), stable for large negative x.
double mills_ratio(double x);

// Upper-tail probability P[X >= x] of a chi-squared with df degrees of freedom.
double chi2_sf(double x, double df);

double mean(std::span<const double> v);
// Sample standard deviation, n-1 denominator. Zero when fewer than two values.
double sample_sd(std::span<const double> v);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
// Fixed-point rendering with the given number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace frontier::stats
