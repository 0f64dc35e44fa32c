#include "frontier/synthetic.hpp"

#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace frontier {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double normal(std::mt19937_64& rng) {
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * stats::kPi * u2);
}

std::string unit_name(std::size_t i, std::size_t n) {
  std::size_t width = 1;
  for (std::size_t v = n; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(i + 1);
  return "c" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

Dataset generate_synthetic(std::size_t n, std::size_t m, std::size_t s, std::size_t p,
                           std::uint64_t seed) {
  if (n < 1 || m < 1 || s < 1 || p < 1)
    throw ValidationError("synthetic dimensions must all be at least 1");

  std::mt19937_64 rng(seed);

  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = unit_name(i, n);

  // Income-style partition in 22:18:6 proportions, echoing a three-group
  // country classification; the first block is least efficient on average.
  std::vector<std::string> groups(n);
  const std::size_t n_li = (n * 22 + 23) / 46;   // round to nearest
  const std::size_t n_lmi = (n * 18 + 23) / 46;
  for (std::size_t i = 0; i < n; ++i)
    groups[i] = i < n_li ? "LI" : (i < std::min(n, n_li + n_lmi) ? "LMI" : "HUMI");

  // Planted efficiency: a share of units sit on the frontier (1.0), the rest
  // fall off with a group-dependent drift. This drives both the DEA spread
  // and the covariate correlations below.
  std::vector<double> eff(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double drift = groups[i] == "LI" ? 0.22 : (groups[i] == "LMI" ? 0.14 : 0.06);
    const bool on_frontier = uniform01(rng) < 0.25;
    eff[i] = on_frontier ? 1.0 : 1.0 - drift * uniform(rng, 0.3, 1.8);
    eff[i] = std::clamp(eff[i], 0.45, 1.0);
  }

  // Outputs scale with a unit size factor; inputs grow with size and with
  // inefficiency, so less efficient units burn more input per output.
  std::vector<double> size_factor(n);
  for (std::size_t i = 0; i < n; ++i) size_factor[i] = uniform(rng, 0.6, 2.4);

  const char* input_names[] = {"HBP", "MD", "NM"};
  const char* output_names[] = {"NMN", "SB", "U5M", "IMBA"};
  const char* covariate_names[] = {"CHE", "CHEC", "PVACC", "CCI", "OOPC", "EXHC",
                                   "BASHP", "MMLB"};

  std::vector<Column> columns;
  columns.push_back({"dmu", VariableRole::Identifier, {}, {}});

  for (std::size_t j = 0; j < m; ++j) {
    Column col;
    col.name = j < 3 ? input_names[j] : "IN" + std::to_string(j + 1);
    col.role = VariableRole::Input;
    const double base = uniform(rng, 2.0, 9.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double noise = std::exp(0.08 * normal(rng));
      col.values.push_back(base * size_factor[i] / eff[i] * noise);
    }
    columns.push_back(std::move(col));
  }

  for (std::size_t r = 0; r < s; ++r) {
    Column col;
    col.name = r < 4 ? output_names[r] : "OUT" + std::to_string(r + 1);
    col.role = VariableRole::Output;
    const double base = uniform(rng, 5.0, 60.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double noise = std::exp(0.05 * normal(rng));
      col.values.push_back(base * size_factor[i] * noise);
    }
    columns.push_back(std::move(col));
  }

  // Covariates: spending measures rise with inefficiency, coverage measures
  // fall with it, and the rest are background noise. Stored column-first so
  // OOPC can be built from CHE and CHEC after both exist.
  std::vector<std::vector<double>> cov(p, std::vector<double>(n));
  for (std::size_t j = 0; j < p; ++j) {
    const std::string name =
        j < 8 ? covariate_names[j] : "Z" + std::to_string(j + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double inef = 1.0 - eff[i];
      double v = 0.0;
      if (name == "CHE") {
        v = 4.0 + 9.0 * inef + 0.7 * normal(rng);
      } else if (name == "CHEC") {
        v = 30.0 + 80.0 * inef + 6.0 * normal(rng);
      } else if (name == "PVACC") {
        v = 85.0 - 40.0 * inef + 4.0 * normal(rng);
      } else if (name == "CCI") {
        v = 55.0 - 40.0 * inef + 5.0 * normal(rng);
      } else if (name == "OOPC") {
        v = 0.0;  // filled below as an exact combination
      } else if (name == "EXHC") {
        v = 6.0 + 10.0 * inef + 1.2 * normal(rng);
      } else {
        v = 10.0 + 3.0 * normal(rng);
      }
      cov[j][i] = v;
    }
  }
  // Out-of-pocket cost as an exact function of the two spending covariates:
  // the planted collinearity every rank-deficiency path must detect.
  if (p >= 5)
    for (std::size_t i = 0; i < n; ++i)
      cov[4][i] = 0.3 * cov[0][i] + 0.12 * cov[1][i] + 5.0;

  for (std::size_t j = 0; j < p; ++j) {
    Column col;
    col.name = j < 8 ? covariate_names[j] : "Z" + std::to_string(j + 1);
    col.role = VariableRole::Explanatory;
    col.values = std::move(cov[j]);
    columns.push_back(std::move(col));
  }

  columns.push_back({"income_group", VariableRole::Group, {}, groups});

  return Dataset(std::move(names), std::move(columns));
}

}  // namespace frontier
