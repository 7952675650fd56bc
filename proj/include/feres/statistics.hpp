#ifndef FERES_STATISTICS_HPP
#define FERES_STATISTICS_HPP

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "feres/errors.hpp"

namespace feres::stats {

struct ChiSquare {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

inline double upper_tail(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

/// Goodness of fit of observed counts against expected probabilities.
inline ChiSquare chi_square_fit(std::span<const std::size_t> counts, std::span<const double> probabilities) {
  if (counts.size() != probabilities.size()) throw Error(ErrorKind::validation, "chi-square size mismatch");
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(c);
  ChiSquare r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = total * probabilities[i];
    if (expected <= 0.0) {
      if (counts[i] != 0) return {INFINITY, 0.0, 0.0};
      continue;
    }
    const double d = static_cast<double>(counts[i]) - expected;
    r.statistic += d * d / expected;
    ++used;
  }
  r.dof = used > 0 ? static_cast<double>(used - 1) : 0.0;
  r.p_value = upper_tail(r.statistic, r.dof);
  return r;
}

inline ChiSquare chi_square_uniform(std::span<const std::size_t> counts) {
  const std::vector<double> p(counts.size(), 1.0 / static_cast<double>(counts.size()));
  return chi_square_fit(counts, p);
}

/// Two-sample homogeneity test on binned counts (samples may differ in size).
inline ChiSquare chi_square_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::validation, "chi-square size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  ChiSquare r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double sum = static_cast<double>(a[i] + b[i]);
    if (sum == 0.0) continue;
    const double d = ka * static_cast<double>(a[i]) - kb * static_cast<double>(b[i]);
    r.statistic += d * d / sum;
    ++used;
  }
  r.dof = used > 0 ? static_cast<double>(used - 1) : 0.0;
  r.p_value = upper_tail(r.statistic, r.dof);
  return r;
}

/// Counts of values in [lo, hi) over `bins` equal cells; values outside are clamped.
inline std::vector<std::size_t> histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    if (t < 0.0) t = 0.0;
    auto i = static_cast<std::size_t>(t);
    if (i >= bins) i = bins - 1;
    counts[i]++;
  }
  return counts;
}

}  // namespace feres::stats

#endif  // FERES_STATISTICS_HPP
