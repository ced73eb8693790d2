#include "treelift/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "treelift/error.hpp"

namespace treelift {

double chi_square_sf(double statistic, int df) {
  if (df <= 0) throw Error("chi-square needs at least one degree of freedom");
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquare chi_square_uniform(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw Error("chi-square needs at least two cells");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  ChiSquare r;
  r.df = static_cast<int>(counts.size()) - 1;
  r.min_expected = expected;
  if (total == 0) return r;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    r.statistic += diff * diff / expected;
  }
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

double binomial_z(std::uint64_t successes, std::uint64_t trials, double p) {
  const double n = static_cast<double>(trials);
  return (static_cast<double>(successes) - n * p) / std::sqrt(n * p * (1 - p));
}

}  // namespace treelift
