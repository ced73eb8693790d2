#pragma once

#include <cstdint>
#include <span>

namespace treelift {

struct ChiSquare {
  double statistic = 0;
  int df = 0;
  double p_value = 1;
  double min_expected = 0;
};

// Pearson test of `counts` against the uniform distribution on its cells.
ChiSquare chi_square_uniform(std::span<const std::uint64_t> counts);

// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, int df);

// z-score of `successes` in `trials` Bernoulli(p) draws.
double binomial_z(std::uint64_t successes, std::uint64_t trials, double p);

}  // namespace treelift
