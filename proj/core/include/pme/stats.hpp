#pragma once

#include <span>

namespace pme {

/// (mean; standard error of the mean; median) of a sample, plus its range.
/// The standard error uses the n-1 sample deviation and is 0 for n < 2.
struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

double mean_of(std::span<const double> values);

/// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_stddev(std::span<const double> values);

}  // namespace pme
