#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace ddpce::metrics {

/// Linear interpolation between order statistics at position
/// h = (n - 1) * level (0-based) of the sorted sample.
double quantile(std::span<const double> samples, double level);
/// Same convention on data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double level);

/// 100 * (surrogate - reference) / |reference|, sign kept.
double percent_deviation(double surrogate_stat, double reference_stat);

struct DistributionSummary {
  double mean = 0.0;
  double std = 0.0;  // population convention (divide by n)
  std::map<double, double> quantiles;

  double q(double level) const;
};

DistributionSummary summarize(std::span<const double> samples, std::span<const double> levels);

}  // namespace ddpce::metrics
