#include "ddpce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ddpce/error.hpp"
#include "ddpce/text.hpp"

namespace ddpce::metrics {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::Config, "quantile level must lie in (0, 1), got " + text::format_short(level));
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw Error(ErrorKind::Config, "quantile of an empty sample");
  check_level(level);
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> samples, double level) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, level);
}

double percent_deviation(double surrogate_stat, double reference_stat) {
  if (reference_stat == 0.0)
    throw Error(ErrorKind::UndefinedDeviation, "percent deviation against a zero reference statistic");
  return 100.0 * (surrogate_stat - reference_stat) / std::abs(reference_stat);
}

double DistributionSummary::q(double level) const {
  const auto it = quantiles.find(level);
  if (it == quantiles.end())
    throw Error(ErrorKind::Config, "quantile level " + text::format_short(level) + " was not summarized");
  return it->second;
}

DistributionSummary summarize(std::span<const double> samples, std::span<const double> levels) {
  if (samples.empty()) throw Error(ErrorKind::Config, "cannot summarize an empty sample");
  DistributionSummary s;
  const double n = static_cast<double>(samples.size());
  for (double v : samples) s.mean += v;
  s.mean /= n;
  double var = 0.0;
  for (double v : samples) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  for (double level : levels) s.quantiles[level] = quantile_sorted(sorted, level);
  return s;
}

}  // namespace ddpce::metrics
